// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "lehopp/lehopp.h"

#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "../core/evalkit.hpp"
#include "../core/pipeline.hpp"

using namespace lehopp;

struct lhp_image {
  Image value;
};
struct lhp_map {
  ScalarMap value;
};
struct lhp_mask {
  BitMask value;
};

namespace {

thread_local std::string g_last_error;

lhp_status status_of(Errc code) {
  switch (code) {
  case Errc::io:
    return LHP_E_IO;
  case Errc::unsupported_format:
  case Errc::malformed_header:
  case Errc::truncated_payload:
  case Errc::ambiguous_mask:
  case Errc::big_endian:
  case Errc::nan_payload:
    return LHP_E_FORMAT;
  case Errc::shape_mismatch:
  case Errc::invalid_argument:
  case Errc::empty_selection:
    return LHP_E_INVALID;
  case Errc::non_convergence:
  case Errc::undefined_statistic:
    return LHP_E_NUMERIC;
  }
  return LHP_E_UNKNOWN;
}

template <typename Fn> lhp_status guarded(Fn&& fn) {
  try {
    fn();
    return LHP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LHP_E_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return LHP_E_UNKNOWN;
  }
}

lhp_status invalid(const char* message) {
  g_last_error = message;
  return LHP_E_INVALID;
}

RunConfig config_from(const lhp_run_options* options) {
  RunConfig cfg;
  if (options == nullptr) {
    return cfg;
  }
  if (options->n_src > 0) {
    cfg.render.n_src = options->n_src;
  }
  cfg.render.angle_weight = options->angle_weight;
  cfg.render.distance_weight = options->distance_weight;
  if (options->visibility_tol > 0.0) {
    cfg.render.visibility_tol = options->visibility_tol;
  }
  if (options->gammas != nullptr && options->gamma_count > 0) {
    cfg.gammas.assign(options->gammas, options->gammas + options->gamma_count);
  }
  cfg.scope = options->scope_global ? MaskScope::global : MaskScope::per_view;
  if (options->intra_period >= 1) {
    cfg.intra_period = options->intra_period;
  }
  cfg.fill = options->fill_hold ? FillPolicy::hold_value : FillPolicy::inpaint;
  if (options->inpaint_radius >= 1) {
    cfg.inpaint.radius = options->inpaint_radius;
  }
  if (options->targets != nullptr && options->target_count > 0) {
    cfg.targets.assign(options->targets, options->targets + options->target_count);
  }
  if (options->baseline_blocks != nullptr && options->baseline_count > 0) {
    cfg.baselines.clear();
    for (int i = 0; i < options->baseline_count; ++i) {
      cfg.baselines.push_back(
          {"base" + std::to_string(i + 1), options->baseline_blocks[i]});
    }
  }
  cfg.seed = options->seed;
  if (options->fps > 0.0) {
    cfg.fps = options->fps;
  }
  cfg.emit_timings = options->emit_timings != 0;
  return cfg;
}

} // namespace

extern "C" {

const char* lhp_version(void) { return "0.1.0"; }

const char* lhp_last_error(void) { return g_last_error.c_str(); }

/* --- rasters ----------------------------------------------------------- */

lhp_status lhp_image_read_ppm(const char* path, lhp_image** out) {
  if (path == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out = new lhp_image{read_ppm(path)}; });
}

lhp_status lhp_image_write_ppm(const lhp_image* image, const char* path) {
  if (image == nullptr || path == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { write_ppm(image->value, path); });
}

lhp_status lhp_image_create(int width, int height, const float* rgb_or_null, lhp_image** out) {
  if (out == nullptr) {
    return invalid("null argument");
  }
  if (width <= 0 || height <= 0) {
    return invalid("image dimensions must be positive");
  }
  return guarded([&] {
    Image img = Image::filled(width, height, 0.0f);
    if (rgb_or_null != nullptr) {
      std::memcpy(img.data.data(), rgb_or_null, img.data.size() * sizeof(float));
    }
    *out = new lhp_image{std::move(img)};
  });
}

int lhp_image_width(const lhp_image* image) { return image != nullptr ? image->value.width : 0; }
int lhp_image_height(const lhp_image* image) { return image != nullptr ? image->value.height : 0; }
const float* lhp_image_data(const lhp_image* image) {
  return image != nullptr ? image->value.data.data() : nullptr;
}
void lhp_image_free(lhp_image* image) { delete image; }

lhp_status lhp_map_read_pfm(const char* path, lhp_map** out) {
  if (path == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out = new lhp_map{read_pfm_map(path)}; });
}

lhp_status lhp_map_write_pfm(const lhp_map* map, const char* path) {
  if (map == nullptr || path == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { write_pfm(map->value, path); });
}

int lhp_map_width(const lhp_map* map) { return map != nullptr ? map->value.width : 0; }
int lhp_map_height(const lhp_map* map) { return map != nullptr ? map->value.height : 0; }
const float* lhp_map_data(const lhp_map* map) {
  return map != nullptr ? map->value.data.data() : nullptr;
}
void lhp_map_free(lhp_map* map) { delete map; }

lhp_status lhp_mask_read_pgm(const char* path, lhp_mask** out) {
  if (path == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out = new lhp_mask{read_pgm(path)}; });
}

lhp_status lhp_mask_write_pgm(const lhp_mask* mask, const char* path) {
  if (mask == nullptr || path == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { write_pgm(mask->value, path); });
}

int lhp_mask_width(const lhp_mask* mask) { return mask != nullptr ? mask->value.width : 0; }
int lhp_mask_height(const lhp_mask* mask) { return mask != nullptr ? mask->value.height : 0; }
const uint8_t* lhp_mask_bits(const lhp_mask* mask) {
  return mask != nullptr ? mask->value.bits.data() : nullptr;
}
long long lhp_mask_pruned_count(const lhp_mask* mask) {
  return mask != nullptr ? static_cast<long long>(mask->value.pruned_count()) : 0;
}
void lhp_mask_free(lhp_mask* mask) { delete mask; }

lhp_status lhp_mask_from_importance(const lhp_map* importance, double gamma, lhp_mask** out) {
  if (importance == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out = new lhp_mask{build_mask(importance->value, gamma)}; });
}

lhp_status lhp_random_block_mask(int width, int height, int block, double gamma,
                                 unsigned long long seed, lhp_mask** out) {
  if (out == nullptr) {
    return invalid("null argument");
  }
  return guarded(
      [&] { *out = new lhp_mask{random_block_mask(width, height, block, gamma, seed)}; });
}

lhp_status lhp_apply_mask(const lhp_image* image, const lhp_mask* mask, int fill_hold,
                          int inpaint_radius, lhp_image** out) {
  if (image == nullptr || mask == nullptr || out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    InpaintConfig cfg;
    if (inpaint_radius > 0) {
      cfg.radius = inpaint_radius;
    }
    *out = new lhp_image{apply_mask(image->value, mask->value,
                                    fill_hold ? FillPolicy::hold_value : FillPolicy::inpaint,
                                    cfg)};
  });
}

/* --- metrics ------------------------------------------------------------ */

lhp_status lhp_psnr(const lhp_image* a, const lhp_image* b, double peak, double* out_db) {
  if (a == nullptr || b == nullptr || out_db == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out_db = psnr(a->value, b->value, peak); });
}

lhp_status lhp_ssim(const lhp_image* a, const lhp_image* b, double peak, double* out_value) {
  if (a == nullptr || b == nullptr || out_value == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out_value = ssim(a->value, b->value, 11, 0.01, 0.03, peak); });
}

lhp_status lhp_pixel_rate(int views, int width, int height, double fps, double gamma,
                          lhp_pixel_rate_report* out) {
  if (out == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const PixelRateReport r = pixel_rate(views, width, height, fps, gamma);
    out->raw_mpx_s = r.raw_mpx_s;
    out->pruned_mpx_s = r.pruned_mpx_s;
    out->limit_mpx_s = r.limit_mpx_s;
    out->within_limit = r.within_limit ? 1 : 0;
  });
}

lhp_status lhp_bd_rate_files(const char* anchor_csv, const char* test_csv, double* out_percent) {
  if (anchor_csv == nullptr || test_csv == nullptr || out_percent == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { *out_percent = bd_rate_from_files(anchor_csv, test_csv); });
}

/* --- pipeline stages ----------------------------------------------------- */

void lhp_run_options_init(lhp_run_options* options) {
  if (options == nullptr) {
    return;
  }
  std::memset(options, 0, sizeof(*options));
  options->n_src = 9;
  options->angle_weight = 1.0;
  options->distance_weight = 1.0;
  options->visibility_tol = 0.01;
  options->intra_period = 16;
  options->inpaint_radius = 3;
  options->seed = 1;
  options->fps = 30.0;
  options->oracle_pixels = 100;
}

lhp_status lhp_synth(const char* spec_json_path, const char* out_dir) {
  if (spec_json_path == nullptr || out_dir == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] { cmd_synth(spec_json_path, out_dir); });
}

lhp_status lhp_run_importance(const char* manifest_path, const lhp_run_options* options,
                              const char* out_dir) {
  if (manifest_path == nullptr || out_dir == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const Scene scene = load_manifest(manifest_path);
    cmd_importance(scene, config_from(options), out_dir);
  });
}

lhp_status lhp_run_prune(const char* manifest_path, const char* importance_dir,
                         const lhp_run_options* options, const char* out_dir) {
  if (manifest_path == nullptr || importance_dir == nullptr || out_dir == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const Scene scene = load_manifest(manifest_path);
    cmd_prune(scene, importance_dir, config_from(options), out_dir);
  });
}

lhp_status lhp_run_eval(const char* manifest_path, const lhp_eval_variant* variants,
                        int variant_count, const lhp_run_options* options, const char* out_csv) {
  if (manifest_path == nullptr || variants == nullptr || out_csv == nullptr) {
    return invalid("null argument");
  }
  if (variant_count <= 0) {
    return invalid("need at least one evaluation variant");
  }
  return guarded([&] {
    const Scene scene = load_manifest(manifest_path);
    std::vector<EvalVariant> list;
    list.reserve(static_cast<size_t>(variant_count));
    for (int i = 0; i < variant_count; ++i) {
      EvalVariant v;
      v.label = variants[i].label != nullptr ? variants[i].label : "variant";
      v.gamma = variants[i].gamma;
      if (variants[i].images_dir != nullptr) {
        v.images_dir = variants[i].images_dir;
      }
      if (variants[i].masks_dir != nullptr) {
        v.masks_dir = variants[i].masks_dir;
      }
      list.push_back(std::move(v));
    }
    cmd_eval(scene, list, config_from(options), out_csv);
  });
}

lhp_status lhp_run_pipeline(const char* spec_json_path, const char* manifest_path,
                            const lhp_run_options* options, const char* out_dir) {
  if (out_dir == nullptr) {
    return invalid("null argument");
  }
  if (spec_json_path == nullptr && manifest_path == nullptr) {
    return invalid("pipeline needs a scene spec or a manifest");
  }
  return guarded([&] {
    RunConfig cfg = config_from(options);
    cfg.out_dir = out_dir;
    if (manifest_path != nullptr) {
      cfg.manifest = manifest_path;
    }
    std::optional<std::filesystem::path> spec;
    if (spec_json_path != nullptr) {
      spec = spec_json_path;
    }
    cmd_pipeline(cfg, spec);
  });
}

lhp_status lhp_run_oracle(const char* manifest_path, const lhp_run_options* options,
                          const char* out_dir, double* out_rho, int* out_rho_defined) {
  if (manifest_path == nullptr || out_dir == nullptr) {
    return invalid("null argument");
  }
  return guarded([&] {
    const Scene scene = load_manifest(manifest_path);
    const int pixels = options != nullptr && options->oracle_pixels > 0 ? options->oracle_pixels
                                                                        : 100;
    const bool force = options != nullptr && options->force != 0;
    const uint64_t seed = options != nullptr ? options->seed : 1;
    const OracleReport report =
        cmd_oracle(scene, pixels, seed, force, config_from(options), out_dir);
    if (out_rho != nullptr) {
      *out_rho = report.rho;
    }
    if (out_rho_defined != nullptr) {
      *out_rho_defined = report.rho_defined ? 1 : 0;
    }
  });
}

} // extern "C"
