// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fsutil.hpp"
#include "rng.hpp"

namespace lehopp {

std::string frame_file_stem(int view_id, int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03d_f%03d", view_id, frame_id);
  return buf;
}

std::string importance_file_name(int view_id, int period) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "imp_v%03d_p%03d.pfm", view_id, period);
  return buf;
}

std::string mask_file_name(int view_id, int period) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "mask_v%03d_p%03d.pgm", view_id, period);
  return buf;
}

std::string gamma_dir_name(double gamma) { return "g" + format_double(gamma); }

namespace {

std::vector<int> target_list(const Scene& scene, const RunConfig& cfg) {
  std::vector<int> targets = cfg.targets;
  if (targets.empty()) {
    for (int v = 0; v < scene.view_count; ++v) {
      targets.push_back(v);
    }
  }
  std::sort(targets.begin(), targets.end());
  for (int t : targets) {
    require(t >= 0 && t < scene.view_count, Errc::invalid_argument,
            "target view " + std::to_string(t) + " not in manifest");
  }
  return targets;
}

int period_count(const Scene& scene, const RunConfig& cfg) {
  return (scene.frame_count + cfg.intra_period - 1) / cfg.intra_period;
}

std::vector<SourceView> gather_sources(const RenderSet& set, const ViewSelection& sel) {
  std::vector<SourceView> sources;
  sources.reserve(sel.source_ids.size());
  for (int sid : sel.source_ids) {
    SourceView sv;
    sv.view_id = sid;
    sv.image = &set.images[static_cast<size_t>(sid)];
    sv.depth = &set.depths[static_cast<size_t>(sid)];
    sv.camera = set.cameras[static_cast<size_t>(sid)];
    sources.push_back(sv);
  }
  return sources;
}

TargetGeometry target_geometry(const RenderSet& set, int target) {
  TargetGeometry geom;
  geom.camera = set.cameras[static_cast<size_t>(target)];
  geom.depth = &set.depths[static_cast<size_t>(target)];
  geom.width = set.width;
  geom.height = set.height;
  return geom;
}

} // namespace

RenderSet load_render_set(const Scene& scene, int frame_id,
                          const std::filesystem::path& images_override) {
  RenderSet set;
  set.width = scene.width;
  set.height = scene.height;
  for (int v = 0; v < scene.view_count; ++v) {
    const SceneViewEntry& e = scene.entry(v, frame_id);
    const std::filesystem::path image_path =
        images_override.empty() ? e.image_path
                                : images_override / (frame_file_stem(v, frame_id) + ".ppm");
    set.images.push_back(preprocess(read_ppm(image_path), scene.norm_params));
    set.depths.push_back(read_pfm_map(e.depth_path));
    set.cameras.push_back(e.camera);
  }
  return set;
}

void cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir) {
  write_scene(load_spec(spec_path), out_dir);
}

void cmd_importance(const Scene& scene, const RunConfig& cfg,
                    const std::filesystem::path& out_dir) {
  require(scene.view_count >= 2, Errc::invalid_argument, "importance needs at least two views");
  const std::vector<int> targets = target_list(scene, cfg);
  ensure_directory(out_dir);

  std::vector<ScalarMap> all_maps;
  for (int period = 0; period < period_count(scene, cfg); ++period) {
    const int frame_begin = period * cfg.intra_period;
    const int frame_end = std::min(scene.frame_count, frame_begin + cfg.intra_period);

    // Per view, the per-frame importance maps of this intra-period.
    std::vector<std::vector<ScalarMap>> frame_maps(static_cast<size_t>(scene.view_count));
    for (int frame = frame_begin; frame < frame_end; ++frame) {
      const RenderSet set = load_render_set(scene, frame, {});

      AccumState accum;
      for (int target : targets) {
        const ViewSelection sel = select_sources(target, set.cameras, cfg.render.n_src);
        const std::vector<SourceView> sources = gather_sources(set, sel);
        const RenderResult result = forward_render(sources, target_geometry(set, target),
                                                   cfg.render);
        const std::vector<std::array<ScalarMap, 3>> grads =
            backward_render(result, set.images[static_cast<size_t>(target)]);
        for (size_t k = 0; k < sel.source_ids.size(); ++k) {
          accum.add_render(sel.source_ids[k], grads[k]);
        }
      }
      const std::map<int, std::array<ScalarMap, 3>> mean_grads = accum.finalize();

      for (const auto& [view_id, grad_maps] : mean_grads) {
        const NormImage& img = set.images[static_cast<size_t>(view_id)];
        const NormImage proxy = inpaint_proxy(img);
        frame_maps[static_cast<size_t>(view_id)].push_back(
            importance_single(grad_maps, img, proxy));
      }
    }

    for (int v = 0; v < scene.view_count; ++v) {
      auto& maps = frame_maps[static_cast<size_t>(v)];
      if (maps.empty()) {
        continue; // view never selected as a source for any target
      }
      ScalarMap imp = accumulate_frames(maps, cfg.intra_period);
      write_pfm(imp, out_dir / importance_file_name(v, period));
      all_maps.push_back(std::move(imp));
    }
  }

  const std::vector<HistogramBin> hist = importance_histogram(all_maps);
  std::string csv = "bin_lower,bin_upper,count\n";
  for (const HistogramBin& b : hist) {
    csv += format_double(b.lower) + "," + format_double(b.upper) + "," +
           std::to_string(b.count) + "\n";
  }
  atomic_write(out_dir / "histogram.csv", csv);
}

void cmd_prune(const Scene& scene, const std::filesystem::path& importance_dir,
               const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const int periods = period_count(scene, cfg);
  for (double gamma : cfg.gammas) {
    const std::filesystem::path gamma_dir = out_dir / gamma_dir_name(gamma);
    for (int period = 0; period < periods; ++period) {
      std::vector<ScalarMap> importance;
      importance.reserve(static_cast<size_t>(scene.view_count));
      for (int v = 0; v < scene.view_count; ++v) {
        const std::filesystem::path path = importance_dir / importance_file_name(v, period);
        require(std::filesystem::exists(path), Errc::io,
                "missing importance map " + path.string());
        importance.push_back(read_pfm_map(path));
      }

      std::vector<BitMask> masks;
      if (cfg.scope == MaskScope::global) {
        masks = build_mask_global(importance, gamma);
      } else {
        masks.reserve(importance.size());
        for (const ScalarMap& m : importance) {
          masks.push_back(build_mask(m, gamma));
        }
      }

      const int frame_begin = period * cfg.intra_period;
      const int frame_end = std::min(scene.frame_count, frame_begin + cfg.intra_period);
      for (int v = 0; v < scene.view_count; ++v) {
        const BitMask& mask = masks[static_cast<size_t>(v)];
        write_pgm(mask, gamma_dir / "masks" / mask_file_name(v, period));
        for (int frame = frame_begin; frame < frame_end; ++frame) {
          const Image original = read_ppm(scene.entry(v, frame).image_path);
          const std::string name = frame_file_stem(v, frame) + ".ppm";
          write_ppm(apply_mask(original, mask, FillPolicy::hold_value), gamma_dir / "hold" / name);
          write_ppm(apply_mask(original, mask, FillPolicy::inpaint, cfg.inpaint),
                    gamma_dir / "inpaint" / name);
        }
      }
    }
  }
}

namespace {

struct ReportRecord {
  std::string method;
  double gamma = 0.0;
  int target = 0;
  int frame = 0;
  double psnr_db = 0.0;
  double ssim_value = 0.0;
  long long pruned_pixels = 0;
  double pixel_rate_mpxs = 0.0;
  long long runtime_ms = 0;
};

std::string record_row(const ReportRecord& r) {
  return r.method + "," + format_double(r.gamma) + "," + std::to_string(r.target) + "," +
         std::to_string(r.frame) + "," + format_double_fixed(r.psnr_db, 6) + "," +
         format_double_fixed(r.ssim_value, 6) + "," + std::to_string(r.pruned_pixels) + "," +
         format_double_fixed(r.pixel_rate_mpxs, 6) + "," + std::to_string(r.runtime_ms) + "\n";
}

/// Per-view pruned-pixel counts for one variant, read from its masks when
/// present, otherwise the per-view exact count round(gamma * W * H).
std::vector<long long> variant_pruned_counts(const Scene& scene, const EvalVariant& variant,
                                             int period) {
  std::vector<long long> counts(static_cast<size_t>(scene.view_count), 0);
  if (variant.images_dir.empty()) {
    return counts; // anchor
  }
  for (int v = 0; v < scene.view_count; ++v) {
    const std::filesystem::path mask_path =
        variant.masks_dir.empty() ? std::filesystem::path{}
                                  : variant.masks_dir / mask_file_name(v, period);
    if (!mask_path.empty() && std::filesystem::exists(mask_path)) {
      counts[static_cast<size_t>(v)] = static_cast<long long>(read_pgm(mask_path).pruned_count());
    } else {
      counts[static_cast<size_t>(v)] = std::llround(
          variant.gamma * static_cast<double>(scene.width) * static_cast<double>(scene.height));
    }
  }
  return counts;
}

} // namespace

void cmd_eval(const Scene& scene, const std::vector<EvalVariant>& variants, const RunConfig& cfg,
              const std::filesystem::path& out_csv) {
  const std::vector<int> targets = target_list(scene, cfg);
  std::string csv = "method,gamma,target,frame,psnr_db,ssim,pruned_pixels,pixel_rate_mpxs,"
                    "runtime_ms\n";

  std::vector<ReportRecord> aggregates;
  for (const EvalVariant& variant : variants) {
    if (!variant.images_dir.empty()) {
      require(std::filesystem::is_directory(variant.images_dir), Errc::io,
              "missing variant directory " + variant.images_dir.string());
    }
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    double pruned_sum = 0.0;
    long long runtime_sum = 0;
    int rows = 0;

    const double rate =
        pixel_rate(scene.view_count, scene.width, scene.height, cfg.fps, variant.gamma)
            .pruned_mpx_s;

    for (int frame = 0; frame < scene.frame_count; ++frame) {
      const int period = frame / cfg.intra_period;
      const std::vector<long long> pruned_counts = variant_pruned_counts(scene, variant, period);
      const RenderSet set = load_render_set(scene, frame, variant.images_dir);

      for (int target : targets) {
        const auto t0 = std::chrono::steady_clock::now();
        const ViewSelection sel = select_sources(target, set.cameras, cfg.render.n_src);
        const std::vector<SourceView> sources = gather_sources(set, sel);
        const RenderResult result = forward_render(sources, target_geometry(set, target),
                                                   cfg.render);

        Image rendered = depreprocess(result.image, scene.norm_params);
        for (size_t px = 0; px < result.hole_mask.bits.size(); ++px) {
          if (!result.hole_mask.bits[px]) { // unreachable geometry: mid-gray
            rendered.data[px * 3 + 0] = 0.5f;
            rendered.data[px * 3 + 1] = 0.5f;
            rendered.data[px * 3 + 2] = 0.5f;
          }
        }
        const Image truth = read_ppm(scene.entry(target, frame).image_path);

        ReportRecord r;
        r.method = variant.label;
        r.gamma = variant.gamma;
        r.target = target;
        r.frame = frame;
        r.psnr_db = psnr(rendered, truth);
        r.ssim_value = ssim(rendered, truth);
        for (int sid : sel.source_ids) {
          r.pruned_pixels += pruned_counts[static_cast<size_t>(sid)];
        }
        r.pixel_rate_mpxs = rate;
        const auto t1 = std::chrono::steady_clock::now();
        r.runtime_ms =
            cfg.emit_timings
                ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                : 0;
        csv += record_row(r);

        psnr_sum += r.psnr_db;
        ssim_sum += r.ssim_value;
        pruned_sum += static_cast<double>(r.pruned_pixels);
        runtime_sum += r.runtime_ms;
        ++rows;
      }
    }

    ReportRecord agg;
    agg.method = variant.label;
    agg.gamma = variant.gamma;
    agg.psnr_db = psnr_sum / rows;
    agg.ssim_value = ssim_sum / rows;
    agg.pruned_pixels = std::llround(pruned_sum / rows);
    agg.pixel_rate_mpxs = rate;
    agg.runtime_ms = runtime_sum / rows;
    aggregates.push_back(agg);
  }

  // Aggregate rows mirror the per-record layout with target/frame = "mean".
  for (const ReportRecord& agg : aggregates) {
    csv += agg.method + "," + format_double(agg.gamma) + ",mean,mean," +
           format_double_fixed(agg.psnr_db, 6) + "," + format_double_fixed(agg.ssim_value, 6) +
           "," + std::to_string(agg.pruned_pixels) + "," +
           format_double_fixed(agg.pixel_rate_mpxs, 6) + "," + std::to_string(agg.runtime_ms) +
           "\n";
  }
  atomic_write(out_csv, csv);
}

namespace {

nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["gammas"] = cfg.gammas;
  j["scope"] = cfg.scope == MaskScope::global ? "global" : "per-view";
  j["intra_period"] = cfg.intra_period;
  j["fill"] = cfg.fill == FillPolicy::inpaint ? "inpaint" : "hold";
  j["n_src"] = cfg.render.n_src;
  j["angle_weight"] = cfg.render.angle_weight;
  j["distance_weight"] = cfg.render.distance_weight;
  j["visibility_tol"] = cfg.render.visibility_tol;
  j["inpaint_radius"] = cfg.inpaint.radius;
  j["seed"] = cfg.seed;
  j["fps"] = cfg.fps;
  j["targets"] = cfg.targets;
  nlohmann::json baselines = nlohmann::json::array();
  for (const BaselineSpec& b : cfg.baselines) {
    baselines.push_back({{"label", b.label}, {"block", b.block}});
  }
  j["baselines"] = baselines;
  return j;
}

} // namespace

void cmd_pipeline(const RunConfig& cfg, const std::optional<std::filesystem::path>& spec_path) {
  require(!cfg.out_dir.empty(), Errc::invalid_argument, "pipeline needs an output directory");
  ensure_directory(cfg.out_dir);

  std::filesystem::path manifest = cfg.manifest;
  if (spec_path) {
    cmd_synth(*spec_path, cfg.out_dir / "scene");
    manifest = cfg.out_dir / "scene" / "manifest.json";
  }
  require(!manifest.empty(), Errc::invalid_argument, "pipeline needs a spec or a manifest");
  const Scene scene = load_manifest(manifest);

  const std::filesystem::path importance_dir = cfg.out_dir / "importance";
  cmd_importance(scene, cfg, importance_dir);

  const std::filesystem::path prune_root = cfg.out_dir / "prune";
  cmd_prune(scene, importance_dir, cfg, prune_root / "lehopp");

  // Random-block baselines, rebuilt per (baseline, gamma, view, period) with
  // seeds derived from the run seed.
  const std::string fill_dir = cfg.fill == FillPolicy::inpaint ? "inpaint" : "hold";
  const int periods = period_count(scene, cfg);
  for (size_t b = 0; b < cfg.baselines.size(); ++b) {
    const BaselineSpec& baseline = cfg.baselines[b];
    for (size_t g = 0; g < cfg.gammas.size(); ++g) {
      const double gamma = cfg.gammas[g];
      const std::filesystem::path gamma_dir =
          prune_root / baseline.label / gamma_dir_name(gamma);
      for (int period = 0; period < periods; ++period) {
        const int frame_begin = period * cfg.intra_period;
        const int frame_end = std::min(scene.frame_count, frame_begin + cfg.intra_period);
        for (int v = 0; v < scene.view_count; ++v) {
          const BitMask mask =
              random_block_mask(scene.width, scene.height, baseline.block, gamma,
                                mix_seed(cfg.seed, b, g, static_cast<uint64_t>(
                                                             v * 1000 + period)));
          write_pgm(mask, gamma_dir / "masks" / mask_file_name(v, period));
          for (int frame = frame_begin; frame < frame_end; ++frame) {
            const Image original = read_ppm(scene.entry(v, frame).image_path);
            write_ppm(apply_mask(original, mask, cfg.fill, cfg.inpaint),
                      gamma_dir / fill_dir / (frame_file_stem(v, frame) + ".ppm"));
          }
        }
      }
    }
  }

  std::vector<EvalVariant> variants;
  variants.push_back({"anchor", 0.0, {}, {}});
  for (double gamma : cfg.gammas) {
    EvalVariant v;
    v.label = "lehopp";
    v.gamma = gamma;
    v.images_dir = prune_root / "lehopp" / gamma_dir_name(gamma) / fill_dir;
    v.masks_dir = prune_root / "lehopp" / gamma_dir_name(gamma) / "masks";
    variants.push_back(v);
  }
  for (const BaselineSpec& baseline : cfg.baselines) {
    for (double gamma : cfg.gammas) {
      EvalVariant v;
      v.label = baseline.label;
      v.gamma = gamma;
      v.images_dir = prune_root / baseline.label / gamma_dir_name(gamma) / fill_dir;
      v.masks_dir = prune_root / baseline.label / gamma_dir_name(gamma) / "masks";
      variants.push_back(v);
    }
  }
  cmd_eval(scene, variants, cfg, cfg.out_dir / "report.csv");

  nlohmann::json summary;
  summary["tool"] = "lehopp";
  summary["config"] = config_echo(cfg);
  summary["scene"] = {{"width", scene.width},
                      {"height", scene.height},
                      {"views", scene.view_count},
                      {"frames", scene.frame_count}};
  summary["norm_params"] = {{"mean", scene.norm_params.mean}, {"std", scene.norm_params.stddev}};
  summary["spec_echo"] = scene.spec_echo;
  atomic_write(cfg.out_dir / "run_summary.json", summary.dump(2) + "\n");
}

OracleReport cmd_oracle(const Scene& scene, int n_pixels, uint64_t seed, bool force,
                        const RunConfig& cfg, const std::filesystem::path& out_dir) {
  require(n_pixels >= 2, Errc::invalid_argument, "oracle needs at least two pixels");
  const long long per_view = static_cast<long long>(scene.width) * scene.height;
  require(force || per_view <= 10000, Errc::invalid_argument,
          "scene has " + std::to_string(per_view) +
              " pixels per view; the oracle is O(pixels * renders), pass force to override");

  const std::vector<int> targets = target_list(scene, cfg);
  const RenderSet set = load_render_set(scene, 0, {});

  // Mean |gradient| per view, exactly as the importance stage computes it.
  AccumState accum;
  for (int target : targets) {
    const ViewSelection sel = select_sources(target, set.cameras, cfg.render.n_src);
    const std::vector<SourceView> sources = gather_sources(set, sel);
    const RenderResult result = forward_render(sources, target_geometry(set, target), cfg.render);
    const std::vector<std::array<ScalarMap, 3>> grads =
        backward_render(result, set.images[static_cast<size_t>(target)]);
    for (size_t k = 0; k < sel.source_ids.size(); ++k) {
      accum.add_render(sel.source_ids[k], grads[k]);
    }
  }
  const std::map<int, std::array<ScalarMap, 3>> mean_grads = accum.finalize();

  std::vector<NormImage> proxies;
  proxies.reserve(set.images.size());
  for (const NormImage& img : set.images) {
    proxies.push_back(inpaint_proxy(img));
  }

  // Candidate pool: textured pixels (nonzero proxy residual) of views that
  // took part in at least one render.
  struct Candidate {
    int view;
    int x;
    int y;
  };
  std::vector<Candidate> pool;
  for (const auto& [view_id, grads] : mean_grads) {
    const NormImage& img = set.images[static_cast<size_t>(view_id)];
    const NormImage& proxy = proxies[static_cast<size_t>(view_id)];
    for (int y = 0; y < scene.height; ++y) {
      for (int x = 0; x < scene.width; ++x) {
        double residual = 0.0;
        for (int c = 0; c < 3; ++c) {
          residual += std::abs(static_cast<double>(img.at(x, y, c)) -
                               static_cast<double>(proxy.at(x, y, c)));
        }
        if (residual > 1e-4) {
          pool.push_back({view_id, x, y});
        }
      }
    }
  }

  OracleReport report;
  SplitMix64 rng(seed);
  if (!pool.empty()) {
    rng.shuffle(pool);
    pool.resize(std::min(pool.size(), static_cast<size_t>(n_pixels)));
    for (const Candidate& c : pool) {
      // The estimate averages over the renders this view participated in;
      // hand the oracle the same target set.
      std::vector<int> participating;
      for (int t : targets) {
        const ViewSelection sel = select_sources(t, set.cameras, cfg.render.n_src);
        if (std::find(sel.source_ids.begin(), sel.source_ids.end(), c.view) !=
            sel.source_ids.end()) {
          participating.push_back(t);
        }
      }
      OracleSample sample;
      sample.view_id = c.view;
      sample.x = c.x;
      sample.y = c.y;
      sample.estimate = first_order_estimate(mean_grads.at(c.view),
                                             set.images[static_cast<size_t>(c.view)],
                                             proxies[static_cast<size_t>(c.view)], c.x, c.y);
      sample.delta_loss =
          oracle_delta_loss(set, c.view, c.x, c.y, participating, cfg.render);
      report.samples.push_back(sample);
    }
  }

  if (report.samples.size() >= 2) {
    std::vector<double> estimates;
    std::vector<double> abs_deltas;
    for (const OracleSample& s : report.samples) {
      estimates.push_back(s.estimate);
      abs_deltas.push_back(std::abs(s.delta_loss));
    }
    try {
      report.rho = rank_correlation(estimates, abs_deltas);
      report.rho_defined = true;
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_statistic) {
        throw;
      }
    }
  }

  std::string csv = "view,x,y,estimate,delta_l\n";
  for (const OracleSample& s : report.samples) {
    csv += std::to_string(s.view_id) + "," + std::to_string(s.x) + "," + std::to_string(s.y) +
           "," + format_double(s.estimate) + "," + format_double(s.delta_loss) + "\n";
  }
  atomic_write(out_dir / "oracle.csv", csv);

  nlohmann::json summary;
  summary["samples"] = report.samples.size();
  summary["spearman_rho"] = report.rho_defined ? format_double(report.rho) : "nan";
  summary["zero_variance"] = !report.rho_defined;
  summary["correlates"] = "estimate vs |delta_l|";
  atomic_write(out_dir / "oracle_summary.json", summary.dump(2) + "\n");
  return report;
}

double cmd_bdrate(const std::filesystem::path& anchor_csv, const std::filesystem::path& test_csv) {
  return bd_rate_from_files(anchor_csv, test_csv);
}

} // namespace lehopp
