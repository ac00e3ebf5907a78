// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evalkit.hpp"
#include "pruning.hpp"
#include "render.hpp"
#include "scenegen.hpp"

namespace lehopp {

struct BaselineSpec {
  std::string label;
  int block = 4;
};

struct RunConfig {
  std::filesystem::path manifest; // existing scene (pipeline may synthesize instead)
  std::vector<int> targets;       // leave-one-out list; empty = all views
  std::vector<double> gammas{0.05, 0.10, 0.20};
  MaskScope scope = MaskScope::per_view;
  int intra_period = 16;
  FillPolicy fill = FillPolicy::inpaint;
  RenderConfig render;
  InpaintConfig inpaint;
  std::vector<BaselineSpec> baselines{{"base1", 32}, {"base2", 4}};
  uint64_t seed = 1; // baseline mask seeds derive from this
  double fps = 30.0;
  bool emit_timings = false; // wall-clock runtimes make reports non-reproducible
  std::filesystem::path out_dir;
};

/// Renders a scene spec file into out_dir (images/, depth/, manifest.json).
void cmd_synth(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir);

/// Leave-one-out gradient pass over every frame: renders each target,
/// back-propagates the masked MSE, averages |gradients| per source view,
/// multiplies by the inpainting-proxy residual, and sums over the frames
/// of each intra-period. Writes one PFM per (view, period) plus a pooled
/// log-spaced histogram CSV.
void cmd_importance(const Scene& scene, const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Builds quantile masks from the stored importance maps and applies them
/// to the input images for every requested gamma. Emits masks (PGM), the
/// hold-value variant (for visualization/ablation) and the inpainted
/// variant used for rendering.
void cmd_prune(const Scene& scene, const std::filesystem::path& importance_dir,
               const RunConfig& cfg, const std::filesystem::path& out_dir);

struct EvalVariant {
  std::string label;
  double gamma = 0.0;
  std::filesystem::path images_dir; // empty = anchor (the scene's own images)
  std::filesystem::path masks_dir;  // optional; used for exact pruned-pixel counts
};

/// Renders every target from each variant's source images and scores it
/// against the ground-truth target. Appends per-(method, gamma) aggregate
/// rows. Layout: method,gamma,target,frame,psnr_db,ssim,pruned_pixels,
/// pixel_rate_mpxs,runtime_ms.
void cmd_eval(const Scene& scene, const std::vector<EvalVariant>& variants, const RunConfig& cfg,
              const std::filesystem::path& out_csv);

/// synth-or-load -> importance -> prune -> baselines -> eval -> reports.
/// If spec_path is set the scene is synthesized under out_dir/scene.
void cmd_pipeline(const RunConfig& cfg, const std::optional<std::filesystem::path>& spec_path);

struct OracleSample {
  int view_id = 0;
  int x = 0;
  int y = 0;
  double estimate = 0.0;
  double delta_loss = 0.0;
};

struct OracleReport {
  std::vector<OracleSample> samples;
  double rho = 0.0;         // Spearman rank correlation of estimate vs |delta|
  bool rho_defined = false; // false when either sequence is constant
};

/// Compares the first-order estimate against brute-force re-rendered loss
/// changes on n seeded textured pixels (frame 0). Refuses scenes larger
/// than 10^4 pixels per view unless force is set.
OracleReport cmd_oracle(const Scene& scene, int n_pixels, uint64_t seed, bool force,
                        const RunConfig& cfg, const std::filesystem::path& out_dir);

double cmd_bdrate(const std::filesystem::path& anchor_csv, const std::filesystem::path& test_csv);

// Shared layout helpers (stages communicate through these file names).
std::string frame_file_stem(int view_id, int frame_id);     // v000_f000
std::string importance_file_name(int view_id, int period);  // imp_v000_p000.pfm
std::string mask_file_name(int view_id, int period);        // mask_v000_p000.pgm
std::string gamma_dir_name(double gamma);                   // g0.05

/// One frame of a scene in the normalized domain; images can be overridden
/// by a variant directory holding replacement PPMs.
RenderSet load_render_set(const Scene& scene, int frame_id,
                          const std::filesystem::path& images_override);

} // namespace lehopp
