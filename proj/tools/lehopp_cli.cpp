// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the core exclusively through the
// public C API in lehopp/lehopp.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lehopp/lehopp.h"

namespace {

int check(lhp_status status) {
  if (status == LHP_OK) {
    return 0;
  }
  std::fprintf(stderr, "error: %s\n", lhp_last_error());
  return static_cast<int>(status);
}

struct CommonOptions {
  std::vector<double> gammas;
  std::string scope = "per-view";
  int intra_period = 16;
  int n_src = 9;
  std::string fill = "inpaint";
  int inpaint_radius = 3;
  unsigned long long seed = 1;
  double fps = 30.0;
  std::vector<int> targets;
  std::vector<int> blocks;
  bool timings = false;
  bool force = false;
  int oracle_pixels = 100;

  void attach(CLI::App* cmd) {
    cmd->add_option("--gamma", gammas, "pruned pixel fraction (repeatable)");
    cmd->add_option("--scope", scope, "quantile scope")
        ->check(CLI::IsMember({"per-view", "global"}));
    cmd->add_option("--intra-period", intra_period, "frames sharing one mask")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n-src", n_src, "source views per target render")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--fill", fill, "pruned pixel fill")->check(CLI::IsMember({"inpaint", "hold"}));
    cmd->add_option("--radius", inpaint_radius, "inpainting neighborhood radius")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "seed for baseline masks and oracle sampling");
    cmd->add_option("--fps", fps, "frame rate for pixel-rate accounting")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--target", targets, "target view id (repeatable; default all)");
    cmd->add_option("--block", blocks, "baseline block size (repeatable; default 32 4)");
    cmd->add_flag("--timings", timings,
                  "record wall-clock runtime_ms (makes reports non-reproducible)");
  }

  lhp_run_options build() const {
    lhp_run_options o;
    lhp_run_options_init(&o);
    o.n_src = n_src;
    if (!gammas.empty()) {
      o.gammas = gammas.data();
      o.gamma_count = static_cast<int>(gammas.size());
    }
    o.scope_global = scope == "global" ? 1 : 0;
    o.intra_period = intra_period;
    o.fill_hold = fill == "hold" ? 1 : 0;
    o.inpaint_radius = inpaint_radius;
    if (!targets.empty()) {
      o.targets = targets.data();
      o.target_count = static_cast<int>(targets.size());
    }
    if (!blocks.empty()) {
      o.baseline_blocks = blocks.data();
      o.baseline_count = static_cast<int>(blocks.size());
    }
    o.seed = seed;
    o.fps = fps;
    o.emit_timings = timings ? 1 : 0;
    o.force = force ? 1 : 0;
    o.oracle_pixels = oracle_pixels;
    return o;
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"lehopp: pixel pruning for multi-view image-based rendering"};
  app.set_version_flag("--version", lhp_version());
  app.require_subcommand(1);

  std::string spec;
  std::string manifest;
  std::string out_dir;
  std::string importance_dir;
  std::string anchor_csv;
  std::string test_csv;
  std::vector<std::string> variant_specs;
  CommonOptions common;

  CLI::App* synth = app.add_subcommand("synth", "render a scene spec to images + manifest");
  synth->add_option("--spec", spec, "scene spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_dir, "output directory")->required();

  CLI::App* importance =
      app.add_subcommand("importance", "compute per-view importance maps + histogram");
  importance->add_option("--manifest", manifest, "scene manifest")
      ->required()
      ->check(CLI::ExistingFile);
  importance->add_option("--out", out_dir, "output directory")->required();
  common.attach(importance);

  CLI::App* prune = app.add_subcommand("prune", "build masks and pruned/inpainted images");
  prune->add_option("--manifest", manifest, "scene manifest")
      ->required()
      ->check(CLI::ExistingFile);
  prune->add_option("--importance", importance_dir, "importance map directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  prune->add_option("--out", out_dir, "output directory")->required();
  common.attach(prune);

  CLI::App* eval = app.add_subcommand("eval", "render and score method variants");
  eval->add_option("--manifest", manifest, "scene manifest")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--variant", variant_specs,
                   "label:gamma:images_dir[:masks_dir]; label 'anchor' uses the scene images")
      ->required();
  eval->add_option("--out", out_dir, "report CSV path")->required();
  common.attach(eval);

  CLI::App* pipeline = app.add_subcommand("pipeline", "full run: synth/load through report");
  pipeline->add_option("--spec", spec, "scene spec JSON (synthesized under <out>/scene)")
      ->check(CLI::ExistingFile);
  pipeline->add_option("--manifest", manifest, "existing scene manifest")
      ->check(CLI::ExistingFile);
  pipeline->add_option("--out", out_dir, "output directory")->required();
  common.attach(pipeline);

  CLI::App* oracle = app.add_subcommand("oracle", "first-order estimate vs brute-force loss");
  oracle->add_option("--manifest", manifest, "scene manifest")
      ->required()
      ->check(CLI::ExistingFile);
  oracle->add_option("--out", out_dir, "output directory")->required();
  oracle->add_option("--n-pixels", common.oracle_pixels, "sampled pixels")
      ->check(CLI::PositiveNumber);
  oracle->add_flag("--force", common.force, "lift the scene-size guard");
  common.attach(oracle);

  CLI::App* bdrate = app.add_subcommand("bdrate", "Bjontegaard delta rate between RD curves");
  bdrate->add_option("--anchor", anchor_csv, "anchor RD CSV")
      ->required()
      ->check(CLI::ExistingFile);
  bdrate->add_option("--test", test_csv, "test RD CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return check(lhp_synth(spec.c_str(), out_dir.c_str()));
  }

  const lhp_run_options options = common.build();

  if (importance->parsed()) {
    return check(lhp_run_importance(manifest.c_str(), &options, out_dir.c_str()));
  }
  if (prune->parsed()) {
    return check(lhp_run_prune(manifest.c_str(), importance_dir.c_str(), &options,
                               out_dir.c_str()));
  }
  if (eval->parsed()) {
    std::vector<lhp_eval_variant> variants;
    std::vector<std::string> storage; // keeps the split pieces alive
    storage.reserve(variant_specs.size() * 4);
    for (const std::string& v : variant_specs) {
      std::vector<size_t> colons;
      for (size_t i = 0; i < v.size(); ++i) {
        if (v[i] == ':') {
          colons.push_back(i);
        }
      }
      if (colons.size() < 2) {
        std::fprintf(stderr, "error: variant '%s' is not label:gamma:dir[:masks]\n", v.c_str());
        return 2;
      }
      lhp_eval_variant variant{};
      storage.push_back(v.substr(0, colons[0]));
      variant.label = storage.back().c_str();
      try {
        variant.gamma = std::stod(v.substr(colons[0] + 1, colons[1] - colons[0] - 1));
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: bad gamma in variant '%s'\n", v.c_str());
        return 2;
      }
      const size_t dir_end = colons.size() >= 3 ? colons[2] : v.size();
      storage.push_back(v.substr(colons[1] + 1, dir_end - colons[1] - 1));
      if (!storage.back().empty() && storage.back() != "anchor") {
        variant.images_dir = storage.back().c_str();
      }
      if (colons.size() >= 3) {
        storage.push_back(v.substr(colons[2] + 1));
        if (!storage.back().empty()) {
          variant.masks_dir = storage.back().c_str();
        }
      }
      variants.push_back(variant);
    }
    return check(lhp_run_eval(manifest.c_str(), variants.data(),
                              static_cast<int>(variants.size()), &options, out_dir.c_str()));
  }
  if (pipeline->parsed()) {
    if (spec.empty() && manifest.empty()) {
      std::fprintf(stderr, "error: pipeline needs --spec or --manifest\n");
      return 2;
    }
    return check(lhp_run_pipeline(spec.empty() ? nullptr : spec.c_str(),
                                  manifest.empty() ? nullptr : manifest.c_str(), &options,
                                  out_dir.c_str()));
  }
  if (oracle->parsed()) {
    double rho = 0.0;
    int rho_defined = 0;
    const lhp_status status =
        lhp_run_oracle(manifest.c_str(), &options, out_dir.c_str(), &rho, &rho_defined);
    if (status == LHP_OK) {
      if (rho_defined) {
        std::printf("spearman_rho %.6f\n", rho);
      } else {
        std::printf("spearman_rho nan (zero variance)\n");
      }
    }
    return check(status);
  }
  if (bdrate->parsed()) {
    double percent = 0.0;
    const lhp_status status =
        lhp_bd_rate_files(anchor_csv.c_str(), test_csv.c_str(), &percent);
    if (status == LHP_OK) {
      std::printf("bd_rate_percent %.4f\n", percent);
    }
    return check(status);
  }
  return 0;
}
