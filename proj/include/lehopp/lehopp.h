/* Copyright Contributors to the lehopp Project
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the lehopp toolkit: gradient-based per-pixel importance
 * scoring and quantile-mask pruning of multi-view source images, with a
 * reference differentiable renderer, inpainting, random-pruning baselines
 * and quality/pixel-rate/BD-rate evaluation.
 *
 * Conventions:
 *   - Every fallible call returns lhp_status; LHP_OK is 0.
 *   - On failure, lhp_last_error() returns a thread-local message that
 *     stays valid until the next failing call on the same thread.
 *   - Objects returned through lhp_*_read / lhp_*_create are owned by the
 *     caller and released with the matching lhp_*_free.
 */

#ifndef LEHOPP_LEHOPP_H
#define LEHOPP_LEHOPP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lhp_status {
  LHP_OK = 0,
  LHP_E_IO = 1,      /* missing file, failed read/write */
  LHP_E_FORMAT = 2,  /* malformed or unsupported file contents */
  LHP_E_INVALID = 3, /* contract violation on arguments */
  LHP_E_NUMERIC = 4, /* non-convergence, undefined statistic */
  LHP_E_UNKNOWN = 5
} lhp_status;

const char* lhp_version(void);
const char* lhp_last_error(void);

/* --- rasters ----------------------------------------------------------- */

typedef struct lhp_image lhp_image; /* float RGB, row-major, values in [0,1] */
typedef struct lhp_map lhp_map;     /* float single channel */
typedef struct lhp_mask lhp_mask;   /* 1 = keep, 0 = prune */

lhp_status lhp_image_read_ppm(const char* path, lhp_image** out);
lhp_status lhp_image_write_ppm(const lhp_image* image, const char* path);
lhp_status lhp_image_create(int width, int height, const float* rgb_or_null, lhp_image** out);
int lhp_image_width(const lhp_image* image);
int lhp_image_height(const lhp_image* image);
const float* lhp_image_data(const lhp_image* image);
void lhp_image_free(lhp_image* image);

lhp_status lhp_map_read_pfm(const char* path, lhp_map** out);
lhp_status lhp_map_write_pfm(const lhp_map* map, const char* path);
int lhp_map_width(const lhp_map* map);
int lhp_map_height(const lhp_map* map);
const float* lhp_map_data(const lhp_map* map);
void lhp_map_free(lhp_map* map);

lhp_status lhp_mask_read_pgm(const char* path, lhp_mask** out);
lhp_status lhp_mask_write_pgm(const lhp_mask* mask, const char* path);
int lhp_mask_width(const lhp_mask* mask);
int lhp_mask_height(const lhp_mask* mask);
const uint8_t* lhp_mask_bits(const lhp_mask* mask);
long long lhp_mask_pruned_count(const lhp_mask* mask);
void lhp_mask_free(lhp_mask* mask);

/* Quantile mask: prunes exactly round(gamma * W * H) pixels of smallest
 * importance, ties broken by ascending (row, column). */
lhp_status lhp_mask_from_importance(const lhp_map* importance, double gamma, lhp_mask** out);

/* Block-random baseline mask (deterministic per seed). */
lhp_status lhp_random_block_mask(int width, int height, int block, double gamma,
                                 unsigned long long seed, lhp_mask** out);

/* Kept pixels unchanged; pruned pixels inpainted (fill_hold = 0) or set to
 * the mid-gray constant 0.5 (fill_hold = 1). */
lhp_status lhp_apply_mask(const lhp_image* image, const lhp_mask* mask, int fill_hold,
                          int inpaint_radius, lhp_image** out);

/* --- metrics ------------------------------------------------------------ */

lhp_status lhp_psnr(const lhp_image* a, const lhp_image* b, double peak, double* out_db);
lhp_status lhp_ssim(const lhp_image* a, const lhp_image* b, double peak, double* out_value);

typedef struct lhp_pixel_rate_report {
  double raw_mpx_s;
  double pruned_mpx_s;
  double limit_mpx_s; /* 32 Mpx/s at 30 fps, scaled linearly in fps */
  int within_limit;
} lhp_pixel_rate_report;

lhp_status lhp_pixel_rate(int views, int width, int height, double fps, double gamma,
                          lhp_pixel_rate_report* out);

/* Bjontegaard delta rate (percent) between two single-curve CSV files with
 * header "label,rate_kbps,psnr_db". */
lhp_status lhp_bd_rate_files(const char* anchor_csv, const char* test_csv, double* out_percent);

/* --- pipeline stages ----------------------------------------------------- */

typedef struct lhp_run_options {
  int n_src;              /* source views per target render (default 9) */
  double angle_weight;    /* blend weight alpha (default 1) */
  double distance_weight; /* blend weight beta (default 1) */
  double visibility_tol;  /* relative depth tolerance tau (default 0.01) */
  const double* gammas;   /* pruned fractions; NULL = {0.05, 0.10, 0.20} */
  int gamma_count;
  int scope_global; /* 0 = per-view quantile, 1 = global */
  int intra_period; /* frames sharing one mask (default 16) */
  int fill_hold;    /* 0 = inpaint pruned pixels, 1 = hold-value fill */
  int inpaint_radius;
  const int* targets; /* leave-one-out list; NULL = every view */
  int target_count;
  const int* baseline_blocks; /* NULL = {32, 4} (base1, base2) */
  int baseline_count;
  unsigned long long seed; /* baseline mask seeds derive from this */
  double fps;              /* pixel-rate accounting (default 30) */
  int emit_timings;        /* wall-clock runtime_ms column (default off: reports
                              stay byte-reproducible) */
  int force;               /* lift the oracle scene-size guard */
  int oracle_pixels;       /* samples for lhp_run_oracle (default 100) */
} lhp_run_options;

void lhp_run_options_init(lhp_run_options* options);

/* Renders a scene spec (JSON) into out_dir: images/, depth/, manifest.json. */
lhp_status lhp_synth(const char* spec_json_path, const char* out_dir);

lhp_status lhp_run_importance(const char* manifest_path, const lhp_run_options* options,
                              const char* out_dir);

lhp_status lhp_run_prune(const char* manifest_path, const char* importance_dir,
                         const lhp_run_options* options, const char* out_dir);

typedef struct lhp_eval_variant {
  const char* label;
  double gamma;
  const char* images_dir; /* NULL = anchor (the scene's own images) */
  const char* masks_dir;  /* optional, for exact pruned-pixel counts */
} lhp_eval_variant;

lhp_status lhp_run_eval(const char* manifest_path, const lhp_eval_variant* variants,
                        int variant_count, const lhp_run_options* options, const char* out_csv);

/* Full run: synth-or-load, importance, pruning, baselines, evaluation,
 * report.csv + run_summary.json. Exactly one of spec_json_path /
 * manifest_path may be NULL. */
lhp_status lhp_run_pipeline(const char* spec_json_path, const char* manifest_path,
                            const lhp_run_options* options, const char* out_dir);

/* First-order estimate vs brute-force loss change on seeded pixels.
 * out_rho_defined is 0 when the statistic is undefined (flat scene). */
lhp_status lhp_run_oracle(const char* manifest_path, const lhp_run_options* options,
                          const char* out_dir, double* out_rho, int* out_rho_defined);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LEHOPP_LEHOPP_H */
