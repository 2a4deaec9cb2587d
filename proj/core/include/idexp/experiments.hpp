#pragma once

#include "idexp/model.hpp"
#include "idexp/report.hpp"

#include <cstdint>

namespace idexp {

// CSV schemas (column order is stable):
//   cross-explain:   trial, projection, mean_vertex_error_mm, param_magnitude,
//                    residual_norm_mm, deformation_mm
//   pc-cross:        trial, source_block, projection, mean_vertex_error_mm,
//                    param_magnitude, residual_norm_mm, deformation_mm
//   angle-curve:     components, smallest_angle_rad, smallest_angle_deg
//   error-vs-params: components, projection, trials, mean_vertex_error_mm,
//                    stddev_vertex_error_mm, mean_param_magnitude,
//                    mean_residual_norm_mm
//   measure:         trial, seed, epsilon, dim, mu0, analytic_measure,
//                    lower_bound, det_lhs, det_rhs, det_rel_error,
//                    determinant_measure, mc_measure, mc_rel_stderr,
//                    mc_ratio, hit_miss_measure, hit_miss_rel_stderr,
//                    hit_miss_ratio, unbounded
const std::vector<std::string>& report_columns(ExperimentId id);

/// Config prefilled with the model's identity fields and `id`.
ExperimentConfig default_config(const ShapeModel& model, ExperimentId id);

/// Full latents per trial, synthesized and then projected with Identity,
/// Expression and Full. `deformation_mm` is the mean vertex distance of the
/// synthesized shape from the mean.
ExperimentReport run_cross_explain(const ShapeModel& model, std::int64_t trials, std::uint64_t seed,
                                   double tol = 1e-10);

/// Shapes driven by the first `n_active` components of one block, projected
/// onto the opposite block only.
ExperimentReport run_pc_cross(const ShapeModel& model, std::int64_t trials, std::uint64_t seed,
                              Index n_active = 2, double tol = 1e-10);

ExperimentReport run_angle_curve(const ShapeModel& model, double tol = 1e-10);

/// One fixed set of `trials` Full shapes, reprojected for every component
/// count j = 1..max(m, k) against models restricted to min(j, m) identity
/// and/or min(j, k) expression columns.
ExperimentReport run_error_vs_params(const ShapeModel& model, std::int64_t trials = 100,
                                     std::uint64_t seed = 0, double tol = 1e-10);

/// Determinant identity plus Monte Carlo measure, one row per trial (trial t
/// sampled with derive_seed(seed, t)). Degenerate models give a flagged row.
ExperimentReport run_measure_check(const ShapeModel& model, double epsilon, std::int64_t samples,
                                   std::uint64_t seed, std::int64_t trials = 1,
                                   unsigned workers = 1, double tol = 1e-10);

/// Dispatch on config.experiment. Applies config.raw_coefficients and checks
/// the model's dimensions against the config (DimensionError on mismatch).
ExperimentReport run_experiment(const ShapeModel& model, const ExperimentConfig& config);

}  // namespace idexp
