#include "idexp/experiments.hpp"

#include "idexp/container.hpp"
#include "idexp/errors.hpp"
#include "idexp/projection.hpp"
#include "idexp/rng.hpp"
#include "idexp/subspace.hpp"
#include "idexp/synthetic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace idexp {
namespace {

constexpr std::array<Block, 3> kAllBlocks{Block::Identity, Block::Expression, Block::Full};

void require_trials(std::int64_t trials) {
  if (trials < 1) throw RangeError("experiments need trials >= 1");
}

ExperimentReport make_report(const ShapeModel& model, ExperimentId id) {
  ExperimentReport r;
  r.config = default_config(model, id);
  r.columns = report_columns(id);
  return r;
}

std::string block_name(Block b) { return std::string(to_string(b)); }

}  // namespace

const std::vector<std::string>& report_columns(ExperimentId id) {
  static const std::vector<std::string> cross{"trial", "projection", "mean_vertex_error_mm", "param_magnitude",
                                              "residual_norm_mm", "deformation_mm"};
  static const std::vector<std::string> pc{"trial", "source_block", "projection", "mean_vertex_error_mm",
                                           "param_magnitude", "residual_norm_mm", "deformation_mm"};
  static const std::vector<std::string> curve{"components", "smallest_angle_rad", "smallest_angle_deg"};
  static const std::vector<std::string> sweep{"components", "projection", "trials", "mean_vertex_error_mm",
                                              "stddev_vertex_error_mm", "mean_param_magnitude",
                                              "mean_residual_norm_mm"};
  static const std::vector<std::string> measure{
      "trial",         "seed",          "epsilon",          "dim",          "mu0",
      "analytic_measure", "lower_bound", "det_lhs",         "det_rhs",      "det_rel_error",
      "determinant_measure", "mc_measure", "mc_rel_stderr", "mc_ratio",     "hit_miss_measure",
      "hit_miss_rel_stderr", "hit_miss_ratio", "unbounded"};
  switch (id) {
    case ExperimentId::CrossExplain:
      return cross;
    case ExperimentId::PcCross:
      return pc;
    case ExperimentId::AngleCurve:
      return curve;
    case ExperimentId::ErrorVsParams:
      return sweep;
    case ExperimentId::MeasureCheck:
      break;
  }
  return measure;
}

ExperimentConfig default_config(const ShapeModel& model, ExperimentId id) {
  ExperimentConfig c;
  c.experiment = id;
  c.model_name = model.name();
  c.model_fingerprint = model_fingerprint(model);
  c.n = model.n();
  c.m = model.m();
  c.k = model.k();
  return c;
}

ExperimentReport run_cross_explain(const ShapeModel& model, std::int64_t trials, std::uint64_t seed, double tol) {
  require_trials(trials);
  ExperimentReport report = make_report(model, ExperimentId::CrossExplain);
  report.config.trials = trials;
  report.config.seed = seed;
  report.config.tolerance = tol;
  report.group_column = "projection";
  report.metric_columns = {"mean_vertex_error_mm", "param_magnitude", "residual_norm_mm"};

  const std::array<Projector, 3> projectors{Projector(model, Block::Identity, tol),
                                            Projector(model, Block::Expression, tol),
                                            Projector(model, Block::Full, tol)};
  const auto latents = sample_latents(model, Block::Full, trials, seed);
  const FaceShape mean = model.mean_shape();
  for (std::int64_t t = 0; t < trials; ++t) {
    const FaceShape f = synthesize(model, latents[static_cast<std::size_t>(t)]);
    const double deformation = mean_vertex_error(f, mean);
    for (const auto& p : projectors) {
      const auto res = p.project(f);
      report.rows.push_back({t, block_name(p.which()), res.mean_vertex_error, res.param_magnitude,
                             res.residual_norm, deformation});
    }
  }
  summarize(report);
  return report;
}

ExperimentReport run_pc_cross(const ShapeModel& model, std::int64_t trials, std::uint64_t seed, Index n_active,
                              double tol) {
  require_trials(trials);
  ExperimentReport report = make_report(model, ExperimentId::PcCross);
  report.config.trials = trials;
  report.config.seed = seed;
  report.config.tolerance = tol;
  report.config.n_active = n_active;
  report.group_column = "projection";
  report.metric_columns = {"mean_vertex_error_mm", "param_magnitude", "residual_norm_mm"};

  const Projector onto_exp(model, Block::Expression, tol);
  const Projector onto_id(model, Block::Identity, tol);
  const FaceShape mean = model.mean_shape();
  const Index id_active = std::min(n_active, model.m());
  const Index exp_active = std::min(n_active, model.k());
  for (std::int64_t t = 0; t < trials; ++t) {
    const auto u = static_cast<std::uint64_t>(t);
    const FaceShape from_id = synthesize(model, first_pc_latents(model, Block::Identity, id_active, derive_seed(seed, 2 * u)));
    const FaceShape from_exp =
        synthesize(model, first_pc_latents(model, Block::Expression, exp_active, derive_seed(seed, 2 * u + 1)));

    const auto a = onto_exp.project(from_id);
    report.rows.push_back({t, block_name(Block::Identity), block_name(Block::Expression), a.mean_vertex_error,
                           a.param_magnitude, a.residual_norm, mean_vertex_error(from_id, mean)});
    const auto b = onto_id.project(from_exp);
    report.rows.push_back({t, block_name(Block::Expression), block_name(Block::Identity), b.mean_vertex_error,
                           b.param_magnitude, b.residual_norm, mean_vertex_error(from_exp, mean)});
  }
  summarize(report);
  return report;
}

ExperimentReport run_angle_curve(const ShapeModel& model, double tol) {
  ExperimentReport report = make_report(model, ExperimentId::AngleCurve);
  report.config.tolerance = tol;
  report.metric_columns = {"smallest_angle_rad"};
  for (const auto& pt : smallest_angle_curve(model, std::min(model.m(), model.k()), tol)) {
    report.rows.push_back({static_cast<std::int64_t>(pt.components), pt.smallest_angle,
                           pt.smallest_angle * 180.0 / std::numbers::pi});
  }
  summarize(report);
  return report;
}

ExperimentReport run_error_vs_params(const ShapeModel& model, std::int64_t trials, std::uint64_t seed, double tol) {
  require_trials(trials);
  ExperimentReport report = make_report(model, ExperimentId::ErrorVsParams);
  report.config.trials = trials;
  report.config.seed = seed;
  report.config.tolerance = tol;
  report.group_column = "projection";
  report.metric_columns = {"mean_vertex_error_mm"};

  std::vector<FaceShape> shapes;
  shapes.reserve(static_cast<std::size_t>(trials));
  for (const auto& lv : sample_latents(model, Block::Full, trials, seed)) shapes.push_back(synthesize(model, lv));

  const Index max_j = std::max(model.m(), model.k());
  for (Index j = 1; j <= max_j; ++j) {
    const Index mj = std::min(j, model.m());
    const Index kj = std::min(j, model.k());
    for (Block b : kAllBlocks) {
      ShapeModel restricted = model;
      if (b != Block::Expression) restricted = restrict(restricted, Block::Identity, mj);
      if (b != Block::Identity) restricted = restrict(restricted, Block::Expression, kj);
      const Projector proj(restricted, b, tol);

      double sum_err = 0.0, sum_sq = 0.0, sum_mag = 0.0, sum_res = 0.0;
      for (const auto& f : shapes) {
        const auto res = proj.project(f);
        sum_err += res.mean_vertex_error;
        sum_sq += res.mean_vertex_error * res.mean_vertex_error;
        sum_mag += res.param_magnitude;
        sum_res += res.residual_norm;
      }
      const double n = static_cast<double>(trials);
      const double mean_err = sum_err / n;
      const double sd = trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * mean_err * mean_err) / (n - 1.0))) : 0.0;
      report.rows.push_back({static_cast<std::int64_t>(j), block_name(b), trials, mean_err, sd, sum_mag / n,
                             sum_res / n});
    }
  }
  summarize(report);
  return report;
}

ExperimentReport run_measure_check(const ShapeModel& model, double epsilon, std::int64_t samples, std::uint64_t seed,
                                   std::int64_t trials, unsigned workers, double tol) {
  require_trials(trials);
  ExperimentReport report = make_report(model, ExperimentId::MeasureCheck);
  report.config.trials = trials;
  report.config.seed = seed;
  report.config.epsilon = epsilon;
  report.config.samples = samples;
  report.config.workers = workers;
  report.config.tolerance = tol;
  report.metric_columns = {"mc_ratio", "hit_miss_ratio", "det_rel_error"};

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  DeterminantCheck det{nan, nan, nan};
  bool degenerate = false;
  try {
    det = determinant_identity_check(model, tol);
  } catch (const DegenerateSubspace&) {
    degenerate = true;
  }

  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const auto est = mc_measure_estimate(model, epsilon, McOptions{samples, trial_seed, workers, tol});
    const bool unbounded = degenerate || est.unbounded;
    const double mc_ratio = unbounded ? nan : est.mc_alpha_measure / est.analytic_alpha_measure;
    const double hm_ratio = unbounded ? nan : est.hit_miss_alpha_measure / est.analytic_alpha_measure;
    report.rows.push_back({t,
                           std::to_string(trial_seed),
                           epsilon,
                           static_cast<std::int64_t>(est.dim),
                           est.ball_measure_mu0,
                           est.analytic_alpha_measure,
                           est.lower_bound,
                           det.lhs,
                           det.rhs,
                           det.rel_error,
                           est.determinant_alpha_measure,
                           est.mc_alpha_measure,
                           est.mc_rel_stderr,
                           mc_ratio,
                           est.hit_miss_alpha_measure,
                           est.hit_miss_rel_stderr,
                           hm_ratio,
                           std::int64_t{unbounded ? 1 : 0}});
  }
  summarize(report);
  return report;
}

ExperimentReport run_experiment(const ShapeModel& stored, const ExperimentConfig& config) {
  if (stored.n() != config.n || stored.m() != config.m || stored.k() != config.k) {
    std::ostringstream os;
    os << "config expects n, m, k = " << config.n << ", " << config.m << ", " << config.k << " but the model has "
       << stored.n() << ", " << stored.m() << ", " << stored.k();
    throw DimensionError(os.str());
  }
  const ShapeModel model = config.raw_coefficients ? stored.with_raw_coefficients() : stored;

  ExperimentReport report;
  switch (config.experiment) {
    case ExperimentId::CrossExplain:
      report = run_cross_explain(model, config.trials, config.seed, config.tolerance);
      break;
    case ExperimentId::PcCross:
      report = run_pc_cross(model, config.trials, config.seed, config.n_active, config.tolerance);
      break;
    case ExperimentId::AngleCurve:
      report = run_angle_curve(model, config.tolerance);
      break;
    case ExperimentId::ErrorVsParams:
      report = run_error_vs_params(model, config.trials, config.seed, config.tolerance);
      break;
    case ExperimentId::MeasureCheck:
      report = run_measure_check(model, config.epsilon, config.samples, config.seed, config.trials, config.workers,
                                 config.tolerance);
      break;
  }
  // Echo the caller's config verbatim, identifying the stored model.
  report.config = config;
  return report;
}

}  // namespace idexp
