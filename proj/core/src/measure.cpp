#include "frame.hpp"
#include "idexp/errors.hpp"
#include "idexp/rng.hpp"
#include "idexp/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace idexp {
namespace {

constexpr Index kBatches = 32;
constexpr double kMaxCondition = 1e12;
// Offsets the hit-or-miss streams away from the covariance streams.
constexpr std::uint64_t kHitMissStream = 0x6869746d697373ULL;

struct CovarianceBatch {
  Eigen::VectorXd sum_x, sum_y;
  Eigen::MatrixXd sum_xx, sum_yy;
  Index count = 0;
};

struct HitBatch {
  std::int64_t hits = 0;
  Index count = 0;
};

Index batch_size(std::int64_t samples, Index b) {
  const Index base = static_cast<Index>(samples) / kBatches;
  const Index rem = static_cast<Index>(samples) % kBatches;
  return base + (b < rem ? 1 : 0);
}

double covariance_logdet(const Eigen::VectorXd& sum, const Eigen::MatrixXd& sum_sq, Index count) {
  const double nn = static_cast<double>(count);
  const Eigen::VectorXd mean = sum / nn;
  const Eigen::MatrixXd cov = (sum_sq - nn * mean * mean.transpose()) / (nn - 1.0);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double volume_ratio(const CovarianceBatch& b) {
  return std::exp(0.5 * (covariance_logdet(b.sum_y, b.sum_yy, b.count) -
                         covariance_logdet(b.sum_x, b.sum_xx, b.count)));
}

// Uniform point in the radius-eps ball: Gaussian direction, radius eps*U^(1/d).
void sample_ball(Xoshiro256ss& rng, std::normal_distribution<double>& normal, double eps,
                 Eigen::VectorXd& x) {
  double norm = 0.0;
  do {
    for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    norm = x.norm();
  } while (norm == 0.0);
  const double radius = eps * std::pow(rng.uniform01(), 1.0 / static_cast<double>(x.size()));
  x *= radius / norm;
}

CovarianceBatch covariance_batch(const Eigen::MatrixXd& inv_map, double eps, std::uint64_t seed, Index b,
                                 Index count) {
  const Index d = inv_map.rows();
  CovarianceBatch out{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d),
                      Eigen::MatrixXd::Zero(d, d), count};
  Xoshiro256ss rng = substream(seed, static_cast<std::uint64_t>(b));
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(d), y(d);
  for (Index s = 0; s < count; ++s) {
    sample_ball(rng, normal, eps, x);
    y.noalias() = inv_map * x;
    out.sum_x += x;
    out.sum_y += y;
    out.sum_xx.selfadjointView<Eigen::Lower>().rankUpdate(x);
    out.sum_yy.selfadjointView<Eigen::Lower>().rankUpdate(y);
  }
  out.sum_xx = out.sum_xx.selfadjointView<Eigen::Lower>();
  out.sum_yy = out.sum_yy.selfadjointView<Eigen::Lower>();
  return out;
}

HitBatch hit_batch(const Eigen::MatrixXd& map, const Eigen::VectorXd& half_width, double eps,
                   std::uint64_t seed, Index b, Index count) {
  HitBatch out{0, count};
  Xoshiro256ss rng = substream(seed, static_cast<std::uint64_t>(b));
  Eigen::VectorXd a(half_width.size());
  const double eps2 = eps * eps;
  for (Index s = 0; s < count; ++s) {
    for (Index i = 0; i < a.size(); ++i) a(i) = half_width(i) * (2.0 * rng.uniform01() - 1.0);
    if ((map * a).squaredNorm() <= eps2) ++out.hits;
  }
  return out;
}

// Runs job(b) for every batch b; batch results are written by index so the
// merge order never depends on the worker count.
template <class Job>
void for_each_batch(unsigned workers, Job&& job) {
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(kBatches));
  if (workers == 1) {
    for (Index b = 0; b < kBatches; ++b) job(b);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Index b = w; b < kBatches; b += workers) job(b);
    });
  }
}

void mark_unbounded(MeasureEstimate& est) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  est.unbounded = true;
  est.analytic_alpha_measure = inf;
  est.determinant_alpha_measure = inf;
  est.mc_alpha_measure = inf;
  est.hit_miss_alpha_measure = inf;
  est.mc_rel_stderr = 0.0;
  est.hit_miss_rel_stderr = 0.0;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

MeasureEstimate mc_measure_estimate(const ShapeModel& model, double epsilon, const McOptions& opts) {
  if (opts.samples < 1000) throw RangeError("mc_measure_estimate needs at least 1000 samples");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw RangeError("epsilon must be positive and finite");

  MeasureEstimate est;
  std::optional<detail::CombinedFrame> frame;
  try {
    frame.emplace(detail::combined_frame(model, opts.tol));
  } catch (const DegenerateSubspace&) {
    est.epsilon = epsilon;
    est.dim = model.m() + model.k();
    est.ball_measure_mu0 = ball_volume(est.dim, epsilon);
    est.samples = opts.samples;
    est.seed = opts.seed;
    mark_unbounded(est);
    est.lower_bound = std::numeric_limits<double>::infinity();
    est.log_amplification = std::numeric_limits<double>::infinity();
    return est;
  }

  est = amplification(principal_angles(frame->id, frame->exp), epsilon, frame->id.rank(), frame->exp.rank());
  est.samples = opts.samples;
  est.seed = opts.seed;

  const Eigen::MatrixXd& map = frame->qtm;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(map).singularValues();
  if (est.unbounded || !(sv(sv.size() - 1) * kMaxCondition > sv(0))) {
    mark_unbounded(est);
    return est;
  }

  const Eigen::MatrixXd inv_map = map.inverse();
  const double mu0 = est.ball_measure_mu0;
  est.determinant_alpha_measure = mu0 / std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(map).determinant());

  // Covariance route: image cloud vs. the source ball cloud it came from.
  std::vector<CovarianceBatch> cov(kBatches);
  for_each_batch(opts.workers, [&](Index b) {
    cov[b] = covariance_batch(inv_map, epsilon, opts.seed, b, batch_size(opts.samples, b));
  });
  CovarianceBatch pooled = cov.front();
  std::vector<double> batch_ratios;
  batch_ratios.reserve(kBatches);
  for (Index b = 0; b < kBatches; ++b) {
    batch_ratios.push_back(volume_ratio(cov[b]));
    if (b == 0) continue;
    pooled.sum_x += cov[b].sum_x;
    pooled.sum_y += cov[b].sum_y;
    pooled.sum_xx += cov[b].sum_xx;
    pooled.sum_yy += cov[b].sum_yy;
    pooled.count += cov[b].count;
  }
  const double ratio = volume_ratio(pooled);
  est.mc_alpha_measure = mu0 * ratio;
  // Batch-means spread, combined with a summation roundoff bound of
  // samples * d * machine epsilon.
  const double sampling = stderr_of(batch_ratios) / ratio;
  const double roundoff = static_cast<double>(opts.samples) * static_cast<double>(map.rows()) *
                          std::numeric_limits<double>::epsilon();
  est.mc_rel_stderr = std::hypot(sampling, roundoff);

  // Hit-or-miss route: sample the axis-aligned bounding box of the image
  // ellipsoid {a : |map a| <= eps}; half-width i is eps * |row i of map^-1|.
  const Eigen::VectorXd half_width = epsilon * inv_map.rowwise().norm();
  const double box_volume = (2.0 * half_width).prod();
  std::vector<HitBatch> hits(kBatches);
  const std::uint64_t hit_seed = derive_seed(opts.seed, kHitMissStream);
  for_each_batch(opts.workers, [&](Index b) {
    hits[b] = hit_batch(map, half_width, epsilon, hit_seed, b, batch_size(opts.samples, b));
  });
  std::int64_t total_hits = 0;
  for (const auto& h : hits) total_hits += h.hits;
  const double n = static_cast<double>(opts.samples);
  const double p = static_cast<double>(total_hits) / n;
  est.hit_miss_alpha_measure = box_volume * p;
  est.hit_miss_rel_stderr = p > 0.0 ? std::sqrt((1.0 - p) / (n * p)) : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace idexp
