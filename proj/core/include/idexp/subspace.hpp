#pragma once

#include "idexp/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace idexp {

/// Default relative rank tolerance: singular values below tol * sigma_max
/// are treated as zero.
inline constexpr double kDefaultRankTolerance = 1e-10;

/// Orthonormal basis of a column space together with the numerical rank
/// detected while building it.
class OrthonormalBasis {
public:
  /// Wrap a matrix that is already orthonormal. Throws InvalidValue if
  /// max|q^T q - I| exceeds 1e-10.
  static OrthonormalBasis from_orthonormal(Eigen::MatrixXd q);

  const Eigen::MatrixXd& q() const { return q_; }
  Index ambient_dim() const { return q_.rows(); }
  Index rank() const { return q_.cols(); }
  Index source_columns() const { return source_columns_; }
  /// True when the source matrix had fewer independent columns than columns.
  bool rank_deficient() const { return rank() < source_columns_; }

private:
  friend OrthonormalBasis orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>&, double);
  OrthonormalBasis(Eigen::MatrixXd q, Index source_columns)
      : q_(std::move(q)), source_columns_(source_columns) {}

  Eigen::MatrixXd q_;
  Index source_columns_ = 0;
};

/// Orthonormal basis for the column space of `basis`, of the numerical rank
/// (singular values above tol * sigma_max). Throws DegenerateSubspace for an
/// all-zero input, InvalidValue for non-finite entries and DimensionError
/// when there are more columns than rows.
OrthonormalBasis orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                                double tol = kDefaultRankTolerance);

/// Principal angles between two subspaces, ascending, in radians.
struct PrincipalAngleSet {
  std::vector<double> angles;
  std::vector<double> sines;
  /// sum_i -ln(sin theta_i); +infinity when some sine is zero.
  double log_amplification = 0.0;

  std::size_t size() const { return angles.size(); }
  double smallest() const;
};

/// Angles theta_i = arccos(sigma_i) from the singular values of u^T v. Angles
/// below 1e-4 are recomputed from the sine formulation (singular values of
/// s - l l^T s, s the lower-rank basis) where arccos loses precision.
/// Throws DimensionError on ambient-dimension mismatch.
PrincipalAngleSet principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& v);

struct AngleCurvePoint {
  Index components = 0;
  double smallest_angle = 0.0;
};

/// Smallest principal angle between the first j identity columns and the first
/// j expression columns, for j = 1..max_components.
std::vector<AngleCurvePoint> smallest_angle_curve(const ShapeModel& model, Index max_components,
                                                  double tol = kDefaultRankTolerance);

/// Volume of the d-dimensional Euclidean ball of radius `radius`.
double ball_volume(Index dim, double radius);

/// Measure of the latent set inferred from an epsilon-ball of shape noise.
struct MeasureEstimate {
  double epsilon = 0.0;
  Index dim = 0;
  double ball_measure_mu0 = 0.0;
  /// mu0 * prod 1/sin(theta_i).
  double analytic_alpha_measure = 0.0;
  /// mu0 / sin(theta_1).
  double lower_bound = 0.0;
  double log_amplification = 0.0;
  /// sin(theta_i) below 1e-14 or cond(Q^T M) above 1e12.
  bool unbounded = false;

  // Filled by mc_measure_estimate only.
  /// mu0 / |det(Q^T M)| from a direct determinant.
  double determinant_alpha_measure = 0.0;
  /// mu0 * sqrt(det cov(image) / det cov(source)) over the sampled ball.
  double mc_alpha_measure = 0.0;
  double mc_rel_stderr = 0.0;
  /// Hit-or-miss volume of {a : |Q^T M a| <= eps} sampled in its bounding box.
  double hit_miss_alpha_measure = 0.0;
  double hit_miss_rel_stderr = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Analytic fields from a set of principal angles. Throws RangeError when
/// epsilon <= 0 and DimensionError when angles.size() != min(m, k).
MeasureEstimate amplification(const PrincipalAngleSet& angles, double epsilon, Index m, Index k);

struct DeterminantCheck {
  double lhs = 0.0;  ///< |det(Q^T M)|
  double rhs = 0.0;  ///< prod sin(theta_i)
  double rel_error = 0.0;
};

/// |det(Q^T M)| against prod sin(theta_i), with M = [U_id U_exp] the
/// orthonormalized blocks and Q = [U_id Q_perp] an orthonormal basis of
/// span(M) whose leading columns are U_id. Throws DegenerateSubspace when
/// the combined basis is rank deficient.
DeterminantCheck determinant_identity_check(const ShapeModel& model,
                                            double tol = kDefaultRankTolerance);

struct McOptions {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Threads used for sampling. Results do not depend on this value: samples
  /// are drawn in fixed batches, batch b from substream b of the seed.
  unsigned workers = 1;
  double tol = kDefaultRankTolerance;
};

/// Monte Carlo estimate of |alpha(S)| for an epsilon-ball S. Samples the
/// ball in R^(m+k), maps through (Q^T M)^-1 and compares point-cloud
/// covariances; also runs an independent hit-or-miss volume estimate. Near
/// singular maps are reported as unbounded rather than thrown.
/// Throws RangeError for samples < 1000 or epsilon <= 0.
MeasureEstimate mc_measure_estimate(const ShapeModel& model, double epsilon, const McOptions& opts);

}  // namespace idexp
