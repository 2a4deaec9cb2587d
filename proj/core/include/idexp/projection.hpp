#pragma once

#include "idexp/model.hpp"
#include "idexp/subspace.hpp"

#include <Eigen/Dense>

namespace idexp {

struct ProjectionResult {
  LatentVector latents;
  /// synthesize(model, latents).
  FaceShape reconstruction;
  /// Coordinates of reconstruction - mean in the orthonormal basis Q.
  Eigen::VectorXd gamma;
  double residual_norm = 0.0;      ///< |f - reconstruction|, mm
  double mean_vertex_error = 0.0;  ///< mm
  double param_magnitude = 0.0;
};

/// Unregularized least-squares latent recovery against one block or both.
///
/// The selected (stddev-scaled) basis M is factored once as M = Q R with Q
/// orthonormal. A shape f is projected as gamma = Q^T (f - mean) and mapped
/// back to coefficients with alpha = (Q^T M)^-1 gamma = R^-1 gamma. The other
/// block, for restricted projections, stays exactly zero.
class Projector {
public:
  /// Throws DegenerateSubspace when the selected basis is empty or numerically
  /// rank deficient (sigma_min <= tol * sigma_max).
  Projector(const ShapeModel& model, Block which, double tol = kDefaultRankTolerance);

  ProjectionResult project(const FaceShape& f) const;

  Block which() const { return which_; }
  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::MatrixXd& r() const { return r_; }

private:
  ShapeModel model_;
  Block which_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
};

ProjectionResult project(const ShapeModel& model, const FaceShape& f, Block which,
                         double tol = kDefaultRankTolerance);

/// Mean over vertices of the Euclidean distance between corresponding
/// 3-vectors. Throws DimensionError on length mismatch or length % 3 != 0.
double mean_vertex_error(const FaceShape& a, const FaceShape& b);

/// |active coefficients|_2 / (number of active coefficients). Throws
/// RangeError when there are no active coefficients.
double param_magnitude(const LatentVector& latents);

}  // namespace idexp
