#pragma once

#include "idexp/model.hpp"
#include "idexp/subspace.hpp"

#include <Eigen/Dense>

namespace idexp::detail {

// Orthonormalized blocks and the adapted frame Q = [U_id Q_perp] of their
// combined span. qtm = Q^T [U_id U_exp], block upper triangular.
struct CombinedFrame {
  OrthonormalBasis id;
  OrthonormalBasis exp;
  Eigen::MatrixXd q;
  Eigen::MatrixXd qtm;
};

// Throws DegenerateSubspace if either block or the combined span is rank
// deficient, DimensionError if a block is empty.
CombinedFrame combined_frame(const ShapeModel& model, double tol);

}  // namespace idexp::detail
