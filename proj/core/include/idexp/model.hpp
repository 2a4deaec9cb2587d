#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace idexp {

using Index = Eigen::Index;

/// Which coefficient block(s) of a model an operation acts on.
enum class Block { Identity, Expression, Full };

std::string_view to_string(Block b);
/// Accepts "id"/"identity", "exp"/"expression", "full". Throws RangeError.
Block parse_block(std::string_view text);

/// A flattened (x0, y0, z0, x1, ...) vertex-coordinate vector in millimetres.
struct FaceShape {
  Eigen::VectorXd coords;

  Index size() const { return coords.size(); }
};

/// Identity and expression coefficients in stddev-scaled coordinates: a
/// coefficient of 1 moves one standard deviation along its basis column.
/// The inactive block of an Identity or Expression latent is all-zero.
struct LatentVector {
  Eigen::VectorXd id;
  Eigen::VectorXd exp;
  Block which = Block::Full;

  static LatentVector zeros(Index m, Index k, Block which = Block::Full);
  static LatentVector full(Eigen::VectorXd id, Eigen::VectorXd exp);
  static LatentVector identity(Eigen::VectorXd id, Index k);
  static LatentVector expression(Index m, Eigen::VectorXd exp);

  /// Coefficients of the active block(s), identity first.
  Eigen::VectorXd active() const;
};

/// Linear 3D morphable model: shape = mean + id_basis*diag(id_stddev)*a_id
///                                         + exp_basis*diag(exp_stddev)*a_exp.
/// Immutable after construction; the constructor enforces
///   n % 3 == 0, n >= m + k >= 1, finite entries, nonzero basis columns and
///   strictly positive finite stddevs.
class ShapeModel {
public:
  ShapeModel(std::string name, Eigen::VectorXd mean, Eigen::MatrixXd id_basis,
             Eigen::MatrixXd exp_basis, Eigen::VectorXd id_stddev, Eigen::VectorXd exp_stddev);

  const std::string& name() const { return name_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& id_basis() const { return id_basis_; }
  const Eigen::MatrixXd& exp_basis() const { return exp_basis_; }
  const Eigen::VectorXd& id_stddev() const { return id_stddev_; }
  const Eigen::VectorXd& exp_stddev() const { return exp_stddev_; }

  Index n() const { return mean_.size(); }
  Index m() const { return id_basis_.cols(); }
  Index k() const { return exp_basis_.cols(); }
  Index vertex_count() const { return n() / 3; }
  /// Number of coefficients in `b` (m, k or m + k).
  Index block_size(Block b) const;

  /// Basis with stddev scaling folded in, i.e. the matrix multiplying the
  /// stddev-scaled coefficients. For Full this is [id | exp].
  Eigen::MatrixXd scaled_basis(Block b) const;
  /// Unscaled basis columns of `b`; for Full, [id_basis | exp_basis].
  Eigen::MatrixXd basis(Block b) const;

  /// Same bases with unit stddevs, so coefficients act in raw basis units
  /// instead of z-scores.
  ShapeModel with_raw_coefficients() const;

  FaceShape mean_shape() const { return FaceShape{mean_}; }

private:
  std::string name_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd id_basis_;
  Eigen::MatrixXd exp_basis_;
  Eigen::VectorXd id_stddev_;
  Eigen::VectorXd exp_stddev_;
};

/// Bitwise equality of name, dimensions and every stored value.
bool identical(const ShapeModel& a, const ShapeModel& b);

/// mean + M_id*diag(s_id)*a_id + M_exp*diag(s_exp)*a_exp. Throws DimensionError.
FaceShape synthesize(const ShapeModel& model, const LatentVector& latents);

/// Keep only the leading `n_components` columns (and stddevs) of one block.
/// `which` must be Identity or Expression. Throws RangeError.
ShapeModel restrict(const ShapeModel& model, Block which, Index n_components);

}  // namespace idexp
