#include "idexp/subspace.hpp"

#include "frame.hpp"
#include "idexp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace idexp {
namespace {

// Below this angle arccos(cos theta) has lost too many digits.
constexpr double kSmallAngle = 1e-4;

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
}

}  // namespace

OrthonormalBasis OrthonormalBasis::from_orthonormal(Eigen::MatrixXd q) {
  const Index p = q.cols();
  const double dev = p == 0 ? 0.0 : (q.transpose() * q - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-10)) {
    std::ostringstream os;
    os << "matrix is not orthonormal (max |q^T q - I| = " << dev << ")";
    throw InvalidValue(os.str());
  }
  return OrthonormalBasis(std::move(q), p);
}

OrthonormalBasis orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& basis, double tol) {
  const Index n = basis.rows();
  const Index p = basis.cols();
  if (p > n) throw DimensionError("cannot orthonormalize " + std::to_string(p) + " columns in R^" + std::to_string(n));
  if (!basis.allFinite()) throw InvalidValue("basis contains non-finite entries");
  if (p == 0) throw DegenerateSubspace("basis has no columns");

  // Householder QR first so the SVD only sees the small p x p factor.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0)) throw DegenerateSubspace("basis is identically zero");

  Index rank = 0;
  while (rank < p && sigma(rank) > tol * sigma(0)) ++rank;

  const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  return OrthonormalBasis(thin_q * svd.matrixU().leftCols(rank), p);
}

double PrincipalAngleSet::smallest() const {
  if (angles.empty()) throw RangeError("empty principal angle set");
  return angles.front();
}

PrincipalAngleSet principal_angles(const OrthonormalBasis& u, const OrthonormalBasis& v) {
  if (u.ambient_dim() != v.ambient_dim()) {
    std::ostringstream os;
    os << "principal angles need a shared ambient space, got R^" << u.ambient_dim() << " and R^"
       << v.ambient_dim();
    throw DimensionError(os.str());
  }
  PrincipalAngleSet out;
  const Index p = std::min(u.rank(), v.rank());
  if (p == 0) return out;

  const Eigen::VectorXd cosines = singular_values(u.q().transpose() * v.q());
  out.angles.resize(p);
  for (Index i = 0; i < p; ++i) out.angles[i] = std::acos(std::clamp(cosines(i), 0.0, 1.0));
  out.sines.resize(p);
  for (Index i = 0; i < p; ++i) out.sines[i] = std::sin(out.angles[i]);

  if (out.angles.front() < kSmallAngle) {
    const OrthonormalBasis& small = v.rank() <= u.rank() ? v : u;
    const OrthonormalBasis& large = v.rank() <= u.rank() ? u : v;
    const Eigen::MatrixXd residual = small.q() - large.q() * (large.q().transpose() * small.q());
    const Eigen::VectorXd sv = singular_values(residual);  // descending sines
    for (Index i = 0; i < p && out.angles[i] < kSmallAngle; ++i) {
      const double s = std::min(sv(p - 1 - i), 1.0);
      out.sines[i] = s;
      out.angles[i] = std::asin(s);
    }
  }

  std::vector<Index> order(p);
  for (Index i = 0; i < p; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return out.angles[a] < out.angles[b]; });
  PrincipalAngleSet sorted;
  for (Index i : order) {
    sorted.angles.push_back(out.angles[i]);
    sorted.sines.push_back(out.sines[i]);
  }
  for (double s : sorted.sines) {
    sorted.log_amplification += s > 0.0 ? -std::log(s) : std::numeric_limits<double>::infinity();
  }
  return sorted;
}

std::vector<AngleCurvePoint> smallest_angle_curve(const ShapeModel& model, Index max_components, double tol) {
  const Index limit = std::min(model.m(), model.k());
  if (max_components < 1 || max_components > limit) {
    std::ostringstream os;
    os << "max_components " << max_components << " outside [1, " << limit << "]";
    throw RangeError(os.str());
  }
  std::vector<AngleCurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(max_components));
  for (Index j = 1; j <= max_components; ++j) {
    const auto u = orthonormalize(model.id_basis().leftCols(j), tol);
    const auto v = orthonormalize(model.exp_basis().leftCols(j), tol);
    curve.push_back({j, principal_angles(u, v).smallest()});
  }
  return curve;
}

double ball_volume(Index dim, double radius) {
  if (dim < 0) throw RangeError("negative ball dimension");
  if (!(radius >= 0.0)) throw RangeError("ball radius must be non-negative");
  if (dim == 0) return 1.0;
  if (radius == 0.0) return 0.0;
  const double d = static_cast<double>(dim);
  return std::exp(0.5 * d * std::log(std::numbers::pi) + d * std::log(radius) - std::lgamma(0.5 * d + 1.0));
}

MeasureEstimate amplification(const PrincipalAngleSet& angles, double epsilon, Index m, Index k) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw RangeError("epsilon must be positive and finite");
  const auto expected = static_cast<std::size_t>(std::min(m, k));
  if (angles.size() != expected) {
    std::ostringstream os;
    os << "expected " << expected << " principal angles for m = " << m << ", k = " << k << ", got "
       << angles.size();
    throw DimensionError(os.str());
  }

  constexpr double kTinySine = 1e-14;
  constexpr double inf = std::numeric_limits<double>::infinity();

  MeasureEstimate est;
  est.epsilon = epsilon;
  est.dim = m + k;
  est.ball_measure_mu0 = ball_volume(est.dim, epsilon);
  est.log_amplification = angles.log_amplification;
  est.unbounded = std::any_of(angles.sines.begin(), angles.sines.end(), [](double s) { return s < kTinySine; });
  if (est.unbounded) {
    est.analytic_alpha_measure = inf;
    est.lower_bound = inf;
    est.log_amplification = inf;
  } else {
    est.analytic_alpha_measure = est.ball_measure_mu0 * std::exp(est.log_amplification);
    est.lower_bound = angles.size() == 0 ? est.ball_measure_mu0 : est.ball_measure_mu0 / angles.sines.front();
  }
  return est;
}

namespace detail {

CombinedFrame combined_frame(const ShapeModel& model, double tol) {
  if (model.m() == 0 || model.k() == 0) throw DimensionError("model needs both identity and expression columns");
  auto id = orthonormalize(model.id_basis(), tol);
  auto exp = orthonormalize(model.exp_basis(), tol);
  if (id.rank_deficient()) throw DegenerateSubspace("identity basis is rank deficient");
  if (exp.rank_deficient()) throw DegenerateSubspace("expression basis is rank deficient");

  // Component of the expression span orthogonal to the identity span, with
  // one reorthogonalization pass.
  Eigen::MatrixXd residual = exp.q() - id.q() * (id.q().transpose() * exp.q());
  residual -= id.q() * (id.q().transpose() * residual);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual, Eigen::ComputeThinU);
  // The singular values are the sines of the principal angles.
  if (!(svd.singularValues().minCoeff() > tol))
    throw DegenerateSubspace("identity and expression subspaces intersect; combined basis is rank deficient");

  const Index m = id.rank();
  const Index k = exp.rank();
  Eigen::MatrixXd q(model.n(), m + k);
  q << id.q(), svd.matrixU();
  Eigen::MatrixXd stacked(model.n(), m + k);
  stacked << id.q(), exp.q();
  Eigen::MatrixXd qtm = q.transpose() * stacked;
  return {std::move(id), std::move(exp), std::move(q), std::move(qtm)};
}

}  // namespace detail

DeterminantCheck determinant_identity_check(const ShapeModel& model, double tol) {
  const auto frame = detail::combined_frame(model, tol);
  DeterminantCheck check;
  check.lhs = std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(frame.qtm).determinant());
  check.rhs = 1.0;
  for (double s : principal_angles(frame.id, frame.exp).sines) check.rhs *= s;
  check.rel_error = std::abs(check.lhs - check.rhs) / check.rhs;
  return check;
}

}  // namespace idexp
