#include "idexp/projection.hpp"

#include "idexp/errors.hpp"

#include <sstream>

namespace idexp {

Projector::Projector(const ShapeModel& model, Block which, double tol) : model_(model), which_(which) {
  const Eigen::MatrixXd basis = model.scaled_basis(which);
  const Index c = basis.cols();
  if (c == 0) throw DegenerateSubspace("selected " + std::string(to_string(which)) + " basis is empty");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), c);
  r_ = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();

  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r_).singularValues();
  if (!(sv(c - 1) > tol * sv(0))) {
    std::ostringstream os;
    os << "selected " << to_string(which) << " basis is rank deficient (sigma_min/sigma_max = "
       << sv(c - 1) / sv(0) << ")";
    throw DegenerateSubspace(os.str());
  }
}

ProjectionResult Projector::project(const FaceShape& f) const {
  const ShapeModel& model = model_;
  if (f.size() != model.n()) {
    std::ostringstream os;
    os << "shape length: expected " << model.n() << ", got " << f.size();
    throw DimensionError(os.str());
  }

  ProjectionResult res;
  res.gamma = q_.transpose() * (f.coords - model.mean());
  // Q^T M = R, so alpha = R^-1 gamma.
  const Eigen::VectorXd alpha = r_.triangularView<Eigen::Upper>().solve(res.gamma);

  switch (which_) {
    case Block::Identity:
      res.latents = LatentVector::identity(alpha, model.k());
      break;
    case Block::Expression:
      res.latents = LatentVector::expression(model.m(), alpha);
      break;
    case Block::Full:
      res.latents = LatentVector::full(alpha.head(model.m()), alpha.tail(model.k()));
      break;
  }
  res.reconstruction = synthesize(model, res.latents);
  res.residual_norm = (f.coords - res.reconstruction.coords).norm();
  res.mean_vertex_error = mean_vertex_error(f, res.reconstruction);
  res.param_magnitude = param_magnitude(res.latents);
  return res;
}

ProjectionResult project(const ShapeModel& model, const FaceShape& f, Block which, double tol) {
  return Projector(model, which, tol).project(f);
}

double mean_vertex_error(const FaceShape& a, const FaceShape& b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "shape lengths differ: " << a.size() << " vs " << b.size();
    throw DimensionError(os.str());
  }
  if (a.size() % 3 != 0) throw DimensionError("shape length " + std::to_string(a.size()) + " is not divisible by 3");
  if (a.size() == 0) return 0.0;
  const Index vertices = a.size() / 3;
  const auto diff = (a.coords - b.coords).reshaped(3, vertices);
  return diff.colwise().norm().mean();
}

double param_magnitude(const LatentVector& latents) {
  const Eigen::VectorXd active = latents.active();
  if (active.size() == 0) throw RangeError("latent vector has no active coefficients");
  return active.norm() / static_cast<double>(active.size());
}

}  // namespace idexp
