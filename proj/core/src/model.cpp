#include "idexp/model.hpp"

#include "idexp/errors.hpp"

#include <cstring>
#include <sstream>
#include <utility>

namespace idexp {
namespace {

std::string size_message(std::string_view what, Index expected, Index actual) {
  std::ostringstream os;
  os << what << ": expected " << expected << ", got " << actual;
  return os.str();
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& x, std::string_view what) {
  if (!x.allFinite()) throw InvalidValue(std::string(what) + " contains non-finite entries");
}

template <class Derived>
bool same_bits(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto bytes = static_cast<std::size_t>(a.size()) * sizeof(double);
  return bytes == 0 || std::memcmp(a.derived().data(), b.derived().data(), bytes) == 0;
}

}  // namespace

std::string_view to_string(Block b) {
  switch (b) {
    case Block::Identity:
      return "identity";
    case Block::Expression:
      return "expression";
    case Block::Full:
      return "full";
  }
  return "unknown";
}

Block parse_block(std::string_view text) {
  if (text == "id" || text == "identity") return Block::Identity;
  if (text == "exp" || text == "expression") return Block::Expression;
  if (text == "full") return Block::Full;
  throw RangeError("unknown block '" + std::string(text) + "' (expected id, exp or full)");
}

LatentVector LatentVector::zeros(Index m, Index k, Block which) {
  return {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(k), which};
}

LatentVector LatentVector::full(Eigen::VectorXd id, Eigen::VectorXd exp) {
  return {std::move(id), std::move(exp), Block::Full};
}

LatentVector LatentVector::identity(Eigen::VectorXd id, Index k) {
  return {std::move(id), Eigen::VectorXd::Zero(k), Block::Identity};
}

LatentVector LatentVector::expression(Index m, Eigen::VectorXd exp) {
  return {Eigen::VectorXd::Zero(m), std::move(exp), Block::Expression};
}

Eigen::VectorXd LatentVector::active() const {
  switch (which) {
    case Block::Identity:
      return id;
    case Block::Expression:
      return exp;
    case Block::Full:
      break;
  }
  Eigen::VectorXd out(id.size() + exp.size());
  out << id, exp;
  return out;
}

ShapeModel::ShapeModel(std::string name, Eigen::VectorXd mean, Eigen::MatrixXd id_basis,
                       Eigen::MatrixXd exp_basis, Eigen::VectorXd id_stddev,
                       Eigen::VectorXd exp_stddev)
    : name_(std::move(name)),
      mean_(std::move(mean)),
      id_basis_(std::move(id_basis)),
      exp_basis_(std::move(exp_basis)),
      id_stddev_(std::move(id_stddev)),
      exp_stddev_(std::move(exp_stddev)) {
  const Index n = mean_.size();
  if (n % 3 != 0) throw DimensionError("mean length " + std::to_string(n) + " is not divisible by 3");
  if (id_basis_.rows() != n) throw DimensionError(size_message("id_basis rows", n, id_basis_.rows()));
  if (exp_basis_.rows() != n) throw DimensionError(size_message("exp_basis rows", n, exp_basis_.rows()));
  if (m() + k() < 1) throw DimensionError("model needs at least one basis column");
  if (m() + k() > n) throw DimensionError(size_message("m + k must not exceed n; n", m() + k(), n));
  if (id_stddev_.size() != m()) throw DimensionError(size_message("id_stddev length", m(), id_stddev_.size()));
  if (exp_stddev_.size() != k()) throw DimensionError(size_message("exp_stddev length", k(), exp_stddev_.size()));

  require_finite(mean_, "mean");
  require_finite(id_basis_, "id_basis");
  require_finite(exp_basis_, "exp_basis");
  require_finite(id_stddev_, "id_stddev");
  require_finite(exp_stddev_, "exp_stddev");
  if (m() > 0 && (id_stddev_.array() <= 0.0).any()) throw InvalidValue("id_stddev entries must be positive");
  if (k() > 0 && (exp_stddev_.array() <= 0.0).any()) throw InvalidValue("exp_stddev entries must be positive");
  if (m() > 0 && (id_basis_.colwise().norm().array() == 0.0).any()) throw InvalidValue("id_basis has a zero column");
  if (k() > 0 && (exp_basis_.colwise().norm().array() == 0.0).any()) throw InvalidValue("exp_basis has a zero column");
}

Index ShapeModel::block_size(Block b) const {
  switch (b) {
    case Block::Identity:
      return m();
    case Block::Expression:
      return k();
    case Block::Full:
      break;
  }
  return m() + k();
}

Eigen::MatrixXd ShapeModel::basis(Block b) const {
  switch (b) {
    case Block::Identity:
      return id_basis_;
    case Block::Expression:
      return exp_basis_;
    case Block::Full:
      break;
  }
  Eigen::MatrixXd out(n(), m() + k());
  out << id_basis_, exp_basis_;
  return out;
}

Eigen::MatrixXd ShapeModel::scaled_basis(Block b) const {
  switch (b) {
    case Block::Identity:
      return id_basis_ * id_stddev_.asDiagonal();
    case Block::Expression:
      return exp_basis_ * exp_stddev_.asDiagonal();
    case Block::Full:
      break;
  }
  Eigen::MatrixXd out(n(), m() + k());
  out << id_basis_ * id_stddev_.asDiagonal(), exp_basis_ * exp_stddev_.asDiagonal();
  return out;
}

ShapeModel ShapeModel::with_raw_coefficients() const {
  return ShapeModel(name_, mean_, id_basis_, exp_basis_, Eigen::VectorXd::Ones(m()), Eigen::VectorXd::Ones(k()));
}

bool identical(const ShapeModel& a, const ShapeModel& b) {
  return a.name() == b.name() && same_bits(a.mean(), b.mean()) &&
         same_bits(a.id_basis(), b.id_basis()) && same_bits(a.exp_basis(), b.exp_basis()) &&
         same_bits(a.id_stddev(), b.id_stddev()) && same_bits(a.exp_stddev(), b.exp_stddev());
}

FaceShape synthesize(const ShapeModel& model, const LatentVector& latents) {
  if (latents.id.size() != model.m())
    throw DimensionError(size_message("identity latent length", model.m(), latents.id.size()));
  if (latents.exp.size() != model.k())
    throw DimensionError(size_message("expression latent length", model.k(), latents.exp.size()));

  FaceShape f{model.mean()};
  if (model.m() > 0)
    f.coords.noalias() += model.id_basis() * latents.id.cwiseProduct(model.id_stddev());
  if (model.k() > 0)
    f.coords.noalias() += model.exp_basis() * latents.exp.cwiseProduct(model.exp_stddev());
  return f;
}

ShapeModel restrict(const ShapeModel& model, Block which, Index n_components) {
  if (which == Block::Full) throw RangeError("restrict expects the identity or expression block");
  const Index size = model.block_size(which);
  if (n_components < 1 || n_components > size) {
    std::ostringstream os;
    os << "n_components " << n_components << " outside [1, " << size << "] for the "
       << to_string(which) << " block";
    throw RangeError(os.str());
  }
  if (which == Block::Identity) {
    return ShapeModel(model.name(), model.mean(), model.id_basis().leftCols(n_components),
                      model.exp_basis(), model.id_stddev().head(n_components), model.exp_stddev());
  }
  return ShapeModel(model.name(), model.mean(), model.id_basis(),
                    model.exp_basis().leftCols(n_components), model.id_stddev(),
                    model.exp_stddev().head(n_components));
}

}  // namespace idexp
