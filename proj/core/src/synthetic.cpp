#include "idexp/synthetic.hpp"

#include "idexp/errors.hpp"
#include "idexp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace idexp {
namespace {

class GaussianSource {
public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double operator()() { return normal_(rng_); }

  Eigen::MatrixXd matrix(Index rows, Index cols) {
    Eigen::MatrixXd g(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) g(i, j) = (*this)();
    return g;
  }

  Eigen::VectorXd vector(Index size) { return matrix(size, 1).col(0); }

private:
  Xoshiro256ss rng_;
  std::normal_distribution<double> normal_;
};

// Haar-distributed n x p orthonormal frame: Q of a Gaussian matrix with the
// signs of diag(R) folded in.
Eigen::MatrixXd haar_frame(GaussianSource& gauss, Index n, Index p) {
  const Eigen::MatrixXd g = gauss.matrix(n, p);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  for (Index j = 0; j < p; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

void check_spectrum(const std::vector<double>& s, Index expected, const char* what) {
  if (static_cast<Index>(s.size()) != expected) {
    std::ostringstream os;
    os << what << " has " << s.size() << " entries, expected " << expected;
    throw DimensionError(os.str());
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0) || !std::isfinite(s[i])) throw InvalidValue(std::string(what) + " entries must be positive and finite");
    if (i > 0 && s[i] > s[i - 1]) throw InvalidValue(std::string(what) + " must be non-increasing");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::vector<double> geometric_spectrum(Index count, double first, double last) {
  if (count < 1) return {};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(i)] = first * std::pow(last / first, t);
  }
  return out;
}

void validate(const SyntheticSpec& spec) {
  if (spec.m < 1 || spec.k < 1) throw RangeError("synthetic models need m >= 1 and k >= 1");
  if (spec.n % 3 != 0) throw DimensionError("n = " + std::to_string(spec.n) + " is not divisible by 3");
  if (spec.n < spec.m + spec.k) {
    std::ostringstream os;
    os << "n = " << spec.n << " is smaller than m + k = " << spec.m + spec.k;
    throw DimensionError(os.str());
  }
  if (spec.prescribed_angles) {
    const auto& angles = *spec.prescribed_angles;
    const auto expected = static_cast<std::size_t>(std::min(spec.m, spec.k));
    if (angles.size() != expected) {
      std::ostringstream os;
      os << "expected " << expected << " prescribed angles, got " << angles.size();
      throw DimensionError(os.str());
    }
    for (double a : angles) {
      if (!(a > 0.0 && a <= std::numbers::pi / 2)) {
        std::ostringstream os;
        os << "prescribed angle " << a << " outside (0, pi/2]";
        throw RangeError(os.str());
      }
    }
  }
  if (!spec.id_spectrum.empty()) check_spectrum(spec.id_spectrum, spec.m, "id_spectrum");
  if (!spec.exp_spectrum.empty()) check_spectrum(spec.exp_spectrum, spec.k, "exp_spectrum");
  if (!(spec.mean_scale >= 0.0) || !std::isfinite(spec.mean_scale)) throw InvalidValue("mean_scale must be finite and >= 0");
}

ShapeModel generate(const SyntheticSpec& spec) {
  validate(spec);
  const Index n = spec.n, m = spec.m, k = spec.k;
  GaussianSource gauss(spec.seed);

  Eigen::MatrixXd id_basis, exp_basis;
  if (spec.prescribed_angles) {
    const Eigen::MatrixXd frame = haar_frame(gauss, n, m + k);
    id_basis = frame.leftCols(m);
    exp_basis = frame.middleCols(m, k);
    const auto& angles = *spec.prescribed_angles;
    for (Index i = 0; i < std::min(m, k); ++i) {
      const double t = angles[static_cast<std::size_t>(i)];
      exp_basis.col(i) = std::cos(t) * frame.col(i) + std::sin(t) * frame.col(m + i);
    }
  } else {
    id_basis = haar_frame(gauss, n, m);
    exp_basis = haar_frame(gauss, n, k);
  }
  const Eigen::VectorXd mean = spec.mean_scale * gauss.vector(n);

  const auto id_spec = spec.id_spectrum.empty() ? geometric_spectrum(m) : spec.id_spectrum;
  const auto exp_spec = spec.exp_spectrum.empty() ? geometric_spectrum(k) : spec.exp_spectrum;
  return ShapeModel(spec.name, mean, std::move(id_basis), std::move(exp_basis), to_vector(id_spec),
                    to_vector(exp_spec));
}

std::vector<LatentVector> sample_latents(const ShapeModel& model, Block which, Index count, std::uint64_t seed) {
  if (count < 1) throw RangeError("sample_latents needs count >= 1");
  GaussianSource gauss(seed);
  const bool id_active = which != Block::Expression;
  const bool exp_active = which != Block::Identity;

  std::vector<LatentVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index s = 0; s < count; ++s) {
    LatentVector lv = LatentVector::zeros(model.m(), model.k(), which);
    if (id_active) lv.id = gauss.vector(model.m());
    if (exp_active) lv.exp = gauss.vector(model.k());
    out.push_back(std::move(lv));
  }
  return out;
}

LatentVector first_pc_latents(const ShapeModel& model, Block which, Index n_active, std::uint64_t seed) {
  const Index limit = which == Block::Full ? std::min(model.m(), model.k()) : model.block_size(which);
  if (n_active < 1 || n_active > limit) {
    std::ostringstream os;
    os << "n_active " << n_active << " outside [1, " << limit << "] for the " << to_string(which) << " block";
    throw RangeError(os.str());
  }
  GaussianSource gauss(seed);
  LatentVector lv = LatentVector::zeros(model.m(), model.k(), which);
  if (which != Block::Expression) lv.id.head(n_active) = gauss.vector(n_active);
  if (which != Block::Identity) lv.exp.head(n_active) = gauss.vector(n_active);
  return lv;
}

}  // namespace idexp
