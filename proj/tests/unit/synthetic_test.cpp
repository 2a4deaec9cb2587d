#include "idexp/errors.hpp"
#include "idexp/rng.hpp"
#include "idexp/subspace.hpp"
#include "idexp/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

namespace idexp {
namespace {

constexpr double kPi = std::numbers::pi;

SyntheticSpec spec_with(Index n, Index m, Index k, std::optional<std::vector<double>> angles, std::uint64_t seed) {
  SyntheticSpec s;
  s.n = n;
  s.m = m;
  s.k = k;
  s.prescribed_angles = std::move(angles);
  s.seed = seed;
  return s;
}

std::vector<double> measured_angles(const ShapeModel& model) {
  return principal_angles(orthonormalize(model.id_basis()), orthonormalize(model.exp_basis())).angles;
}

TEST(Generate, OrthogonalPrescriptionGivesUnitDeterminant) {
  const auto check = determinant_identity_check(generate(spec_with(30, 3, 2, std::vector<double>{kPi / 2, kPi / 2}, 1)));
  EXPECT_NEAR(check.lhs, 1.0, 1e-12);
  EXPECT_NEAR(check.rhs, 1.0, 1e-12);
}

TEST(Generate, PrescribedAnglesAreMeasuredBack) {
  for (std::uint64_t seed : {0u, 1u, 77u, 123456u}) {
    const auto got = measured_angles(generate(spec_with(24, 2, 2, std::vector<double>{0.3, 0.7}, seed)));
    ASSERT_EQ(got.size(), 2u);
    EXPECT_NEAR(got[0], 0.3, 1e-10);
    EXPECT_NEAR(got[1], 0.7, 1e-10);
  }
}

TEST(Generate, SameSpecSameSeedIsBitIdentical) {
  const auto spec = spec_with(60, 5, 4, std::vector<double>{0.1, 0.5, 0.9, 1.3}, 42);
  EXPECT_TRUE(identical(generate(spec), generate(spec)));
  auto other = spec;
  other.seed = 43;
  EXPECT_FALSE(identical(generate(spec), generate(other)));

  const auto random_spec = spec_with(60, 5, 4, std::nullopt, 42);
  EXPECT_TRUE(identical(generate(random_spec), generate(random_spec)));
}

TEST(Generate, ConstructThenMeasureOnRandomSpecs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(0.01, kPi / 2);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(1, 8)(rng);
    const Index k = std::uniform_int_distribution<Index>(1, 8)(rng);
    const Index n = 3 * std::uniform_int_distribution<Index>((m + k + 2) / 3, 40)(rng);
    std::vector<double> angles(static_cast<std::size_t>(std::min(m, k)));
    for (double& a : angles) a = angle(rng);
    const auto model = generate(spec_with(n, m, k, angles, rng()));
    std::sort(angles.begin(), angles.end());
    const auto got = measured_angles(model);
    ASSERT_EQ(got.size(), angles.size());
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - angles[i]));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Generate, BasesAreOrthonormalAndSpectraAttached) {
  for (const auto& angles : {std::optional<std::vector<double>>{}, std::optional<std::vector<double>>{{0.5, 0.6, 0.7}}}) {
    const auto model = generate(spec_with(45, 3, 4, angles, 8));
    EXPECT_NO_THROW(OrthonormalBasis::from_orthonormal(model.id_basis()));
    EXPECT_NO_THROW(OrthonormalBasis::from_orthonormal(model.exp_basis()));
    EXPECT_NEAR(model.id_stddev()(0), 10.0, 1e-12);
    EXPECT_NEAR(model.id_stddev()(2), 0.1, 1e-12);
  }
}

TEST(Generate, GeometricSpectrum) {
  const auto s = geometric_spectrum(3);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0], 10.0);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
  EXPECT_NEAR(s[2], 0.1, 1e-12);
  EXPECT_EQ(geometric_spectrum(1), std::vector<double>{10.0});
}

TEST(Generate, ValidationErrors) {
  EXPECT_THROW(generate(spec_with(6, 4, 3, std::nullopt, 0)), DimensionError);
  EXPECT_THROW(generate(spec_with(12, 2, 2, std::vector<double>{0.3}, 0)), DimensionError);
  EXPECT_THROW(generate(spec_with(12, 2, 2, std::vector<double>{0.3, 0.0}, 0)), RangeError);
  EXPECT_THROW(generate(spec_with(12, 2, 2, std::vector<double>{0.3, 1.6}, 0)), RangeError);
  auto bad = spec_with(12, 2, 2, std::nullopt, 0);
  bad.id_spectrum = {1.0, 2.0};
  EXPECT_THROW(generate(bad), InvalidValue);
  bad.id_spectrum = {1.0};
  EXPECT_THROW(generate(bad), DimensionError);
}

TEST(SampleLatents, StandardNormalMoments) {
  const auto model = generate(spec_with(30, 4, 3, std::nullopt, 1));
  const auto samples = sample_latents(model, Block::Full, 10'000, 99);
  ASSERT_EQ(samples.size(), 10'000u);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(7), sq = Eigen::VectorXd::Zero(7);
  for (const auto& s : samples) {
    const Eigen::VectorXd a = s.active();
    sum += a;
    sq += a.cwiseProduct(a);
  }
  const Eigen::VectorXd mean = sum / 1e4;
  const Eigen::VectorXd var = (sq / 1e4 - mean.cwiseProduct(mean)) * (1e4 / (1e4 - 1));
  for (Index i = 0; i < 7; ++i) {
    EXPECT_LE(std::abs(mean(i)), 0.05) << i;
    EXPECT_GE(var(i), 0.9) << i;
    EXPECT_LE(var(i), 1.1) << i;
  }
}

TEST(SampleLatents, IdentityOnlyLeavesExpressionZero) {
  const auto model = generate(spec_with(30, 4, 3, std::nullopt, 1));
  for (const auto& s : sample_latents(model, Block::Identity, 100, 5)) {
    EXPECT_EQ(s.which, Block::Identity);
    EXPECT_TRUE((s.exp.array() == 0.0).all());
    EXPECT_GT(s.id.norm(), 0.0);
  }
}

TEST(SampleLatents, ReproducibleAndCountChecked) {
  const auto model = generate(spec_with(30, 4, 3, std::nullopt, 1));
  const auto a = sample_latents(model, Block::Full, 20, 5);
  const auto b = sample_latents(model, Block::Full, 20, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE((a[i].id.array() == b[i].id.array()).all());
    EXPECT_TRUE((a[i].exp.array() == b[i].exp.array()).all());
  }
  EXPECT_THROW(sample_latents(model, Block::Full, 0, 5), RangeError);
}

TEST(FirstPcLatents, OnlyLeadingComponentsAreActive) {
  const auto model = generate(spec_with(30, 5, 4, std::nullopt, 1));
  const auto lv = first_pc_latents(model, Block::Identity, 2, 3);
  EXPECT_NE(lv.id(0), 0.0);
  EXPECT_NE(lv.id(1), 0.0);
  EXPECT_TRUE((lv.id.tail(3).array() == 0.0).all());
  EXPECT_TRUE((lv.exp.array() == 0.0).all());
}

TEST(FirstPcLatents, FullBlockWidthMatchesSampleLatents) {
  const auto model = generate(spec_with(30, 5, 4, std::nullopt, 1));
  const auto lv = first_pc_latents(model, Block::Expression, 4, 3);
  const auto ref = sample_latents(model, Block::Expression, 1, 3).front();
  EXPECT_TRUE((lv.exp.array() == ref.exp.array()).all());
  EXPECT_TRUE((lv.id.array() == 0.0).all());
}

TEST(FirstPcLatents, ReproducibleAndRangeChecked) {
  const auto model = generate(spec_with(30, 5, 4, std::nullopt, 1));
  const auto a = first_pc_latents(model, Block::Identity, 2, 11);
  const auto b = first_pc_latents(model, Block::Identity, 2, 11);
  EXPECT_TRUE((a.id.array() == b.id.array()).all());
  EXPECT_THROW(first_pc_latents(model, Block::Expression, 5, 0), RangeError);
  EXPECT_THROW(first_pc_latents(model, Block::Identity, 0, 0), RangeError);
}

TEST(Rng, SubstreamsAreDistinctAndDeterministic) {
  auto a = substream(7, 0);
  auto b = substream(7, 1);
  auto c = substream(7, 1);
  const auto a0 = a(), b0 = b(), c0 = c();
  EXPECT_NE(a0, b0);
  EXPECT_EQ(b0, c0);
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  Xoshiro256ss g(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = g.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace idexp
