#include "idexp/errors.hpp"
#include "idexp/projection.hpp"
#include "idexp/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>

namespace idexp {
namespace {

constexpr std::array<Block, 3> kBlocks{Block::Identity, Block::Expression, Block::Full};

Eigen::VectorXd random_vector(Index n, std::mt19937_64& rng) { return testing::gaussian(n, 1, rng).col(0); }

TEST(Project, InSupportShapeRecoversItsLatents) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = testing::gaussian_model(60, 5, 4, 200 + trial);
    const auto alpha = LatentVector::full(random_vector(5, rng), random_vector(4, rng));
    const auto res = project(model, synthesize(model, alpha), Block::Full);
    EXPECT_LE((res.latents.id - alpha.id).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((res.latents.exp - alpha.exp).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(res.residual_norm, 1e-9);
    EXPECT_EQ(res.latents.which, Block::Full);
  }
}

TEST(Project, MeanShapeGivesZeroLatents) {
  const auto model = testing::gaussian_model(30, 3, 2, 2);
  for (Block b : kBlocks) {
    const auto res = project(model, model.mean_shape(), b);
    EXPECT_EQ(res.latents.active().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(res.residual_norm, 0.0);
    EXPECT_EQ(res.mean_vertex_error, 0.0);
  }
}

TEST(Project, RestrictedProjectionKeepsTheOtherBlockZero) {
  std::mt19937_64 rng(3);
  const auto model = testing::gaussian_model(30, 3, 2, 3);
  const FaceShape f{model.mean() + random_vector(30, rng)};
  const auto id = project(model, f, Block::Identity);
  EXPECT_TRUE((id.latents.exp.array() == 0.0).all());
  EXPECT_EQ(id.latents.which, Block::Identity);
  const auto ex = project(model, f, Block::Expression);
  EXPECT_TRUE((ex.latents.id.array() == 0.0).all());
}

TEST(Project, ReconstructionIsTheSynthesizedLatents) {
  std::mt19937_64 rng(4);
  const auto model = testing::gaussian_model(30, 3, 2, 4);
  const FaceShape f{model.mean() + random_vector(30, rng)};
  for (Block b : kBlocks) {
    const auto res = project(model, f, b);
    EXPECT_TRUE((res.reconstruction.coords.array() == synthesize(model, res.latents).coords.array()).all());
  }
}

TEST(Project, ResidualIsOrthogonalToTheSelectedSpan) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = testing::gaussian_model(90, 6, 5, 300 + trial);
    const FaceShape f{model.mean() + 5.0 * random_vector(90, rng)};
    const double scale = (f.coords - model.mean()).norm();
    for (Block b : kBlocks) {
      const Projector p(model, b);
      const auto res = p.project(f);
      const Eigen::VectorXd r = f.coords - res.reconstruction.coords;
      EXPECT_LE((p.q().transpose() * r).cwiseAbs().maxCoeff(), 1e-9 * scale);
    }
  }
}

TEST(Project, IsIdempotent) {
  std::mt19937_64 rng(6);
  const auto model = testing::gaussian_model(60, 4, 4, 6);
  const FaceShape f{model.mean() + random_vector(60, rng)};
  for (Block b : kBlocks) {
    const auto once = project(model, f, b);
    const auto twice = project(model, once.reconstruction, b);
    EXPECT_LE((once.latents.active() - twice.latents.active()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Project, FullResidualIsNoLargerThanEitherBlock) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = testing::gaussian_model(45, 4, 3, 400 + trial);
    const FaceShape f{model.mean() + random_vector(45, rng)};
    const double full = project(model, f, Block::Full).residual_norm;
    EXPECT_LE(full, project(model, f, Block::Identity).residual_norm + 1e-12);
    EXPECT_LE(full, project(model, f, Block::Expression).residual_norm + 1e-12);
  }
}

TEST(Project, ShiftingAlongTheBasisShiftsGamma) {
  std::mt19937_64 rng(8);
  const auto model = testing::gaussian_model(45, 4, 3, 8);
  const Projector p(model, Block::Full);
  const FaceShape f{model.mean() + random_vector(45, rng)};
  const Eigen::VectorXd z = random_vector(7, rng);
  const auto base = p.project(f);
  const auto shifted = p.project(FaceShape{f.coords + p.q() * z});
  EXPECT_LE((shifted.gamma - base.gamma - z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Project, NoiseOnNearParallelModelMatchesGridSearchMinimizer) {
  // 1 + 1 dimensional model with a 0.05 rad angle; noise of norm eps.
  SyntheticSpec spec;
  spec.n = 6;
  spec.m = 1;
  spec.k = 1;
  spec.prescribed_angles = std::vector<double>{0.05};
  spec.id_spectrum = {1.0};
  spec.exp_spectrum = {1.0};
  spec.seed = 9;
  const auto model = generate(spec);

  std::mt19937_64 rng(9);
  const double eps = 1.0;
  bool amplified = false;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd delta = random_vector(6, rng);
    if (trial == 0) {
      // In-span direction orthogonal to the identity column: worst case.
      const Eigen::VectorXd u = model.id_basis().col(0);
      const Eigen::VectorXd w = model.exp_basis().col(0);
      delta = w - u.dot(w) * u;
    }
    delta *= eps / delta.norm();
    const FaceShape f{model.mean() + delta};
    const auto res = project(model, f, Block::Full);

    const Eigen::Vector2d oracle =
        testing::grid_least_squares(delta, model.scaled_basis(Block::Identity).col(0),
                                    model.scaled_basis(Block::Expression).col(0), 4.0 * eps / std::sin(0.05));
    EXPECT_NEAR(res.latents.id(0), oracle(0), 1e-6);
    EXPECT_NEAR(res.latents.exp(0), oracle(1), 1e-6);
    if (res.latents.active().norm() > 0.5 * eps / std::sin(0.05)) amplified = true;
  }
  EXPECT_TRUE(amplified);
}

TEST(Project, ErrorPaths) {
  const auto model = testing::gaussian_model(30, 3, 2, 10);
  EXPECT_THROW(project(model, FaceShape{Eigen::VectorXd::Zero(27)}, Block::Full), DimensionError);

  std::mt19937_64 rng(10);
  const Eigen::MatrixXd g = testing::gaussian(12, 2, rng);
  Eigen::MatrixXd id(12, 2);
  id << g.col(0), 2.0 * g.col(0);
  const ShapeModel dup("dup", Eigen::VectorXd::Zero(12), id, g.col(1), Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1));
  EXPECT_THROW(Projector(dup, Block::Identity), DegenerateSubspace);
  EXPECT_NO_THROW(Projector(dup, Block::Expression));
}

TEST(MeanVertexError, IdenticalShapesGiveZero) {
  const FaceShape a{Eigen::VectorXd::LinSpaced(12, -3.0, 4.0)};
  EXPECT_EQ(mean_vertex_error(a, a), 0.0);
}

TEST(MeanVertexError, UniformOffsetIsOneMillimetre) {
  const FaceShape a{Eigen::VectorXd::LinSpaced(12, -3.0, 4.0)};
  FaceShape b = a;
  for (Index v = 0; v < 4; ++v) b.coords(3 * v) += 1.0;
  EXPECT_NEAR(mean_vertex_error(a, b), 1.0, 1e-15);
}

TEST(MeanVertexError, MatchesLoopOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const FaceShape a{random_vector(300, rng)};
    const FaceShape b{random_vector(300, rng)};
    EXPECT_NEAR(mean_vertex_error(a, b), testing::loop_mean_vertex_error(a.coords, b.coords), 1e-12);
  }
}

TEST(MeanVertexError, LengthErrors) {
  EXPECT_THROW(mean_vertex_error(FaceShape{Eigen::VectorXd::Zero(6)}, FaceShape{Eigen::VectorXd::Zero(9)}),
               DimensionError);
  EXPECT_THROW(mean_vertex_error(FaceShape{Eigen::VectorXd::Zero(4)}, FaceShape{Eigen::VectorXd::Zero(4)}),
               DimensionError);
}

TEST(ParamMagnitude, ClosedForms) {
  EXPECT_EQ(param_magnitude(LatentVector::identity(Eigen::VectorXd::Zero(10), 2)), 0.0);
  EXPECT_EQ(param_magnitude(LatentVector::identity(Eigen::VectorXd::Constant(1, 3.0), 4)), 3.0);
  EXPECT_EQ(param_magnitude(LatentVector::expression(3, Eigen::VectorXd::Ones(4))), 0.5);
  // Full: both blocks are active.
  EXPECT_EQ(param_magnitude(LatentVector::full(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2))), 0.5);
}

TEST(ParamMagnitude, EmptyLatentIsARangeError) {
  EXPECT_THROW(param_magnitude(LatentVector::identity(Eigen::VectorXd(0), 3)), RangeError);
}

}  // namespace
}  // namespace idexp
