#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avqoe/mlp.hpp"
#include "oracles.hpp"
#include "test_data.hpp"

namespace avqoe {
namespace {

using testing::random_regression;

MlpModel hand_built(std::size_t inputs, std::size_t hidden, MlpParameters p) {
  Standardizer identity{std::vector<double>(inputs, 0.0), std::vector<double>(inputs, 1.0)};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inputs; ++i) names.push_back("x" + std::to_string(i));
  p.inputs = inputs;
  p.hidden = hidden;
  return MlpModel(MlpConfig{}, names, identity, p);
}

TEST(MlpConfig, RejectsZeroIterations) {
  auto data = random_regression(10, 2, 1);
  try {
    train_mlp(data.x, data.y, data.names, MlpConfig{.iterations = 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
  EXPECT_THROW(MlpConfig{.learning_rate = 0.0}.validate(), Error);
  EXPECT_THROW(MlpConfig{.hidden_units = 0}.validate(), Error);
}

TEST(PredictMlp, ZeroWeightsReturnOutputBias) {
  auto p = MlpParameters::zeros(3, 3);
  p.b2 = 3.2;
  auto model = hand_built(3, 3, p);
  const double x[] = {10.0, -4.0, 0.25};
  EXPECT_EQ(model.predict(x), 3.2);
}

TEST(PredictMlp, TanhOddnessWithZeroBiases) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  auto p = MlpParameters::zeros(4, 5);
  for (auto& w : p.w1) w = u(rng);
  for (auto& w : p.w2) w = u(rng);
  auto model = hand_built(4, 5, p);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(4), neg(4);
    for (std::size_t i = 0; i < 4; ++i) neg[i] = -(x[i] = u(rng) * 3);
    EXPECT_NEAR(model.predict(x), -model.predict(neg), 1e-15);
  }
}

TEST(PredictMlp, HandBuiltSingleUnitNetwork) {
  auto p = MlpParameters::zeros(1, 1);
  p.w1 = {1.0};
  p.b1 = {0.0};
  p.w2 = {2.0};
  p.b2 = 1.0;
  auto model = hand_built(1, 1, p);
  const double x[] = {0.5};
  EXPECT_NEAR(model.predict(x), 1.9242, 1e-4);
}

TEST(PredictMlp, DimensionMismatch) {
  auto model = hand_built(2, 2, MlpParameters::zeros(2, 2));
  const double x[] = {1.0};
  try {
    model.predict(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionalityMismatch);
  }
}

TEST(TrainMlp, ConstantTargetIsApproached) {
  auto data = random_regression(40, 3, 2);
  std::fill(data.y.begin(), data.y.end(), 3.0);
  auto model = train_mlp(data.x, data.y, data.names, MlpConfig{.seed = 5});
  const auto& h = model.loss_history();
  ASSERT_EQ(h.size(), 101u);
  EXPECT_LT(h[1], h[0]);
  EXPECT_LT(h.back(), 0.01 * h.front());
  for (std::size_t i = 0; i < data.x.rows(); ++i) EXPECT_NEAR(model.predict(data.x.row(i)), 3.0, 0.1);

  // Plain gradient descent flattens out near 2e-3 here as the hidden contribution decays slowly.
  auto longer = train_mlp(data.x, data.y, data.names, MlpConfig{.iterations = 1000, .seed = 5});
  const auto& lh = longer.loss_history();
  for (std::size_t i = 1; i < lh.size(); ++i) ASSERT_LE(lh[i], lh[i - 1]);
  for (std::size_t i = 0; i < data.x.rows(); ++i) EXPECT_NEAR(longer.predict(data.x.row(i)), 3.0, 5e-3);
}

TEST(TrainMlp, LossDecreasesOnSmoothTarget) {
  auto data = random_regression(80, 4, 3);
  auto model = train_mlp(data.x, data.y, data.names, MlpConfig{.iterations = 300, .seed = 1});
  const auto& h = model.loss_history();
  EXPECT_LT(h.back(), h.front());
  EXPECT_TRUE(model.parameters().finite());
  EXPECT_EQ(model.parameters().hidden, 4u);
}

TEST(TrainMlp, DeterministicForFixedSeed) {
  auto data = random_regression(30, 3, 4);
  auto a = train_mlp(data.x, data.y, data.names, MlpConfig{.seed = 17});
  auto b = train_mlp(data.x, data.y, data.names, MlpConfig{.seed = 17});
  EXPECT_EQ(a.parameters().flatten(), b.parameters().flatten());
  auto c = train_mlp(data.x, data.y, data.names, MlpConfig{.seed = 18});
  EXPECT_NE(a.parameters().flatten(), c.parameters().flatten());
}

TEST(TrainMlp, DivergenceIsReported) {
  auto data = random_regression(20, 2, 5);
  try {
    train_mlp(data.x, data.y, data.names, MlpConfig{.learning_rate = 1000.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteLoss);
  }
}

TEST(TrainMlp, ZeroVarianceFeatureIsStandardizedToZero) {
  Matrix x(3, 2, {1.0, 7.0, 2.0, 7.0, 3.0, 7.0});
  auto s = Standardizer::fit(x);
  EXPECT_EQ(s.stddev[1], 0.0);
  auto z = s.apply(x);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(z(r, 1), 0.0);
  EXPECT_NEAR(z(0, 0), -std::sqrt(1.5), 1e-12);
}

TEST(TrainMlp, EmptyDataset) {
  try {
    train_mlp(Dataset{}, MlpConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

class MlpGradientCheck : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(MlpGradientCheck, BackpropMatchesCentralDifferences) {
  const std::uint64_t seed = GetParam();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0), target(1.0, 5.0);
  const std::size_t n = 5, d = 4, h = 4;
  Matrix z(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) z(i, j) = g(rng);
    y[i] = target(rng);
  }
  auto params = MlpParameters::zeros(d, h);
  std::vector<double> flat(params.size());
  for (auto& v : flat) v = u(rng);
  params.assign(flat);

  const auto analytic = mlp_loss_gradient(params, z, y).gradient.flatten();
  const auto numeric = oracle::numeric_gradient(
      [&](const std::vector<double>& w) {
        auto p = params;
        p.assign(w);
        return mlp_loss_gradient(p, z, y).loss;
      },
      flat, 1e-5);
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t k = 0; k < analytic.size(); ++k)
    EXPECT_LT(oracle::relative_error(analytic[k], numeric[k]), 1e-4)
        << "parameter " << k << ": " << analytic[k] << " vs " << numeric[k];
}

INSTANTIATE_TEST_SUITE_P(Seeds, MlpGradientCheck, ::testing::Values(1u, 2u, 3u));

}  // namespace
}  // namespace avqoe
