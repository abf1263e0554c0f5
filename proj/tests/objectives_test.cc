#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nmt/baselines.hpp"
#include "nmt/dataset.hpp"
#include "nmt/errors.hpp"
#include "nmt/objectives.hpp"
#include "nmt/optimizer.hpp"
#include "test_support.hpp"

namespace nmt {
namespace {

using testing::gradient_error;
using testing::make_data;
using testing::random_point;

std::shared_ptr<const Dataset> synthetic(std::uint64_t seed, std::size_t n = 60,
                                         std::size_t features = 3, std::size_t tasks = 2) {
  SyntheticConfig c;
  c.seed = seed;
  c.n_examples = n;
  c.n_features = features;
  c.n_tasks = tasks;
  c.correlation = 0.3;
  c.noise = 0.5;
  return std::make_shared<const Dataset>(generate_synthetic(c));
}

void expect_gradients(const TaskObjective& f, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 100; ++i) {
    const auto theta = random_point(rng, f.dim(), spread);
    ASSERT_LE(gradient_error(f, theta), 1e-4) << f.id() << " at sample " << i;
  }
}

TEST(QuadraticTest, ValueAndGradientAtOrigin) {
  const auto f = make_quadratic({{1.0, 0.0}, {1.0, 1.0}});
  std::vector<double> grad(2);
  EXPECT_DOUBLE_EQ(f->value_and_gradient(std::vector<double>{0.0, 0.0}, grad), 1.0);
  EXPECT_DOUBLE_EQ(grad[0], -2.0);
  EXPECT_DOUBLE_EQ(grad[1], 0.0);
}

TEST(QuadraticTest, ScaledValue) {
  const auto f = make_quadratic({{1.0, -2.0}, {0.5, 3.0}});
  // 0.5 * (3 - 1)^2 + 3 * (1 + 2)^2 = 2 + 27
  EXPECT_DOUBLE_EQ(f->value(std::vector<double>{3.0, 1.0}), 29.0);
}

TEST(QuadraticTest, RejectsBadSpecs) {
  EXPECT_THROW(make_quadratic({{1.0}, {0.0}}), ConfigError);
  EXPECT_THROW(make_quadratic({{1.0}, {-1.0}}), ConfigError);
  EXPECT_THROW(make_quadratic({{1.0, 2.0}, {1.0}}), ConfigError);
  EXPECT_THROW(make_quadratic({{}, {}}), ConfigError);
}

TEST(QuadraticTest, WrongDimensionIsContractViolation) {
  const auto f = make_quadratic({{1.0, 0.0}, {1.0, 1.0}});
  EXPECT_THROW(f->value(std::vector<double>{1.0}), ContractViolation);
}

TEST(GradientCheckTest, Quadratic) {
  expect_gradients(*make_quadratic({{1.0, -0.5, 2.0}, {0.3, 1.0, 4.0}}), 1, 3.0);
}

TEST(GradientCheckTest, Logistic) {
  expect_gradients(*make_logistic(synthetic(2), "y1", 0.05), 2, 2.0);
}

TEST(GradientCheckTest, LogisticInsideLargerVector) {
  const auto data = synthetic(3);
  expect_gradients(*make_logistic(data, "y2", 0.0, "logistic", {2, 7}), 3, 2.0);
}

TEST(GradientCheckTest, PairwiseRanking) {
  const auto data = synthetic(4);
  expect_gradients(*make_pairwise_ranking(data, {"y1", 0, 0, {}}), 4, 2.0);
}

TEST(GradientCheckTest, PairwiseRankingSampledPairs) {
  const auto data = synthetic(5);
  expect_gradients(*make_pairwise_ranking(data, {"y2", 50, 9, {}}, "ranking", {1, 5}), 5, 2.0);
}

TEST(GradientCheckTest, SharedTrunkWithBiases) {
  const auto heads = make_shared_trunk_model(synthetic(6), 4, {"y1", "y2"});
  for (const auto& h : heads) expect_gradients(*h, 6, 1.5);
}

TEST(GradientCheckTest, SharedTrunkWithoutBiases) {
  const auto heads = make_shared_trunk_model(synthetic(7, 50, 1), 1, {"y1", "y2"}, {false, false});
  ASSERT_EQ(heads.front()->dim(), 3u);
  for (const auto& h : heads) expect_gradients(*h, 7, 3.0);
}

TEST(GradientCheckTest, WeightedSum) {
  const auto data = synthetic(8);
  const LinearLayout layout{0, 4};
  const auto f = weighted_sum_objective(
      {make_logistic(data, "y1", 0.1, "a", layout), make_pairwise_ranking(data, {"y2"}, "b", layout)},
      {0.7, 0.3});
  expect_gradients(*f, 8, 2.0);
}

TEST(GradientCheckTest, MinibatchGradient) {
  const auto data = synthetic(9);
  const auto f = make_logistic(data, "y1", 0.1);
  std::mt19937_64 rng(9);
  const std::vector<std::size_t> batch{3, 17, 17, 42};
  for (int i = 0; i < 20; ++i) {
    auto theta = random_point(rng, f->dim(), 2.0);
    std::vector<double> grad(f->dim());
    f->value_and_gradient(theta, grad, batch);
    for (std::size_t d = 0; d < theta.size(); ++d) {
      const double keep = theta[d];
      theta[d] = keep + 1e-6;
      const double up = f->value(theta, batch);
      theta[d] = keep - 1e-6;
      const double down = f->value(theta, batch);
      theta[d] = keep;
      EXPECT_NEAR(grad[d], (up - down) / 2e-6, 1e-5);
    }
  }
}

TEST(LogisticTest, MinibatchValueIsMeanOfSingleExamples) {
  const auto data = synthetic(10);
  const auto f = make_logistic(data, "y1", 0.0);
  const std::vector<double> theta{0.3, -0.2, 0.5, 0.1};
  const std::vector<std::size_t> batch{0, 5, 9};
  double mean = 0.0;
  for (std::size_t i : batch) {
    const std::vector<std::size_t> one{i};
    mean += f->value(theta, one) / 3.0;
  }
  EXPECT_NEAR(f->value(theta, batch), mean, 1e-14);
}

TEST(LogisticTest, ZeroParametersGiveLogTwo) {
  const auto f = make_logistic(synthetic(11), "y1", 0.3);
  EXPECT_NEAR(f->value(std::vector<double>(4, 0.0)), std::log(2.0), 1e-15);
}

TEST(LogisticTest, OptimumMatchesBisection) {
  // x = +1 labelled 1, x = -1 labelled 0, l2 = 0.1: the stationary point
  // has b = 0 and w = 5 * sigmoid(-w).
  const auto data = make_data(1, {1.0, -1.0}, {{1.0, 0.0}});
  const auto f = make_logistic(data, "y1", 0.1);
  const double w_star =
      testing::bisect([](double w) { return w - 5.0 / (1.0 + std::exp(w)); }, 0.0, 5.0);
  OptimizerConfig config;
  config.eta = 0.5;
  config.max_iters = 20000;
  config.conv_tol = 1e-14;
  const auto result = optimize_primary(f, ParameterVector::zeros(2), config);
  EXPECT_NEAR(result.theta_star[0], w_star, 1e-6);
  EXPECT_NEAR(result.theta_star[1], 0.0, 1e-6);
}

TEST(LogisticTest, ExtremeLogitsStayFinite) {
  const auto data = make_data(1, {1.0, -1.0}, {{1.0, 0.0}});
  const auto f = make_logistic(data, "y1", 0.0);
  std::vector<double> grad(2);
  // Correct side: loss ~ exp(-1000), wrong side: loss ~ 1000.
  EXPECT_NEAR(f->value_and_gradient(std::vector<double>{1000.0, 0.0}, grad), 0.0, 1e-300);
  EXPECT_NEAR(f->value_and_gradient(std::vector<double>{-1000.0, 0.0}, grad), 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(grad[0]) && std::isfinite(grad[1]));
}

TEST(LogisticTest, RejectsNonBinaryLabels) {
  const auto data = make_data(1, {1.0, 2.0}, {{1.0, 0.5}});
  EXPECT_THROW(make_logistic(data, "y1", 0.0), ConfigError);
  EXPECT_THROW(make_logistic(data, "missing", 0.0), ConfigError);
  EXPECT_THROW(make_logistic(make_data(1, {1.0}, {{1.0}}), "y1", -1.0), ConfigError);
}

TEST(LogisticTest, MetricIsAucOfLogits) {
  const auto data = make_data(1, {0.8, 0.6, 0.4, 0.2}, {{1.0, 0.0, 1.0, 0.0}});
  const auto f = make_logistic(data, "y1", 0.0);
  EXPECT_DOUBLE_EQ(*f->metric(std::vector<double>{1.0, 0.0}), 0.75);
}

TEST(NegLogSigmoidTest, KnownValues) {
  // log1p(exp(-20)) and 20 + log1p(exp(-20)), from 30-digit arithmetic.
  EXPECT_NEAR(neg_log_sigmoid(20.0), 2.0611536203143807e-9, 1e-24);
  EXPECT_NEAR(neg_log_sigmoid(-20.0), 20.000000002061153, 1e-14);
  EXPECT_DOUBLE_EQ(neg_log_sigmoid(0.0), 0.6931471805599453);
  EXPECT_DOUBLE_EQ(neg_log_sigmoid(-1000.0), 1000.0);
  EXPECT_EQ(neg_log_sigmoid(1000.0), 0.0);
}

TEST(RankingTest, SinglePairLoss) {
  // Scores z = 2 * x: positive at x = 1, negative at x = 3 -> diff = -4.
  const auto data = make_data(1, {1.0, 3.0}, {{1.0, 0.0}});
  const auto f = make_pairwise_ranking(data, {"y1"});
  EXPECT_NEAR(f->value(std::vector<double>{2.0}), std::log1p(std::exp(4.0)), 1e-14);
  EXPECT_NEAR(f->value(std::vector<double>{0.0}), std::log(2.0), 1e-15);
}

TEST(RankingTest, AllPairsCount) {
  const auto data = make_data(1, {0, 1, 2, 3, 4}, {{1, 0, 1, 0, 0}});
  EXPECT_EQ(make_pairs(*data, {"y1"}).size(), 6u);
  EXPECT_EQ(make_pairs(*data, {"y1", 4, 1, {}}).size(), 4u);
  EXPECT_EQ(make_pairs(*data, {"y1", 100, 1, {}}).size(), 6u);
}

TEST(RankingTest, SampledPairsAreSeededAndValid) {
  const auto data = synthetic(12, 80);
  const auto a = make_pairs(*data, {"y1", 30, 5, {}});
  const auto b = make_pairs(*data, {"y1", 30, 5, {}});
  ASSERT_EQ(a.size(), 30u);
  const auto& y = data->labels("y1");
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].positive, b[i].positive);
    EXPECT_EQ(a[i].negative, b[i].negative);
    EXPECT_EQ(y[a[i].positive], 1.0);
    EXPECT_EQ(y[a[i].negative], 0.0);
  }
}

TEST(RankingTest, NoPairsIsConfigError) {
  const auto data = make_data(1, {1.0, 2.0}, {{1.0, 1.0}});
  EXPECT_THROW(make_pairwise_ranking(data, {"y1"}), ConfigError);
  EXPECT_THROW(make_pairs(*data, {"y1", 0, 0, {{0, 5}}}), ConfigError);
}

TEST(SharedTrunkTest, DimensionFormula) {
  EXPECT_EQ(shared_trunk_dim(3, 4, 2), 4u * 3 + 4 + 2 * (4 + 1));
  EXPECT_EQ(shared_trunk_dim(1, 1, 2, {false, false}), 3u);
}

TEST(SharedTrunkTest, OtherHeadParametersHaveZeroGradient) {
  const auto data = synthetic(13, 40, 2);
  const auto heads = make_shared_trunk_model(data, 3, {"y1", "y2"});
  std::mt19937_64 rng(13);
  const auto theta = random_point(rng, heads[0]->dim(), 1.0);
  const auto g = heads[0]->gradient(theta);
  const std::size_t trunk = 3 * 2 + 3;
  const std::size_t head = 3 + 1;
  for (std::size_t i = trunk + head; i < trunk + 2 * head; ++i) EXPECT_EQ(g[i], 0.0);
  EXPECT_EQ(heads[1]->id(), "head:y2");
}

TEST(SharedTrunkTest, ValueMatchesDirectFormula) {
  const auto data = make_data(1, {0.5, -1.0, 2.0}, {{1.0, 0.0, 1.0}, {0.0, 0.0, 1.0}});
  const auto heads = make_shared_trunk_model(data, 1, {"y1", "y2"}, {false, false});
  const std::vector<double> theta{0.7, 1.3, -0.4};
  const double xs[] = {0.5, -1.0, 2.0};
  const double ys[] = {0.0, 0.0, 1.0};
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double z = -0.4 * std::tanh(0.7 * xs[i]);
    const double p = 1.0 / (1.0 + std::exp(-z));
    expected -= (ys[i] * std::log(p) + (1.0 - ys[i]) * std::log(1.0 - p)) / 3.0;
  }
  EXPECT_NEAR(heads[1]->value(theta), expected, 1e-14);
}

TEST(WeightedSumTest, CombinesMembers) {
  const auto a = make_quadratic({{1.0, 0.0}, {1.0, 1.0}});
  const auto b = make_quadratic({{0.0, 1.0}, {1.0, 1.0}});
  const auto f = weighted_sum_objective({a, b}, {0.25, 0.75});
  const std::vector<double> theta{0.3, 0.4};
  EXPECT_NEAR(f->value(theta), 0.25 * a->value(theta) + 0.75 * b->value(theta), 1e-15);
  EXPECT_THROW(weighted_sum_objective({a, b}, {1.0}), ConfigError);
  EXPECT_THROW(weighted_sum_objective({a, b}, {1.0, 0.0}), ConfigError);
}

TEST(DatasetTest, SyntheticIsSeeded) {
  SyntheticConfig c;
  c.seed = 21;
  EXPECT_EQ(generate_synthetic(c), generate_synthetic(c));
  SyntheticConfig d = c;
  d.seed = 22;
  EXPECT_FALSE(generate_synthetic(c) == generate_synthetic(d));
}

TEST(DatasetTest, CorrelationControlsAgreement) {
  SyntheticConfig c;
  c.seed = 4;
  c.n_examples = 4000;
  c.correlation = 1.0;
  EXPECT_EQ(label_agreement(generate_synthetic(c), "y1", "y2"), 1.0);
  c.correlation = 0.0;
  EXPECT_NEAR(label_agreement(generate_synthetic(c), "y1", "y2"), 0.5, 0.05);
}

TEST(DatasetTest, CsvRoundTrip) {
  SyntheticConfig c;
  c.seed = 5;
  c.n_examples = 30;
  c.n_features = 3;
  c.n_tasks = 2;
  const Dataset data = generate_synthetic(c);
  const auto path = std::filesystem::temp_directory_path() / "nmt_dataset_roundtrip.csv";
  write_csv(data, path);
  const Dataset back = read_csv(path, 2);
  std::filesystem::remove(path);
  EXPECT_EQ(back.feature_names(), data.feature_names());
  EXPECT_EQ(back.feature_matrix(), data.feature_matrix());
  EXPECT_EQ(back.label_columns(), data.label_columns());
}

TEST(DatasetTest, RejectsBadConfigs) {
  SyntheticConfig c;
  c.n_examples = 1;
  EXPECT_THROW(generate_synthetic(c), ConfigError);
  c = {};
  c.correlation = 1.5;
  EXPECT_THROW(generate_synthetic(c), ConfigError);
  c = {};
  c.noise = -1.0;
  EXPECT_THROW(generate_synthetic(c), ConfigError);
}

}  // namespace
}  // namespace nmt
