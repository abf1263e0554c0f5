#include <gtest/gtest.h>

#include <cmath>

#include "nmt/baselines.hpp"
#include "nmt/errors.hpp"
#include "nmt/objectives.hpp"

namespace nmt {
namespace {

ObjectivePtr quad(double cx, double cy) { return make_quadratic({{cx, cy}, {1.0, 1.0}}); }

OptimizerConfig converging_config() {
  OptimizerConfig c;
  c.eta = 0.2;
  c.max_iters = 5000;
  c.conv_tol = 1e-12;
  return c;
}

TEST(WeightGridTest, DefaultTwoTaskGrid) {
  const auto combos = WeightGrid::default_two_task().combinations(2);
  ASSERT_EQ(combos.size(), 5u);
  EXPECT_DOUBLE_EQ(combos.front()[0], 0.5);
  EXPECT_DOUBLE_EQ(combos.front()[1], 0.5);
  EXPECT_DOUBLE_EQ(combos.back()[0], 0.9);
  EXPECT_NEAR(combos.back()[1], 0.1, 1e-15);
}

TEST(WeightGridTest, SimplexAndRawRunCounts) {
  const std::vector<double> p3{0.1, 0.2, 0.3};
  EXPECT_EQ((WeightGrid{{p3, p3}, WeightNormalization::kSimplex}).combinations(3).size(), 9u);
  EXPECT_EQ((WeightGrid{{p3, p3, p3}, WeightNormalization::kRaw}).combinations(3).size(), 27u);
  EXPECT_EQ((WeightGrid{{p3, p3}, WeightNormalization::kRaw}).combinations(2).size(), 9u);
}

TEST(WeightGridTest, LastListVariesFastest) {
  const WeightGrid g{{{0.1, 0.2}, {0.3, 0.4}}, WeightNormalization::kRaw};
  const auto combos = g.combinations(2);
  const std::vector<std::vector<double>> expected{{0.1, 0.3}, {0.1, 0.4}, {0.2, 0.3}, {0.2, 0.4}};
  EXPECT_EQ(combos, expected);
}

TEST(WeightGridTest, RejectsInvalidGrids) {
  EXPECT_THROW((WeightGrid{{{0.0, 0.5}}, WeightNormalization::kSimplex}).combinations(2),
               ConfigError);
  EXPECT_THROW((WeightGrid{{{1.5}}, WeightNormalization::kSimplex}).combinations(2), ConfigError);
  EXPECT_THROW((WeightGrid{{{1.0}}, WeightNormalization::kSimplex}).combinations(2), ConfigError);
  EXPECT_THROW((WeightGrid{{{0.6}, {0.6}}, WeightNormalization::kSimplex}).combinations(3),
               ConfigError);
  EXPECT_THROW((WeightGrid{{{0.5}}, WeightNormalization::kRaw}).combinations(2), ConfigError);
  EXPECT_THROW((WeightGrid{{{}}, WeightNormalization::kSimplex}).combinations(2), ConfigError);
}

TEST(GridSearchTest, MatchesClosedFormFrontier) {
  // alpha f_1 + (1 - alpha) f_2 is minimized at alpha c_1 + (1 - alpha) c_2,
  // where f_1 = 2 (1 - alpha)^2 and f_2 = 2 alpha^2.
  const PriorityProblem problem{{quad(1, 0), quad(0, 1)}, {}};
  const auto points = grid_search(problem, WeightGrid::default_two_task(), converging_config(),
                                  ParameterVector::zeros(2));
  ASSERT_EQ(points.size(), 5u);
  for (const auto& p : points) {
    const double a = p.weights[0];
    EXPECT_NEAR(p.final_losses[0], 2.0 * (1 - a) * (1 - a), 1e-9);
    EXPECT_NEAR(p.final_losses[1], 2.0 * a * a, 1e-9);
    EXPECT_TRUE(std::isnan(p.final_metrics[0]));
    EXPECT_FALSE(p.diverged);
    EXPECT_TRUE(p.converged);
  }
}

TEST(GridSearchTest, SharedMinimizerMakesEveryPointAgree) {
  const PriorityProblem problem{{quad(0.5, 0.5), make_quadratic({{0.5, 0.5}, {3.0, 0.2}})}, {}};
  const auto points = grid_search(problem, WeightGrid::default_two_task(), converging_config(),
                                  ParameterVector::zeros(2));
  for (const auto& p : points) {
    EXPECT_NEAR(p.final_losses[0], 0.0, 1e-3);
    EXPECT_NEAR(p.final_losses[1], 0.0, 1e-3);
  }
}

TEST(GridSearchTest, ThreadCountDoesNotChangeResults) {
  const PriorityProblem problem{{quad(1, 0), quad(0, 1), quad(-1, 2)}, {}};
  const std::vector<double> p{0.2, 0.3, 0.4};
  const WeightGrid grid{{p, p}, WeightNormalization::kSimplex};
  const auto one = grid_search(problem, grid, converging_config(), ParameterVector::zeros(2), 1);
  const auto four = grid_search(problem, grid, converging_config(), ParameterVector::zeros(2), 4);
  ASSERT_EQ(one.size(), 9u);
  ASSERT_EQ(four.size(), 9u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].weights, four[i].weights);
    EXPECT_EQ(one[i].final_losses, four[i].final_losses);
    EXPECT_EQ(one[i].theta_final, four[i].theta_final);
  }
  EXPECT_EQ(frontier_to_csv(one, 3), frontier_to_csv(four, 3));
}

TEST(GridSearchTest, DivergedRunsAreFlagged) {
  const PriorityProblem problem{{make_quadratic({{1.0, 0.0}, {10.0, 10.0}}), quad(0, 1)}, {}};
  OptimizerConfig c = converging_config();
  c.eta = 0.15;  // stable only while 2 * eta * curvature < 2
  const WeightGrid grid{{{0.1, 0.9}}, WeightNormalization::kSimplex};
  const auto points = grid_search(problem, grid, c, ParameterVector::zeros(2));
  ASSERT_EQ(points.size(), 2u);
  EXPECT_FALSE(points[0].diverged);
  EXPECT_TRUE(points[1].diverged);
  EXPECT_TRUE(std::isnan(points[1].final_losses[0]));
  const auto csv = frontier_to_csv(points, 2);
  EXPECT_NE(csv.find(",1\n"), std::string::npos);
}

TEST(FrontierCsvTest, HeaderAndMethods) {
  FrontierPoint p;
  p.weights = {0.5, 0.5};
  p.final_losses = {1.0, 2.0};
  p.final_metrics = {0.75, std::nan("")};
  FrontierPoint q;
  q.final_losses = {0.5, 3.0};
  q.final_metrics = {0.8, 0.6};
  const auto csv = frontier_to_csv({p, q}, 2, {"grid", "nmt"});
  EXPECT_EQ(csv,
            "method,w_1,w_2,loss_1,loss_2,metric_1,metric_2,diverged\n"
            "grid,0.5,0.5,1,2,0.75,nan,0\n"
            "nmt,,,0.5,3,0.8,0.6,0\n");
}

}  // namespace
}  // namespace nmt
