#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nmt/errors.hpp"
#include "nmt/metrics.hpp"
#include "test_support.hpp"

namespace nmt {
namespace {

using testing::pair_count_auc;

TEST(AucTest, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<double>{1, 0}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}), 0.5);
  EXPECT_EQ(auc(std::vector<double>{0.8, 0.6, 0.4, 0.2}, std::vector<double>{1, 0, 1, 0}), 0.75);
}

TEST(AucTest, Errors) {
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1}), UndefinedMetricError);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{0, 0}), UndefinedMetricError);
  EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<double>{1, 0}), ContractViolation);
  EXPECT_THROW(auc(std::vector<double>{NAN, 0.2}, std::vector<double>{1, 0}), ContractViolation);
}

struct Instance {
  std::vector<double> scores;
  std::vector<double> labels;
};

// Scores drawn from a small integer range so that ties are common.
Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(2, 1000);
  std::uniform_int_distribution<int> level(0, 40);
  std::bernoulli_distribution coin(0.4);
  Instance inst;
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) {
    inst.scores.push_back(0.25 * level(rng) - 3.0);
    inst.labels.push_back(coin(rng) ? 1.0 : 0.0);
  }
  inst.labels[0] = 1.0;
  inst.labels[1] = 0.0;
  return inst;
}

TEST(AucTest, MatchesPairCountOracleExactly) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_instance(rng);
    const auto counts = auc_counts(inst.scores, inst.labels);
    const auto oracle = testing::pair_count(inst.scores, inst.labels);
    ASSERT_EQ(counts.numerator, oracle.numerator) << "instance " << k;
    ASSERT_EQ(counts.denominator, oracle.denominator) << "instance " << k;
    ASSERT_EQ(auc(inst.scores, inst.labels), pair_count_auc(inst.scores, inst.labels))
        << "instance " << k;
  }
}

TEST(AucTest, ComplementIdentityIsExact) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    auto inst = random_instance(rng);
    if (k % 2) {
      for (double& s : inst.scores) s = normal(rng);
    }
    std::vector<double> negated;
    for (double s : inst.scores) negated.push_back(-s);
    ASSERT_EQ(auc(inst.scores, inst.labels) + auc(negated, inst.labels), 1.0) << "instance " << k;
  }
}

TEST(AucTest, InvariantUnderIncreasingTransform) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_instance(rng);
    std::vector<double> transformed;
    for (double s : inst.scores) transformed.push_back(std::exp(0.5 * s) * 3.0 + 1.0);
    // The transform must keep order and ties in floating point for the
    // comparison to be meaningful.
    for (std::size_t i = 0; i < inst.scores.size(); ++i) {
      for (std::size_t j = 0; j < inst.scores.size(); j += 37) {
        ASSERT_EQ(inst.scores[i] < inst.scores[j], transformed[i] < transformed[j]);
        ASSERT_EQ(inst.scores[i] == inst.scores[j], transformed[i] == transformed[j]);
      }
    }
    ASSERT_EQ(auc(inst.scores, inst.labels), auc(transformed, inst.labels)) << "instance " << k;
  }
}

RunTrace two_stage_trace() {
  RunTrace trace(2);
  trace.set_conv_tol(1e-3);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 0, true, {1.0, 2.0}, {}, {}});
  trace.record({1, 1, true, {0.5, 2.0}, {}, {}});
  trace.record({1, 2, true, {0.0, 2.0}, {}, {}});
  trace.begin_stage({2, 3, {0.0}, {0.0}});
  trace.record({2, 3, true, {0.0, 2.0}, {0.0}, {0.0}});
  trace.record({2, 4, true, {0.3, 1.5}, {0.3}, {0.3}});
  trace.record({2, 5, true, {0.1, 1.6}, {0.4}, {0.1}});
  trace.record({2, 6, true, {0.0005, 1.7}, {0.4}, {0.0005}});
  return trace;
}

TEST(RunTraceTest, RejectsInvariantViolations) {
  RunTrace trace(2);
  EXPECT_THROW(trace.record({1, 0, true, {1.0, 2.0}, {}, {}}), ContractViolation);
  EXPECT_THROW(trace.begin_stage({2, 0, {0.0}, {}}), ContractViolation);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 5, true, {1.0, 2.0}, {}, {}});
  EXPECT_THROW(trace.record({1, 5, true, {1.0, 2.0}, {}, {}}), ContractViolation);
  EXPECT_THROW(trace.record({1, 6, true, {1.0}, {}, {}}), ContractViolation);
  EXPECT_THROW(trace.record({1, 6, true, {1.0, 2.0}, {0.1}, {0.1}}), ContractViolation);
  trace.begin_stage({2, 7, {1.0}, {0.0}});
  EXPECT_THROW(trace.record({2, 7, true, {1.0, 2.0}, {-0.1}, {0.0}}), ContractViolation);
  trace.set_require_nonnegative_lambdas(false);
  EXPECT_NO_THROW(trace.record({2, 7, true, {1.0, 2.0}, {-0.1}, {0.0}}));
}

TEST(RunTraceTest, StageBoundariesAndRows) {
  const auto trace = two_stage_trace();
  EXPECT_EQ(trace.stage_boundaries(), (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(trace.stage_rows(1).size(), 3u);
  EXPECT_EQ(trace.stage_rows(2).size(), 4u);
  EXPECT_TRUE(trace.stage_rows(3).empty());
}

TEST(TraceCsvTest, ColumnsAndEmptyCells) {
  const auto csv = trace_to_csv(two_stage_trace());
  const auto first_newline = csv.find('\n');
  EXPECT_EQ(csv.substr(0, first_newline), "stage,iter,loss_1,loss_2,lambda_1,violation_1");
  EXPECT_NE(csv.find("\n1,0,1,2,,\n"), std::string::npos);
  EXPECT_NE(csv.find("\n2,4,0.3,1.5,0.3,0.3\n"), std::string::npos);
}

TEST(TraceSummaryTest, PatternHoldsOnRisingMultiplier) {
  const auto s = trace_summarize(two_stage_trace());
  ASSERT_EQ(s.stages.size(), 2u);
  ASSERT_TRUE(s.pattern_holds.has_value());
  EXPECT_TRUE(*s.pattern_holds);
  const auto& st = s.stages[1];
  EXPECT_TRUE(st.lambda_rose);
  EXPECT_TRUE(st.objective_strictly_decreased);
  ASSERT_EQ(st.constraints.size(), 1u);
  EXPECT_DOUBLE_EQ(st.constraints[0].lambda_max, 0.4);
  EXPECT_DOUBLE_EQ(st.constraints[0].final_residual, 0.0005);
  // Four full-batch rows: the tail is the last one.
  EXPECT_DOUBLE_EQ(st.constraints[0].mean_tail_residual, 0.0005);
  EXPECT_EQ(s.stages[0].final_losses, (std::vector<double>{0.0, 2.0}));
}

TEST(TraceSummaryTest, SingleStageHasNoMultiplierSection) {
  RunTrace trace(1);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 0, true, {1.0}, {}, {}});
  trace.record({1, 1, true, {0.5}, {}, {}});
  const auto s = trace_summarize(trace);
  EXPECT_FALSE(s.pattern_holds.has_value());
  EXPECT_TRUE(s.stages[0].constraints.empty());
  const auto j = to_json(s);
  EXPECT_TRUE(j["pattern_holds"].is_null());
  EXPECT_FALSE(j["stages"][0].contains("constraints"));
}

TEST(TraceSummaryTest, FixedPointHoldsWeakly) {
  RunTrace trace(2);
  trace.set_conv_tol(1e-6);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 0, true, {0.0, 2.0}, {}, {}});
  trace.begin_stage({2, 1, {0.0}, {0.0}});
  trace.record({2, 1, true, {0.0, 2.0}, {0.0}, {0.0}});
  trace.record({2, 2, true, {0.0, 2.0 + 1e-12}, {0.0}, {0.0}});
  const auto s = trace_summarize(trace);
  EXPECT_TRUE(s.stages[1].objective_improved);
  EXPECT_FALSE(s.stages[1].objective_strictly_decreased);
  EXPECT_TRUE(*s.pattern_holds);
}

TEST(TraceSummaryTest, LargeTailResidualBreaksPattern) {
  RunTrace trace(2);
  trace.set_conv_tol(1e-3);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 0, true, {0.0, 2.0}, {}, {}});
  trace.begin_stage({2, 1, {0.0}, {0.0}});
  trace.record({2, 1, true, {0.0, 2.0}, {0.0}, {0.0}});
  trace.record({2, 2, true, {0.5, 1.0}, {0.5}, {0.5}});
  const auto s = trace_summarize(trace);
  EXPECT_FALSE(s.stages[1].residual_ok);
  EXPECT_FALSE(*s.pattern_holds);
}

TEST(TraceSummaryTest, IsPureAndRejectsEmptyTrace) {
  const auto trace = two_stage_trace();
  EXPECT_EQ(to_json(trace_summarize(trace)).dump(), to_json(trace_summarize(trace)).dump());
  EXPECT_THROW(trace_summarize(RunTrace(2)), ContractViolation);
}

TEST(TraceSummaryTest, IgnoresMinibatchRowsForResiduals) {
  RunTrace trace(2);
  trace.set_conv_tol(1e-3);
  trace.begin_stage({1, 0, {}, {}});
  trace.record({1, 0, true, {0.0, 2.0}, {}, {}});
  trace.begin_stage({2, 1, {0.0}, {0.0}});
  trace.record({2, 1, true, {0.0, 2.0}, {0.0}, {0.0}});
  trace.record({2, 2, false, {0.9, 1.0}, {0.5}, {0.9}});
  trace.record({2, 3, true, {0.0, 1.5}, {0.5}, {0.0}});
  const auto s = trace_summarize(trace);
  EXPECT_DOUBLE_EQ(s.stages[1].constraints[0].mean_tail_residual, 0.0);
  EXPECT_DOUBLE_EQ(s.stages[1].objective_end, 1.5);
}

}  // namespace
}  // namespace nmt
