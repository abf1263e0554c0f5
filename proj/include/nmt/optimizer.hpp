#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nmt/metrics.hpp"
#include "nmt/objectives.hpp"
#include "nmt/parameter_vector.hpp"

namespace nmt {

/// `size == 0` means full-batch gradient descent.
struct BatchMode {
  std::size_t size = 0;
  std::uint64_t seed = 0;
  bool full() const noexcept { return size == 0; }
  friend bool operator==(const BatchMode&, const BatchMode&) = default;
};

struct OptimizerConfig {
  double eta = 0.1;            // step size for theta
  double tau = 0.1;            // step size for the multipliers
  double lambda_init = 0.0;
  std::size_t max_iters = 10000;   // per stage
  double conv_tol = 1e-6;
  std::size_t conv_window = 50;
  BatchMode batch;
  /// Project multipliers onto lambda >= 0 after each ascent step. Turning
  /// this off gives the plain ascent update for comparison runs.
  bool clamp_lambda = true;
  /// In minibatch mode, full-batch losses are evaluated every this many
  /// iterations (trace rows and the convergence test use them).
  std::size_t full_eval_every = 10;

  /// Throws ValidationError naming every offending field.
  void validate() const;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Tasks in priority order (index 0 is the highest priority) with per-task
/// tolerances r_i. An empty tolerance list means all zeros.
struct PriorityProblem {
  std::vector<ObjectivePtr> tasks;
  std::vector<double> tolerances;

  std::size_t size() const noexcept { return tasks.size(); }
  std::size_t dim() const;
  double tolerance(std::size_t task) const {
    return task < tolerances.size() ? tolerances[task] : 0.0;
  }
  /// Throws ConfigError when empty, dimensions disagree, or a tolerance is
  /// negative.
  void validate() const;
};

struct MultiplierState {
  std::vector<double> lambdas;
  std::vector<double> references;   // f_j(theta*) frozen at the stage start
};

struct StageResult {
  int stage = 1;
  ParameterVector theta_star;
  std::vector<double> final_losses;    // full-batch, one per task
  std::vector<double> final_lambdas;
  std::vector<double> references;
  std::size_t iterations_used = 0;
  bool converged = false;
};

/// (task_loss + sum_j lambda_j * violation_j) / (1 + sum_j lambda_j).
/// Throws ContractViolation on a negative multiplier or a length mismatch.
double rescaled_loss(double task_loss, std::span<const double> violations,
                     std::span<const double> lambdas);

/// Convex weights of the re-scaled loss: {1, lambda_1, ...} / (1 + sum lambda).
std::vector<double> rescaled_weights(std::span<const double> lambdas);

/// Projected ascent step max(0, lambda + tau * violation). With
/// `clamp == false` the projection is skipped.
double multiplier_step(double lambda, double tau, double violation, bool clamp = true);

/// Plain gradient descent on a single objective. Throws DivergedError when a
/// loss or gradient stops being finite.
StageResult optimize_primary(const ObjectivePtr& objective, const ParameterVector& theta0,
                             const OptimizerConfig& config, TraceSink* trace = nullptr);

/// One constrained stage: minimizes the re-scaled Lagrangian of task
/// `stage_k` (1-based, >= 2) from `theta_star`, with multiplier ascent on
/// every higher-priority task. References f_j(theta_star) are evaluated
/// full-batch once and frozen. Trace iterations are numbered from
/// `first_iteration`.
StageResult nmt_stage(const PriorityProblem& problem, int stage_k,
                      const ParameterVector& theta_star, const OptimizerConfig& config,
                      TraceSink* trace = nullptr, std::size_t first_iteration = 0);

/// Full staged run: stage 1 is plain descent on task 1, then one constrained
/// stage per remaining task. Returns exactly problem.size() results.
std::vector<StageResult> nmt_optimize(const PriorityProblem& problem,
                                      const ParameterVector& theta0,
                                      const OptimizerConfig& config,
                                      TraceSink* trace = nullptr);

}  // namespace nmt
