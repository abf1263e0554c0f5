#include "nmt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nmt/errors.hpp"

namespace nmt {

void OptimizerConfig::validate() const {
  std::vector<ValidationIssue> issues;
  if (!(eta > 0.0) || !std::isfinite(eta)) issues.push_back({"eta", "must be > 0"});
  if (!(tau > 0.0) || !std::isfinite(tau)) issues.push_back({"tau", "must be > 0"});
  if (!(lambda_init >= 0.0) || !std::isfinite(lambda_init)) {
    issues.push_back({"lambda_init", "must be >= 0"});
  }
  if (max_iters < 1) issues.push_back({"max_iters", "must be >= 1"});
  if (!(conv_tol > 0.0) || !std::isfinite(conv_tol)) {
    issues.push_back({"conv_tol", "must be > 0"});
  }
  if (conv_window < 1) issues.push_back({"conv_window", "must be >= 1"});
  if (full_eval_every < 1) issues.push_back({"full_eval_every", "must be >= 1"});
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::size_t PriorityProblem::dim() const {
  if (tasks.empty()) throw ConfigError("priority problem has no tasks");
  return tasks.front()->dim();
}

void PriorityProblem::validate() const {
  if (tasks.empty()) throw ConfigError("priority problem has no tasks");
  for (const auto& task : tasks) {
    if (!task) throw ConfigError("priority problem contains a null task");
    if (task->dim() != tasks.front()->dim()) {
      throw ConfigError("task '" + task->id() + "' has dimension " +
                        std::to_string(task->dim()) + ", expected " +
                        std::to_string(tasks.front()->dim()));
    }
  }
  if (!tolerances.empty() && tolerances.size() != tasks.size()) {
    throw ConfigError("expected one tolerance per task");
  }
  for (double r : tolerances) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("tolerances must be >= 0");
  }
}

double rescaled_loss(double task_loss, std::span<const double> violations,
                     std::span<const double> lambdas) {
  if (violations.size() != lambdas.size()) {
    throw ContractViolation("rescaled_loss: violations and lambdas differ in length");
  }
  double total = task_loss;
  double mass = 1.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] >= 0.0)) {
      throw ContractViolation("rescaled_loss: multiplier " + std::to_string(j + 1) +
                              " is negative");
    }
    total += lambdas[j] * violations[j];
    mass += lambdas[j];
  }
  return total / mass;
}

std::vector<double> rescaled_weights(std::span<const double> lambdas) {
  double mass = 1.0;
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ContractViolation("rescaled_weights: negative multiplier");
    mass += l;
  }
  std::vector<double> w;
  w.reserve(lambdas.size() + 1);
  w.push_back(1.0 / mass);
  for (double l : lambdas) w.push_back(l / mass);
  return w;
}

double multiplier_step(double lambda, double tau, double violation, bool clamp) {
  const double next = lambda + tau * violation;
  return clamp ? std::max(0.0, next) : next;
}

namespace {

struct HistoryPoint {
  std::size_t iteration;
  double objective;
};

// Draws per-task minibatches (uniform with replacement) from one seeded stream.
class BatchSampler {
 public:
  BatchSampler(const PriorityProblem& problem, const BatchMode& mode, int stage)
      : problem_(problem), mode_(mode) {
    std::seed_seq seq{static_cast<std::uint32_t>(mode.seed),
                      static_cast<std::uint32_t>(mode.seed >> 32),
                      static_cast<std::uint32_t>(stage)};
    rng_.seed(seq);
    batches_.resize(problem.size());
  }

  void draw(std::size_t task) {
    auto& out = batches_[task];
    out.clear();
    const std::size_t n = problem_.tasks[task]->examples();
    if (n == 0) return;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < mode_.size; ++i) out.push_back(pick(rng_));
  }

  Batch batch(std::size_t task) const { return batches_[task]; }

 private:
  const PriorityProblem& problem_;
  BatchMode mode_;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::size_t>> batches_;
};

double stage_objective(double own_loss, const std::vector<double>& violations,
                       const std::vector<double>& lambdas) {
  double total = own_loss;
  double mass = 1.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    total += lambdas[j] * violations[j];
    mass += lambdas[j];
  }
  return total / mass;
}

bool finite_all(const std::vector<double>& v) { return all_finite(v); }

// Shared body of stage 1 and the constrained stages. `stage` is 1-based and
// the active tasks are 0..stage-1, the last one being the stage objective.
StageResult run_stage(const PriorityProblem& problem, int stage,
                      std::vector<double> theta, const OptimizerConfig& config,
                      TraceSink* sink, std::size_t first_iteration) {
  const std::size_t m = problem.size();
  const std::size_t own = static_cast<std::size_t>(stage - 1);
  const std::size_t n = theta.size();
  const bool full_mode = config.batch.full();
  const auto& tasks = problem.tasks;

  auto full_values = [&](const std::vector<double>& at) {
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) out[j] = tasks[j]->value(at);
    return out;
  };

  std::vector<double> refs(own), tol(own);
  std::vector<double> losses = full_values(theta);
  if (!finite_all(losses)) {
    throw DivergedError(stage, 0, "non-finite loss at the stage start");
  }
  for (std::size_t j = 0; j < own; ++j) {
    refs[j] = losses[j];
    tol[j] = problem.tolerance(j);
  }
  std::vector<double> lambdas(own, config.lambda_init);
  std::vector<double> violations(own);
  for (std::size_t j = 0; j < own; ++j) violations[j] = losses[j] - refs[j] - tol[j];

  if (sink) sink->begin_stage({stage, first_iteration, refs, tol});
  if (sink) sink->record({stage, first_iteration, true, losses, lambdas, violations});

  std::vector<HistoryPoint> history;
  history.push_back({0, stage_objective(losses[own], violations, lambdas)});

  std::vector<std::vector<double>> grads(own + 1, std::vector<double>(n));
  std::vector<double> active(own + 1);
  BatchSampler sampler(problem, config.batch, stage);

  auto evaluate_active = [&](bool use_batches, std::size_t iteration) {
    for (std::size_t j = 0; j <= own; ++j) {
      const Batch b = use_batches ? sampler.batch(j) : Batch{};
      active[j] = tasks[j]->value_and_gradient(theta, grads[j], b);
      if (!std::isfinite(active[j]) || !finite_all(grads[j])) {
        throw DivergedError(stage, iteration,
                            "non-finite loss or gradient for task " + std::to_string(j + 1));
      }
    }
  };

  if (full_mode) evaluate_active(false, 0);

  std::vector<double> direction(n);
  bool converged = false;
  std::size_t t = 0;
  bool last_row_full = true;
  while (t < config.max_iters) {
    ++t;
    if (!full_mode) {
      for (std::size_t j = 0; j < m; ++j) sampler.draw(j);
      evaluate_active(true, t);
    }

    // Gradient of the re-scaled loss; lambdas are constants here.
    double mass = 1.0;
    for (double l : lambdas) mass += l;
    if (!(mass > 0.0)) {
      throw DivergedError(stage, t, "multiplier mass 1 + sum(lambda) is not positive");
    }
    for (std::size_t i = 0; i < n; ++i) {
      double g = grads[own][i];
      for (std::size_t j = 0; j < own; ++j) g += lambdas[j] * grads[j][i];
      direction[i] = g / mass;
    }
    for (std::size_t i = 0; i < n; ++i) theta[i] -= config.eta * direction[i];
    if (!all_finite(theta)) throw DivergedError(stage, t, "parameters became non-finite");

    const bool full_row = full_mode || t % config.full_eval_every == 0 ||
                          t == config.max_iters;
    if (full_mode) {
      evaluate_active(false, t);
      for (std::size_t j = 0; j <= own; ++j) losses[j] = active[j];
      for (std::size_t j = own + 1; j < m; ++j) losses[j] = tasks[j]->value(theta);
    } else {
      // Minibatch estimates at the updated parameters drive the ascent step.
      for (std::size_t j = 0; j < m; ++j) losses[j] = tasks[j]->value(theta, sampler.batch(j));
    }
    if (!finite_all(losses)) throw DivergedError(stage, t, "non-finite loss");

    for (std::size_t j = 0; j < own; ++j) {
      lambdas[j] = multiplier_step(lambdas[j], config.tau, losses[j] - refs[j] - tol[j],
                                   config.clamp_lambda);
    }

    if (!full_mode && full_row) {
      losses = full_values(theta);
      if (!finite_all(losses)) throw DivergedError(stage, t, "non-finite loss");
    }
    for (std::size_t j = 0; j < own; ++j) violations[j] = losses[j] - refs[j] - tol[j];
    last_row_full = full_row;
    if (sink) sink->record({stage, first_iteration + t, full_row, losses, lambdas, violations});

    if (!full_row) continue;
    const double objective = stage_objective(losses[own], violations, lambdas);
    history.push_back({t, objective});
    if (t < config.conv_window) continue;
    const std::size_t horizon = t - config.conv_window;
    auto it = std::upper_bound(history.begin(), history.end(), horizon,
                               [](std::size_t v, const HistoryPoint& p) { return v < p.iteration; });
    if (it == history.begin()) continue;
    const double past = std::prev(it)->objective;
    const double rel = std::abs(objective - past) / std::max(1.0, std::abs(past));
    bool feasible = true;
    for (std::size_t j = 0; j < own; ++j) {
      feasible = feasible &&
                 violations[j] <= config.conv_tol * std::max(1.0, std::abs(refs[j]));
    }
    if (rel < config.conv_tol && feasible) {
      converged = true;
      break;
    }
  }

  StageResult result;
  result.stage = stage;
  result.final_losses = last_row_full ? losses : full_values(theta);
  result.theta_star = ParameterVector(std::move(theta));
  result.final_lambdas = lambdas;
  result.references = refs;
  result.iterations_used = t;
  result.converged = converged;
  return result;
}

}  // namespace

StageResult optimize_primary(const ObjectivePtr& objective, const ParameterVector& theta0,
                             const OptimizerConfig& config, TraceSink* trace) {
  config.validate();
  PriorityProblem single{{objective}, {}};
  single.validate();
  if (theta0.dim() != objective->dim()) {
    throw ConfigError("theta0 has dimension " + std::to_string(theta0.dim()) +
                      ", objective expects " + std::to_string(objective->dim()));
  }
  return run_stage(single, 1, theta0.to_vector(), config, trace, 0);
}

StageResult nmt_stage(const PriorityProblem& problem, int stage_k,
                      const ParameterVector& theta_star, const OptimizerConfig& config,
                      TraceSink* trace, std::size_t first_iteration) {
  config.validate();
  problem.validate();
  if (stage_k < 2 || static_cast<std::size_t>(stage_k) > problem.size()) {
    throw ConfigError("stage " + std::to_string(stage_k) + " is out of range for a " +
                      std::to_string(problem.size()) + "-task problem");
  }
  if (theta_star.dim() != problem.dim()) {
    throw ConfigError("theta_star has the wrong dimension");
  }
  return run_stage(problem, stage_k, theta_star.to_vector(), config, trace, first_iteration);
}

std::vector<StageResult> nmt_optimize(const PriorityProblem& problem,
                                      const ParameterVector& theta0,
                                      const OptimizerConfig& config, TraceSink* trace) {
  config.validate();
  problem.validate();
  if (theta0.dim() != problem.dim()) {
    throw ConfigError("theta0 has dimension " + std::to_string(theta0.dim()) +
                      ", problem expects " + std::to_string(problem.dim()));
  }
  std::vector<StageResult> results;
  std::vector<double> theta = theta0.to_vector();
  std::size_t next_iteration = 0;
  for (int k = 1; k <= static_cast<int>(problem.size()); ++k) {
    results.push_back(run_stage(problem, k, theta, config, trace, next_iteration));
    theta = results.back().theta_star.to_vector();
    next_iteration += results.back().iterations_used + 1;
  }
  return results;
}

}  // namespace nmt
