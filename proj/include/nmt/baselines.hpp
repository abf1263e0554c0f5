#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "nmt/objectives.hpp"
#include "nmt/optimizer.hpp"

namespace nmt {

/// Sum_i alpha_i f_i(theta) as a single objective. Throws ConfigError on a
/// length mismatch, a nonpositive alpha or members of different dimension.
ObjectivePtr weighted_sum_objective(const std::vector<ObjectivePtr>& tasks,
                                    const std::vector<double>& alphas);

enum class WeightNormalization {
  kSimplex,  // lists for tasks 1..m-1; the last weight is 1 - sum(others)
  kRaw,      // one list per task; the full product is evaluated
};

struct WeightGrid {
  std::vector<std::vector<double>> weights_per_task;
  WeightNormalization normalization = WeightNormalization::kSimplex;

  /// Primary weight 0.5, 0.6, ..., 0.9 on two tasks, simplex-normalized.
  static WeightGrid default_two_task();

  /// Every weight vector of the grid in row-major product order. Throws
  /// ConfigError on an empty grid, a weight outside (0, 1], a list count
  /// that does not match `num_tasks`, or a simplex point whose last weight
  /// would not be positive.
  std::vector<std::vector<double>> combinations(std::size_t num_tasks) const;

  friend bool operator==(const WeightGrid&, const WeightGrid&) = default;
};

struct FrontierPoint {
  std::vector<double> weights;
  std::vector<double> final_losses;     // NaN when diverged
  std::vector<double> final_metrics;    // NaN when a task has no metric
  ParameterVector theta_final;
  std::size_t iterations = 0;
  bool converged = false;
  bool diverged = false;
};

/// Trains one weighted-sum model per grid combination, all from `theta0`
/// with the same config. Diverged runs are kept and flagged. Results come
/// back in grid order whatever the thread count.
std::vector<FrontierPoint> grid_search(const PriorityProblem& problem, const WeightGrid& grid,
                                       const OptimizerConfig& config,
                                       const ParameterVector& theta0,
                                       std::size_t threads = 1);

/// Rows: method, w_1..w_m, loss_1..m, metric_1..m, diverged. `methods`
/// labels each point (defaults to "grid").
std::string frontier_to_csv(const std::vector<FrontierPoint>& points, std::size_t num_tasks,
                            const std::vector<std::string>& methods = {});
void write_frontier_csv(const std::vector<FrontierPoint>& points, std::size_t num_tasks,
                        const std::filesystem::path& path,
                        const std::vector<std::string>& methods = {});

}  // namespace nmt
