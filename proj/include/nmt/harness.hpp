#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmt/baselines.hpp"
#include "nmt/config.hpp"
#include "nmt/dataset.hpp"
#include "nmt/metrics.hpp"
#include "nmt/optimizer.hpp"

namespace nmt {

struct BuiltProblem {
  PriorityProblem problem;
  std::shared_ptr<const Dataset> data;   // null for data-free problems
  ParameterVector theta0;
};

/// Instantiates the tasks of a validated config. theta0 is taken from the
/// config when given, else drawn N(0, init_scale^2) from the config seed.
BuiltProblem build_problem(const ExperimentConfig& config);

/// NMT against a weighted-sum grid from the same theta0 and config.
struct SweepReport {
  std::vector<FrontierPoint> grid;
  std::vector<StageResult> stages;
  std::vector<double> nmt_losses;
  std::vector<double> nmt_metrics;          // NaN when a task has no metric
  std::size_t grid_runs = 0;
  std::size_t nmt_stages = 0;
  double tolerance = 0.0;
  double best_grid_primary_loss = 0.0;      // over non-diverged grid points
  std::vector<double> grid_loss_max;        // per task, attained range upper end
  bool primary_loss_dominates = false;      // nmt f_1 <= best grid f_1 + tol
  bool secondary_in_range = false;          // nmt f_k <= max grid f_k + tol, k >= 2
  bool verdict = false;
  // Metric comparison against the best grid value per task, when every
  // task has a metric.
  std::optional<bool> primary_metric_dominates;
  std::vector<double> metric_delta_abs;     // nmt - best grid
  std::vector<double> metric_delta_rel;     // (nmt - best grid) / best grid
};

/// Throws ConfigError for fewer than two tasks; optimizer errors propagate.
SweepReport compare_sweep(const PriorityProblem& problem, const WeightGrid& grid,
                          const OptimizerConfig& config, const ParameterVector& theta0,
                          double tolerance = 1e-2, std::size_t threads = 1,
                          TraceSink* trace = nullptr);

nlohmann::json to_json(const SweepReport& report);

struct RunOutcome {
  int status = 0;                      // 0 ok, 2 diverged, 3 other failure
  std::filesystem::path directory;
  std::vector<std::string> files;      // names written, in order
  nlohmann::json summary;              // contents of summary.json, or error.json
};

/// Output root: `override_root` if nonempty, else config.out_dir, else the
/// NMT_OUT_ROOT environment variable, else "runs".
std::filesystem::path output_root(const ExperimentConfig& config,
                                  const std::filesystem::path& override_root = {});

/// Directory name `<config hash>-s<seed>`.
std::string run_directory_name(const ExperimentConfig& config);

/// Runs the configured job and writes its artifacts. Failures are reported
/// through the status and error.json rather than exceptions.
RunOutcome run_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& override_root = {});

}  // namespace nmt
