#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmt/analysis.hpp"
#include "nmt/baselines.hpp"
#include "nmt/dataset.hpp"
#include "nmt/optimizer.hpp"

namespace nmt {

// Experiment files use a small TOML subset:
//
//   # comment
//   [section]            or   [task.1]
//   key = 1.5            numbers, true/false, "strings", [1, 2.5] arrays
//
// Every key is checked against the schema; unknown sections or keys are
// validation errors.

enum class JobKind { kNmt, kGrid, kDuality, kSweepCompare };
const char* to_string(JobKind job) noexcept;

enum class TaskFamily { kQuadratic, kLogistic, kRanking, kSharedTrunk };
const char* to_string(TaskFamily family) noexcept;

struct TaskSpec {
  TaskFamily family = TaskFamily::kQuadratic;
  std::vector<double> center;   // quadratic
  std::vector<double> scale;    // quadratic; defaults to all ones
  std::string label;            // data-backed families
  double l2 = 0.0;              // logistic
  std::size_t max_pairs = 0;    // ranking; 0 = all pairs

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct ModelSpec {
  std::size_t trunk_width = 4;
  bool trunk_bias = true;
  bool head_bias = true;
  double init_scale = 0.5;      // stddev of the seeded init when theta0 is absent

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct AnalysisSpec {
  double box_lower = -3.0;
  double box_upper = 3.0;
  double resolution = 1e-2;
  bool refine = true;
  std::size_t lambda_points = 25;
  double lambda_min = 0.01;
  double lambda_max = 100.0;
  std::size_t xi_points = 9;    // xi axis spans [-r_i, r_i]
  std::optional<std::vector<double>> theta_star;

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct ExperimentConfig {
  JobKind job = JobKind::kNmt;
  std::uint64_t seed = 0;
  std::string out_dir;          // output root; empty = NMT_OUT_ROOT or "runs"
  std::size_t threads = 1;
  double dominance_tol = 1e-2;

  std::optional<SyntheticConfig> data;   // its seed always equals `seed`
  ModelSpec model;
  std::vector<TaskSpec> tasks;
  std::vector<double> tolerances;
  std::optional<std::vector<double>> theta0;
  OptimizerConfig optimizer;
  WeightGrid grid = WeightGrid::default_two_task();
  AnalysisSpec analysis;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates an experiment file. Throws ValidationError listing
/// every offending key (syntax errors are reported as "line N").
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace nmt
