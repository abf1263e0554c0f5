#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nmt {

/// Exact AUC: probability that a random positive outscores a random
/// negative, ties counted 1/2. Labels are 0/1 (anything > 0.5 is positive).
/// Throws UndefinedMetricError unless both classes are present and
/// ContractViolation on length mismatch or NaN scores.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Exact rational form of the AUC: (2 * wins + ties) / (2 * P * N).
struct AucCounts {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  friend bool operator==(const AucCounts&, const AucCounts&) = default;
};

/// Same checks as auc().
AucCounts auc_counts(std::span<const double> scores, std::span<const double> labels);

/// The double auc() returns for given counts. Values above 1/2 are formed as
/// 1 - (denominator - numerator) / denominator, which makes
/// auc(s) + auc(-s) == 1 hold exactly.
double auc_value(const AucCounts& counts);

/// One recorded optimizer iteration.
struct TraceRow {
  int stage = 1;                    // 1-based stage index
  std::size_t iteration = 0;        // run-global, strictly increasing
  bool full_batch = true;           // losses are full-batch values
  std::vector<double> losses;       // one per task in the problem
  std::vector<double> lambdas;      // stage - 1 entries
  std::vector<double> violations;   // f_j - f_j(theta*) - r_j, stage - 1 entries

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Per-stage bookkeeping: where the stage starts and the frozen references.
struct StageInfo {
  int stage = 1;
  std::size_t first_iteration = 0;
  std::vector<double> references;   // f_j(theta*) for j < stage
  std::vector<double> tolerances;   // r_j for j < stage

  friend bool operator==(const StageInfo&, const StageInfo&) = default;
};

/// Receives trace rows from the optimizer.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void begin_stage(StageInfo info) = 0;
  virtual void record(TraceRow row) = 0;
};

/// Append-only record of a whole run.
class RunTrace final : public TraceSink {
 public:
  explicit RunTrace(std::size_t num_tasks = 0) : num_tasks_(num_tasks) {}

  /// Throws ContractViolation if stages do not start in order 1, 2, ...
  void begin_stage(StageInfo info) override;
  /// Throws ContractViolation on a row that breaks the trace invariants
  /// (wrong widths, non-increasing iteration, negative multiplier when
  /// clamping is on).
  void record(TraceRow row) override;

  std::size_t num_tasks() const noexcept { return num_tasks_; }
  void set_num_tasks(std::size_t m) { num_tasks_ = m; }
  double conv_tol() const noexcept { return conv_tol_; }
  void set_conv_tol(double tol) noexcept { conv_tol_ = tol; }
  void set_require_nonnegative_lambdas(bool on) noexcept { nonnegative_ = on; }

  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  const std::vector<StageInfo>& stages() const noexcept { return stages_; }
  std::vector<std::size_t> stage_boundaries() const;
  /// Rows belonging to `stage` (1-based), in order.
  std::span<const TraceRow> stage_rows(int stage) const;

  std::vector<std::pair<std::string, std::string>>& metadata() noexcept { return metadata_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const noexcept {
    return metadata_;
  }

  friend bool operator==(const RunTrace& a, const RunTrace& b) {
    return a.num_tasks_ == b.num_tasks_ && a.conv_tol_ == b.conv_tol_ &&
           a.nonnegative_ == b.nonnegative_ && a.rows_ == b.rows_ && a.stages_ == b.stages_ &&
           a.stage_starts_ == b.stage_starts_ && a.metadata_ == b.metadata_;
  }

 private:
  std::size_t num_tasks_ = 0;
  double conv_tol_ = 1e-6;
  bool nonnegative_ = true;
  std::vector<TraceRow> rows_;
  std::vector<StageInfo> stages_;
  std::vector<std::size_t> stage_starts_;  // row index where each stage starts
  std::vector<std::pair<std::string, std::string>> metadata_;
};

/// Columns: stage, iter, loss_1..m, lambda_1..m-1, violation_1..m-1.
/// Cells that do not apply to a row's stage are left empty.
std::string trace_to_csv(const RunTrace& trace);
void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);

struct ConstraintSummary {
  std::size_t task = 0;              // 1-based constrained task
  double reference = 0.0;
  double tolerance = 0.0;
  double final_residual = 0.0;
  double mean_tail_residual = 0.0;   // over the last 10% of full-batch rows
  double lambda_start = 0.0;
  double lambda_max = 0.0;
  double lambda_final = 0.0;
  double lambda_tail_change = 0.0;   // |lambda_final - lambda at tail start| / max(1, |lambda_final|)
};

struct StageSummary {
  int stage = 1;
  std::size_t rows = 0;
  std::vector<double> final_losses;
  double objective_start = 0.0;      // own-task loss at the first row
  double objective_end = 0.0;        // own-task loss at the last full-batch row
  std::vector<ConstraintSummary> constraints;  // empty for stage 1
  // Qualitative multiplier pattern, stages >= 2 only.
  bool lambda_peak_ok = true;        // max lambda >= lambda at stage start
  bool lambda_rose = false;          // some multiplier exceeded its starting value
  bool residual_ok = true;           // mean tail residual within the conv_tol band
  bool objective_improved = true;    // end <= start + 1e-9
  bool objective_strictly_decreased = false;
  bool pattern_holds = true;
};

struct TraceSummary {
  double conv_tol = 0.0;
  std::vector<StageSummary> stages;
  /// Conjunction over constrained stages; empty when the run had one stage.
  std::optional<bool> pattern_holds;
};

/// Pure function of the trace. Throws ContractViolation on an empty trace.
TraceSummary trace_summarize(const RunTrace& trace);

nlohmann::json to_json(const TraceSummary& summary);

}  // namespace nmt
