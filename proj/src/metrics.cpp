#include "nmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "nmt/errors.hpp"
#include "nmt/format.hpp"

namespace nmt {

AucCounts auc_counts(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw ContractViolation("auc: scores and labels differ in length");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw ContractViolation("auc: NaN score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk tie groups in ascending score order. Every positive in a group beats
  // all negatives seen in earlier groups and ties with negatives in its own.
  std::uint64_t positives = 0, negatives = 0;
  std::uint64_t wins = 0, ties = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    std::uint64_t group_pos = 0, group_neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[g]]) {
      (labels[order[end]] > 0.5 ? group_pos : group_neg) += 1;
      ++end;
    }
    wins += group_pos * negatives;
    ties += group_pos * group_neg;
    positives += group_pos;
    negatives += group_neg;
    g = end;
  }
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("auc is undefined unless both classes are present");
  }
  return {2 * wins + ties, 2 * positives * negatives};
}

double auc_value(const AucCounts& c) {
  if (c.denominator == 0) throw ContractViolation("auc_value: empty denominator");
  if (2 * c.numerator <= c.denominator) {
    return static_cast<double>(c.numerator) / static_cast<double>(c.denominator);
  }
  return 1.0 - static_cast<double>(c.denominator - c.numerator) /
                   static_cast<double>(c.denominator);
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  return auc_value(auc_counts(scores, labels));
}

void RunTrace::begin_stage(StageInfo info) {
  const int expected = static_cast<int>(stages_.size()) + 1;
  if (info.stage != expected) {
    throw ContractViolation("trace: expected stage " + std::to_string(expected) +
                            ", got " + std::to_string(info.stage));
  }
  if (info.references.size() != static_cast<std::size_t>(info.stage - 1)) {
    throw ContractViolation("trace: stage references have the wrong length");
  }
  stages_.push_back(std::move(info));
  stage_starts_.push_back(rows_.size());
}

void RunTrace::record(TraceRow row) {
  if (stages_.empty() || row.stage != stages_.back().stage) {
    throw ContractViolation("trace: row recorded outside its stage");
  }
  if (num_tasks_ != 0 && row.losses.size() != num_tasks_) {
    throw ContractViolation("trace: row has the wrong number of losses");
  }
  const auto constraints = static_cast<std::size_t>(row.stage - 1);
  if (row.lambdas.size() != constraints || row.violations.size() != constraints) {
    throw ContractViolation("trace: lambda/violation columns must have stage-1 entries");
  }
  if (!rows_.empty() && row.iteration <= rows_.back().iteration) {
    throw ContractViolation("trace: iteration indices must strictly increase");
  }
  if (nonnegative_) {
    for (double l : row.lambdas) {
      if (!(l >= 0.0)) throw ContractViolation("trace: negative multiplier recorded");
    }
  }
  rows_.push_back(std::move(row));
}

std::vector<std::size_t> RunTrace::stage_boundaries() const {
  std::vector<std::size_t> out;
  for (const auto& s : stages_) out.push_back(s.first_iteration);
  return out;
}

std::span<const TraceRow> RunTrace::stage_rows(int stage) const {
  if (stage < 1 || static_cast<std::size_t>(stage) > stages_.size()) return {};
  const std::size_t begin = stage_starts_[stage - 1];
  const std::size_t end = static_cast<std::size_t>(stage) < stages_.size()
                              ? stage_starts_[stage]
                              : rows_.size();
  return std::span<const TraceRow>(rows_).subspan(begin, end - begin);
}

std::string trace_to_csv(const RunTrace& trace) {
  const std::size_t m = trace.num_tasks();
  std::string out = "stage,iter";
  for (std::size_t k = 1; k <= m; ++k) out += ",loss_" + std::to_string(k);
  for (std::size_t k = 1; k < m; ++k) out += ",lambda_" + std::to_string(k);
  for (std::size_t k = 1; k < m; ++k) out += ",violation_" + std::to_string(k);
  out += '\n';
  for (const auto& row : trace.rows()) {
    out += std::to_string(row.stage) + ',' + std::to_string(row.iteration);
    for (double v : row.losses) out += ',' + format_double(v);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      out += ',';
      if (k < row.lambdas.size()) out += format_double(row.lambdas[k]);
    }
    for (std::size_t k = 0; k + 1 < m; ++k) {
      out += ',';
      if (k < row.violations.size()) out += format_double(row.violations[k]);
    }
    out += '\n';
  }
  return out;
}

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << trace_to_csv(trace);
}

TraceSummary trace_summarize(const RunTrace& trace) {
  if (trace.rows().empty()) throw ContractViolation("trace_summarize: empty trace");
  TraceSummary summary;
  summary.conv_tol = trace.conv_tol();
  bool any_constrained = false;
  bool all_hold = true;

  for (const auto& info : trace.stages()) {
    const auto rows = trace.stage_rows(info.stage);
    if (rows.empty()) continue;
    std::vector<const TraceRow*> full;
    for (const auto& row : rows) {
      if (row.full_batch) full.push_back(&row);
    }
    if (full.empty()) full.push_back(&rows.back());

    StageSummary s;
    s.stage = info.stage;
    s.rows = rows.size();
    s.final_losses = full.back()->losses;
    const std::size_t own = static_cast<std::size_t>(info.stage - 1);
    s.objective_start = rows.front().losses.at(own);
    s.objective_end = full.back()->losses.at(own);
    s.objective_improved = s.objective_end <= s.objective_start + 1e-9;
    s.objective_strictly_decreased = s.objective_end < s.objective_start;

    const std::size_t tail = std::max<std::size_t>(1, (full.size() + 9) / 10);
    const std::size_t tail_begin = full.size() - tail;
    for (std::size_t j = 0; j < own; ++j) {
      ConstraintSummary c;
      c.task = j + 1;
      c.reference = info.references[j];
      c.tolerance = j < info.tolerances.size() ? info.tolerances[j] : 0.0;
      c.final_residual = full.back()->violations[j];
      double acc = 0.0;
      for (std::size_t r = tail_begin; r < full.size(); ++r) acc += full[r]->violations[j];
      c.mean_tail_residual = acc / static_cast<double>(tail);
      c.lambda_start = rows.front().lambdas[j];
      c.lambda_max = c.lambda_start;
      for (const auto& row : rows) c.lambda_max = std::max(c.lambda_max, row.lambdas[j]);
      c.lambda_final = rows.back().lambdas[j];
      c.lambda_tail_change = std::abs(c.lambda_final - full[tail_begin]->lambdas[j]) /
                             std::max(1.0, std::abs(c.lambda_final));

      s.lambda_peak_ok = s.lambda_peak_ok && c.lambda_max >= c.lambda_start;
      s.lambda_rose = s.lambda_rose || c.lambda_max > c.lambda_start;
      s.residual_ok = s.residual_ok && c.mean_tail_residual <=
                                           summary.conv_tol *
                                               std::max(1.0, std::abs(c.reference));
      s.constraints.push_back(c);
    }
    if (own > 0) {
      any_constrained = true;
      s.pattern_holds = s.lambda_peak_ok && s.residual_ok && s.objective_improved;
      all_hold = all_hold && s.pattern_holds;
    }
    summary.stages.push_back(std::move(s));
  }
  if (any_constrained) summary.pattern_holds = all_hold;
  return summary;
}

nlohmann::json to_json(const TraceSummary& summary) {
  nlohmann::json out;
  out["conv_tol"] = summary.conv_tol;
  out["stages"] = nlohmann::json::array();
  for (const auto& s : summary.stages) {
    nlohmann::json js;
    js["stage"] = s.stage;
    js["rows"] = s.rows;
    js["final_losses"] = s.final_losses;
    js["objective_start"] = s.objective_start;
    js["objective_end"] = s.objective_end;
    if (!s.constraints.empty()) {
      nlohmann::json cs = nlohmann::json::array();
      for (const auto& c : s.constraints) {
        cs.push_back({{"task", c.task},
                      {"reference", c.reference},
                      {"tolerance", c.tolerance},
                      {"final_residual", c.final_residual},
                      {"mean_tail_residual", c.mean_tail_residual},
                      {"lambda_start", c.lambda_start},
                      {"lambda_max", c.lambda_max},
                      {"lambda_final", c.lambda_final},
                      {"lambda_tail_change", c.lambda_tail_change}});
      }
      js["constraints"] = cs;
      js["pattern"] = {{"lambda_peak_ok", s.lambda_peak_ok},
                       {"lambda_rose", s.lambda_rose},
                       {"residual_ok", s.residual_ok},
                       {"objective_improved", s.objective_improved},
                       {"objective_strictly_decreased", s.objective_strictly_decreased},
                       {"holds", s.pattern_holds}};
    }
    out["stages"].push_back(js);
  }
  if (summary.pattern_holds) {
    out["pattern_holds"] = *summary.pattern_holds;
  } else {
    out["pattern_holds"] = nullptr;
  }
  return out;
}

}  // namespace nmt
