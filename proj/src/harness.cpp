#include "nmt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>

#include "nmt/analysis.hpp"
#include "nmt/errors.hpp"

namespace nmt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> task_metrics(const PriorityProblem& problem, const ParameterVector& theta) {
  std::vector<double> out;
  for (const auto& task : problem.tasks) {
    out.push_back(task->metric(theta.values()).value_or(kNaN));
  }
  return out;
}

std::vector<double> task_losses(const PriorityProblem& problem, const ParameterVector& theta) {
  std::vector<double> out;
  for (const auto& task : problem.tasks) out.push_back(task->evaluate(theta));
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json stages_json(const std::vector<StageResult>& stages) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : stages) {
    out.push_back({{"stage", s.stage},
                   {"theta", s.theta_star.to_vector()},
                   {"final_losses", s.final_losses},
                   {"lambdas", s.final_lambdas},
                   {"references", s.references},
                   {"iterations", s.iterations_used},
                   {"converged", s.converged}});
  }
  return out;
}

std::vector<double> axis(double lo, double hi, std::size_t points) {
  if (points <= 1) return {0.5 * (lo + hi)};
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return out;
}

void write_error(RunOutcome& outcome, nlohmann::json err) {
  std::error_code ec;
  std::filesystem::create_directories(outcome.directory, ec);
  if (!ec) {
    std::ofstream out(outcome.directory / "error.json", std::ios::binary);
    if (out) {
      out << err.dump(2) << "\n";
      outcome.files.push_back("error.json");
    }
  }
  outcome.summary = std::move(err);
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& config) {
  if (config.tasks.empty()) throw ConfigError("build_problem: no tasks");
  BuiltProblem built;
  built.problem.tolerances = config.tolerances;
  const TaskFamily family = config.tasks.front().family;

  if (family == TaskFamily::kQuadratic) {
    for (std::size_t k = 0; k < config.tasks.size(); ++k) {
      const auto& t = config.tasks[k];
      built.problem.tasks.push_back(
          make_quadratic({t.center, t.scale}, "quadratic:" + std::to_string(k + 1)));
    }
  } else {
    if (!config.data) throw ConfigError("build_problem: data-backed tasks need [data]");
    SyntheticConfig dc = *config.data;
    dc.seed = config.seed;
    built.data = std::make_shared<const Dataset>(generate_synthetic(dc));
    if (family == TaskFamily::kSharedTrunk) {
      std::vector<std::string> heads;
      for (const auto& t : config.tasks) heads.push_back(t.label);
      built.problem.tasks = make_shared_trunk_model(
          built.data, config.model.trunk_width, heads,
          SharedTrunkOptions{config.model.trunk_bias, config.model.head_bias});
    } else {
      const LinearLayout layout{0, built.data->features() + 1};
      for (std::size_t k = 0; k < config.tasks.size(); ++k) {
        const auto& t = config.tasks[k];
        if (t.family == TaskFamily::kLogistic) {
          built.problem.tasks.push_back(
              make_logistic(built.data, t.label, t.l2, "logistic:" + t.label, layout));
        } else if (t.family == TaskFamily::kRanking) {
          PairSpec pairs{t.label, t.max_pairs, config.seed + k + 1, {}};
          built.problem.tasks.push_back(
              make_pairwise_ranking(built.data, pairs, "ranking:" + t.label, layout));
        } else {
          throw ConfigError("build_problem: tasks must share one parameter space");
        }
      }
    }
  }
  built.problem.validate();

  const std::size_t dim = built.problem.dim();
  if (config.theta0) {
    if (config.theta0->size() != dim) {
      throw ValidationError({{"problem.theta0", "needs " + std::to_string(dim) + " entries"}});
    }
    built.theta0 = ParameterVector(*config.theta0);
  } else {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> theta(dim);
    for (double& v : theta) v = config.model.init_scale * normal(rng);
    built.theta0 = ParameterVector(std::move(theta));
  }
  return built;
}

SweepReport compare_sweep(const PriorityProblem& problem, const WeightGrid& grid,
                          const OptimizerConfig& config, const ParameterVector& theta0,
                          double tolerance, std::size_t threads, TraceSink* trace) {
  const std::size_t m = problem.size();
  if (m < 2) throw ConfigError("compare_sweep: needs at least two tasks");
  SweepReport r;
  r.tolerance = tolerance;
  r.grid = grid_search(problem, grid, config, theta0, threads);
  r.stages = nmt_optimize(problem, theta0, config, trace);
  r.grid_runs = r.grid.size();
  r.nmt_stages = r.stages.size();
  const ParameterVector& theta = r.stages.back().theta_star;
  r.nmt_losses = task_losses(problem, theta);
  r.nmt_metrics = task_metrics(problem, theta);

  r.best_grid_primary_loss = std::numeric_limits<double>::infinity();
  r.grid_loss_max.assign(m, -std::numeric_limits<double>::infinity());
  std::vector<double> best_metric(m, -std::numeric_limits<double>::infinity());
  for (const auto& p : r.grid) {
    if (p.diverged) continue;
    r.best_grid_primary_loss = std::min(r.best_grid_primary_loss, p.final_losses[0]);
    for (std::size_t k = 0; k < m; ++k) {
      r.grid_loss_max[k] = std::max(r.grid_loss_max[k], p.final_losses[k]);
      if (!std::isnan(p.final_metrics[k])) {
        best_metric[k] = std::max(best_metric[k], p.final_metrics[k]);
      }
    }
  }
  r.primary_loss_dominates = r.nmt_losses[0] <= r.best_grid_primary_loss + tolerance;
  r.secondary_in_range = true;
  for (std::size_t k = 1; k < m; ++k) {
    r.secondary_in_range = r.secondary_in_range && r.nmt_losses[k] <= r.grid_loss_max[k] + tolerance;
  }
  r.verdict = r.primary_loss_dominates && r.secondary_in_range;

  const bool has_metrics = std::none_of(r.nmt_metrics.begin(), r.nmt_metrics.end(),
                                        [](double v) { return std::isnan(v); }) &&
                           std::all_of(best_metric.begin(), best_metric.end(),
                                       [](double v) { return std::isfinite(v); });
  if (has_metrics) {
    for (std::size_t k = 0; k < m; ++k) {
      const double d = r.nmt_metrics[k] - best_metric[k];
      r.metric_delta_abs.push_back(d);
      r.metric_delta_rel.push_back(best_metric[k] != 0.0 ? d / best_metric[k] : kNaN);
    }
    r.primary_metric_dominates = r.nmt_metrics[0] >= best_metric[0] - tolerance;
  }
  return r;
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json out;
  out["run_count"] = {{"grid", r.grid_runs}, {"nmt_stages", r.nmt_stages}};
  out["tolerance"] = r.tolerance;
  out["nmt"] = {{"losses", r.nmt_losses}, {"metrics", r.nmt_metrics}};
  out["best_grid_primary_loss"] = r.best_grid_primary_loss;
  out["grid_loss_max"] = r.grid_loss_max;
  out["primary_loss_dominates"] = r.primary_loss_dominates;
  out["secondary_in_range"] = r.secondary_in_range;
  out["verdict"] = r.verdict;
  if (r.primary_metric_dominates) {
    out["metrics"] = {{"primary_metric_dominates", *r.primary_metric_dominates},
                      {"delta_abs", r.metric_delta_abs},
                      {"delta_rel", r.metric_delta_rel}};
  }
  return out;
}

std::filesystem::path output_root(const ExperimentConfig& config,
                                  const std::filesystem::path& override_root) {
  if (!override_root.empty()) return override_root;
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("NMT_OUT_ROOT"); env && *env) return env;
  return "runs";
}

std::string run_directory_name(const ExperimentConfig& config) {
  return config_hash(config) + "-s" + std::to_string(config.seed);
}

RunOutcome run_experiment(const ExperimentConfig& input,
                          const std::filesystem::path& override_root) {
  ExperimentConfig config = input;
  if (config.data) config.data->seed = config.seed;
  config.optimizer.batch.seed = config.seed;

  RunOutcome outcome;
  outcome.directory = output_root(config, override_root) / run_directory_name(config);
  auto emit = [&](const std::string& name, const auto& writer) {
    writer(outcome.directory / name);
    outcome.files.push_back(name);
  };

  try {
    std::filesystem::create_directories(outcome.directory);
    config.optimizer.validate();
    BuiltProblem built = build_problem(config);
    const PriorityProblem& problem = built.problem;
    const std::size_t m = problem.size();

    RunTrace trace(m);
    trace.set_conv_tol(config.optimizer.conv_tol);
    trace.set_require_nonnegative_lambdas(config.optimizer.clamp_lambda);
    trace.metadata() = {{"job", to_string(config.job)},
                        {"seed", std::to_string(config.seed)},
                        {"config_hash", config_hash(config)}};

    nlohmann::json summary;
    summary["job"] = to_string(config.job);
    summary["seed"] = config.seed;
    summary["config_hash"] = config_hash(config);
    summary["tasks"] = m;
    summary["dim"] = problem.dim();

    if (built.data) {
      emit("dataset.csv", [&](const auto& p) { write_csv(*built.data, p); });
    }

    switch (config.job) {
      case JobKind::kNmt: {
        const auto stages = nmt_optimize(problem, built.theta0, config.optimizer, &trace);
        summary["stages"] = stages_json(stages);
        summary["final_metrics"] = task_metrics(problem, stages.back().theta_star);
        summary["trace"] = to_json(trace_summarize(trace));
        break;
      }
      case JobKind::kGrid: {
        const auto points =
            grid_search(problem, config.grid, config.optimizer, built.theta0, config.threads);
        emit("frontier.csv", [&](const auto& p) { write_frontier_csv(points, m, p); });
        summary["run_count"] = {{"grid", points.size()}};
        std::size_t diverged = 0;
        for (const auto& p : points) diverged += p.diverged ? 1 : 0;
        summary["diverged_runs"] = diverged;
        break;
      }
      case JobKind::kSweepCompare: {
        const SweepReport report =
            compare_sweep(problem, config.grid, config.optimizer, built.theta0,
                          config.dominance_tol, config.threads, &trace);
        std::vector<FrontierPoint> rows = report.grid;
        std::vector<std::string> methods(rows.size(), "grid");
        FrontierPoint nmt_row;
        nmt_row.final_losses = report.nmt_losses;
        nmt_row.final_metrics = report.nmt_metrics;
        nmt_row.theta_final = report.stages.back().theta_star;
        rows.push_back(nmt_row);
        methods.push_back("nmt");
        emit("frontier.csv", [&](const auto& p) { write_frontier_csv(rows, m, p, methods); });
        summary["stages"] = stages_json(report.stages);
        summary["comparison"] = to_json(report);
        summary["trace"] = to_json(trace_summarize(trace));
        break;
      }
      case JobKind::kDuality: {
        ParameterVector theta_star = built.theta0;
        if (config.analysis.theta_star) {
          theta_star = ParameterVector(*config.analysis.theta_star);
        } else {
          trace.set_num_tasks(1);
          const auto stage1 =
              optimize_primary(problem.tasks.front(), built.theta0, config.optimizer, &trace);
          theta_star = stage1.theta_star;
        }
        const auto& a = config.analysis;
        const GridBox box = GridBox::uniform(problem.dim(), a.box_lower, a.box_upper,
                                             a.resolution, a.refine);
        BruteForceSolver solver(problem, theta_star, box, config.threads);
        std::vector<std::vector<double>> lambda_axes(
            m - 1, default_lambda_axis(a.lambda_points, a.lambda_min, a.lambda_max));
        DualityReport duality = duality_gap(solver, lambda_axes);
        duality.slater = check_slater(problem, theta_star);
        std::vector<std::vector<double>> xi_axes;
        for (std::size_t k = 0; k + 1 < m; ++k) {
          const double r = problem.tolerance(k);
          xi_axes.push_back(axis(-r, r, a.xi_points));
        }
        const PerturbationGrid pgrid = compute_perturbation_grid(solver, xi_axes, config.seed);
        const ConvexityReport convexity =
            check_midpoint_convexity(pgrid, std::max(2.0 * pgrid.grid_error, 1e-9));
        nlohmann::json report;
        report["theta_star"] = theta_star.to_vector();
        report["duality"] = to_json(duality);
        report["convexity"] = to_json(convexity);
        report["perturbation"] = {{"epsilon_estimate", pgrid.epsilon_estimate},
                                  {"lipschitz_estimate", pgrid.lipschitz_estimate},
                                  {"grid_error", pgrid.grid_error},
                                  {"monotonicity_violations",
                                   count_monotonicity_violations(pgrid, 2.0 * pgrid.grid_error)}};
        emit("duality_report.json", [&](const auto& p) { write_json(p, report); });
        emit("perturbation.csv",
             [&](const auto& p) { write_text(p, perturbation_grid_to_csv(pgrid)); });
        summary["duality"] = report;
        if (!trace.rows().empty()) summary["trace"] = to_json(trace_summarize(trace));
        break;
      }
    }

    emit("trace.csv", [&](const auto& p) { write_trace_csv(trace, p); });
    emit("summary.json", [&](const auto& p) { write_json(p, summary); });
    outcome.summary = std::move(summary);
    outcome.status = 0;
  } catch (const Error& e) {
    nlohmann::json err;
    err["error"] = e.kind();
    err["message"] = e.what();
    outcome.status = 3;
    if (const auto* d = dynamic_cast<const DivergedError*>(&e)) {
      err["stage"] = d->stage();
      err["iteration"] = d->iteration();
      outcome.status = 2;
    }
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
      nlohmann::json issues = nlohmann::json::array();
      for (const auto& i : v->issues()) issues.push_back({{"key", i.key}, {"message", i.message}});
      err["issues"] = issues;
    }
    write_error(outcome, err);
  } catch (const std::exception& e) {
    outcome.status = 3;
    write_error(outcome, {{"error", "io"}, {"message", e.what()}});
  }
  return outcome;
}

}  // namespace nmt
