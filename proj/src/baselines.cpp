#include "nmt/baselines.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "nmt/errors.hpp"
#include "nmt/format.hpp"

namespace nmt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class WeightedSumObjective final : public TaskObjective {
 public:
  WeightedSumObjective(std::vector<ObjectivePtr> tasks, std::vector<double> alphas)
      : TaskObjective("weighted-sum"), tasks_(std::move(tasks)), alphas_(std::move(alphas)) {
    examples_ = tasks_.front()->examples();
    for (const auto& t : tasks_) {
      if (t->examples() != examples_) examples_ = 0;
    }
    scratch_dim_ = tasks_.front()->dim();
  }

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kWeightedSum; }
  std::size_t dim() const noexcept override { return scratch_dim_; }
  std::size_t examples() const noexcept override { return examples_; }

  double value(std::span<const double> theta, Batch batch) const override {
    double acc = 0.0;
    for (std::size_t i = 0; i < tasks_.size(); ++i) acc += alphas_[i] * tasks_[i]->value(theta, batch);
    return acc;
  }

  double value_and_gradient(std::span<const double> theta, std::span<double> grad,
                            Batch batch) const override {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> member(grad.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      acc += alphas_[i] * tasks_[i]->value_and_gradient(theta, member, batch);
      for (std::size_t d = 0; d < grad.size(); ++d) grad[d] += alphas_[i] * member[d];
    }
    return acc;
  }

 private:
  std::vector<ObjectivePtr> tasks_;
  std::vector<double> alphas_;
  std::size_t examples_ = 0;
  std::size_t scratch_dim_ = 0;
};

void check_weight(double w) {
  if (!(w > 0.0 && w <= 1.0)) {
    throw ConfigError("grid weights must lie in (0, 1], got " + format_double(w));
  }
}

}  // namespace

ObjectivePtr weighted_sum_objective(const std::vector<ObjectivePtr>& tasks,
                                    const std::vector<double>& alphas) {
  if (tasks.empty()) throw ConfigError("weighted sum needs at least one task");
  if (tasks.size() != alphas.size()) {
    throw ConfigError("weighted sum: " + std::to_string(tasks.size()) + " tasks but " +
                      std::to_string(alphas.size()) + " weights");
  }
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("weighted sum: alphas must be > 0");
  }
  for (const auto& t : tasks) {
    if (!t || t->dim() != tasks.front()->dim()) {
      throw ConfigError("weighted sum: member dimensions differ");
    }
  }
  return std::make_shared<WeightedSumObjective>(tasks, alphas);
}

WeightGrid WeightGrid::default_two_task() {
  return {{{0.5, 0.6, 0.7, 0.8, 0.9}}, WeightNormalization::kSimplex};
}

std::vector<std::vector<double>> WeightGrid::combinations(std::size_t num_tasks) const {
  const bool simplex = normalization == WeightNormalization::kSimplex;
  const std::size_t lists = simplex ? num_tasks - 1 : num_tasks;
  if (num_tasks < 1 || (simplex && num_tasks < 2)) {
    throw ConfigError("weight grid needs at least two tasks in simplex mode");
  }
  if (weights_per_task.size() != lists) {
    throw ConfigError("weight grid has " + std::to_string(weights_per_task.size()) +
                      " lists, expected " + std::to_string(lists));
  }
  for (const auto& list : weights_per_task) {
    if (list.empty()) throw ConfigError("weight grid has an empty list");
    for (double w : list) check_weight(w);
  }

  std::vector<std::vector<double>> out;
  std::vector<std::size_t> index(lists, 0);
  while (true) {
    std::vector<double> w(num_tasks);
    double used = 0.0;
    for (std::size_t i = 0; i < lists; ++i) {
      w[i] = weights_per_task[i][index[i]];
      used += w[i];
    }
    if (simplex) {
      w.back() = 1.0 - used;
      if (!(w.back() > 1e-12)) {
        throw ConfigError("simplex grid point leaves no weight for the last task");
      }
    }
    out.push_back(std::move(w));
    // Odometer increment, last list fastest.
    std::size_t pos = lists;
    while (pos > 0) {
      --pos;
      if (++index[pos] < weights_per_task[pos].size()) break;
      index[pos] = 0;
      if (pos == 0) return out;
    }
    if (lists == 0) return out;
  }
}

std::vector<FrontierPoint> grid_search(const PriorityProblem& problem, const WeightGrid& grid,
                                       const OptimizerConfig& config,
                                       const ParameterVector& theta0, std::size_t threads) {
  problem.validate();
  config.validate();
  const auto combos = grid.combinations(problem.size());
  std::vector<FrontierPoint> points(combos.size());

  auto run_one = [&](std::size_t idx) {
    FrontierPoint& p = points[idx];
    p.weights = combos[idx];
    const std::size_t m = problem.size();
    try {
      auto objective = weighted_sum_objective(problem.tasks, p.weights);
      StageResult r = optimize_primary(objective, theta0, config);
      p.theta_final = r.theta_star;
      p.iterations = r.iterations_used;
      p.converged = r.converged;
      for (const auto& task : problem.tasks) {
        p.final_losses.push_back(task->value(r.theta_star.values()));
        p.final_metrics.push_back(task->metric(r.theta_star.values()).value_or(kNaN));
      }
    } catch (const DivergedError& e) {
      p.diverged = true;
      p.theta_final = theta0;
      p.iterations = e.iteration();
      p.final_losses.assign(m, kNaN);
      p.final_metrics.assign(m, kNaN);
    }
  };

  threads = std::max<std::size_t>(1, std::min(threads, combos.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < combos.size(); ++i) run_one(i);
    return points;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < combos.size(); i = next++) {
          try {
            run_one(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

std::string frontier_to_csv(const std::vector<FrontierPoint>& points, std::size_t num_tasks,
                            const std::vector<std::string>& methods) {
  std::string out = "method";
  for (std::size_t k = 1; k <= num_tasks; ++k) out += ",w_" + std::to_string(k);
  for (std::size_t k = 1; k <= num_tasks; ++k) out += ",loss_" + std::to_string(k);
  for (std::size_t k = 1; k <= num_tasks; ++k) out += ",metric_" + std::to_string(k);
  out += ",diverged\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out += i < methods.size() ? methods[i] : std::string("grid");
    for (std::size_t k = 0; k < num_tasks; ++k) {
      out += ',';
      if (k < p.weights.size()) out += format_double(p.weights[k]);
    }
    for (std::size_t k = 0; k < num_tasks; ++k) out += ',' + format_double(p.final_losses.at(k));
    for (std::size_t k = 0; k < num_tasks; ++k) out += ',' + format_double(p.final_metrics.at(k));
    out += p.diverged ? ",1\n" : ",0\n";
  }
  return out;
}

void write_frontier_csv(const std::vector<FrontierPoint>& points, std::size_t num_tasks,
                        const std::filesystem::path& path,
                        const std::vector<std::string>& methods) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << frontier_to_csv(points, num_tasks, methods);
}

}  // namespace nmt
