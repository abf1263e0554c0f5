#include "nmt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "nmt/errors.hpp"
#include "nmt/format.hpp"

namespace nmt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GridBox GridBox::uniform(std::size_t dim, double lo, double hi, double resolution,
                         bool refine) {
  return {std::vector<double>(dim, lo), std::vector<double>(dim, hi), resolution, refine};
}

std::vector<std::size_t> GridBox::counts() const {
  std::vector<std::size_t> out(lower.size());
  for (std::size_t d = 0; d < lower.size(); ++d) {
    out[d] = static_cast<std::size_t>(std::floor((upper[d] - lower[d]) / resolution + 1e-9)) + 1;
  }
  return out;
}

std::size_t GridBox::size() const {
  std::size_t n = 1;
  for (std::size_t c : counts()) n *= c;
  return n;
}

const char* to_string(SlaterStatus status) noexcept {
  switch (status) {
    case SlaterStatus::kHolds: return "holds";
    case SlaterStatus::kFails: return "fails";
    case SlaterStatus::kNotApplicable: return "not-applicable";
  }
  return "unknown";
}

SlaterStatus check_slater(const PriorityProblem& problem, const ParameterVector& theta_star) {
  problem.validate();
  if (problem.size() < 2) return SlaterStatus::kNotApplicable;
  for (std::size_t i = 0; i + 1 < problem.size(); ++i) {
    if (!(problem.tolerance(i) > 0.0)) return SlaterStatus::kNotApplicable;
  }
  for (std::size_t i = 0; i + 1 < problem.size(); ++i) {
    const double f = problem.tasks[i]->value(theta_star.values());
    if (!std::isfinite(f) || !(f < f + problem.tolerance(i))) return SlaterStatus::kFails;
  }
  return SlaterStatus::kHolds;
}

BruteForceSolver::BruteForceSolver(const PriorityProblem& problem,
                                   const ParameterVector& theta_star, GridBox box,
                                   std::size_t threads)
    : problem_(problem), box_(std::move(box)) {
  problem_.validate();
  const std::size_t dim = problem_.dim();
  if (dim > kMaxBruteForceDim) {
    throw UnsupportedScaleError("brute-force verification supports at most " +
                                std::to_string(kMaxBruteForceDim) + " parameters, problem has " +
                                std::to_string(dim));
  }
  if (problem_.size() < 2) throw ConfigError("constrained analysis needs at least two tasks");
  if (box_.lower.size() != dim || box_.upper.size() != dim) {
    throw ConfigError("grid box dimension does not match the problem");
  }
  if (!(box_.resolution > 0.0)) throw ConfigError("grid resolution must be > 0");
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(box_.upper[d] >= box_.lower[d])) throw ConfigError("grid box has upper < lower");
  }
  if (theta_star.dim() != dim) throw ConfigError("theta_star has the wrong dimension");

  const std::size_t m = problem_.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    references_.push_back(problem_.tasks[i]->value(theta_star.values()));
    tolerances_.push_back(problem_.tolerance(i));
  }
  counts_ = box_.counts();
  points_ = box_.size();
  table_.resize(m * points_);

  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto theta = point(idx);
      for (std::size_t t = 0; t < m; ++t) table_[t * points_ + idx] = problem_.tasks[t]->value(theta);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, points_));
  if (threads == 1) {
    fill(0, points_);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (points_ + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(points_, b + chunk);
      if (b < e) workers.emplace_back(fill, b, e);
    }
  }
}

std::vector<double> BruteForceSolver::point(std::size_t index) const {
  const std::size_t dim = counts_.size();
  std::vector<double> theta(dim);
  for (std::size_t d = dim; d-- > 0;) {
    const std::size_t i = index % counts_[d];
    index /= counts_[d];
    theta[d] = box_.lower[d] + static_cast<double>(i) * box_.resolution;
  }
  return theta;
}

bool BruteForceSolver::feasible(std::span<const double> values,
                                std::span<const double> xi) const {
  for (std::size_t i = 0; i < references_.size(); ++i) {
    if (!(values[i] <= references_[i] + tolerances_[i] - xi[i] + kFeasibilityTol)) return false;
  }
  return true;
}

template <typename Score>
GridMinimum BruteForceSolver::search(Score&& score) const {
  const std::size_t m = problem_.size();
  std::vector<double> values(m);
  GridMinimum best;
  std::size_t best_index = points_;
  for (std::size_t idx = 0; idx < points_; ++idx) {
    for (std::size_t t = 0; t < m; ++t) values[t] = table_[t * points_ + idx];
    const double s = score(std::span<const double>(values));
    if (s < best.value) {
      best.value = s;
      best_index = idx;
    }
  }
  if (best_index == points_) return best;
  best.argmin = point(best_index);
  if (!box_.refine) return best;

  // 10x finer scan of the cell neighbourhood around the incumbent.
  const std::size_t dim = counts_.size();
  const double fine = box_.resolution / 10.0;
  const auto center = best.argmin;
  std::vector<std::size_t> steps(dim);
  std::vector<double> start(dim);
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    start[d] = std::max(box_.lower[d], center[d] - box_.resolution);
    const double stop = std::min(box_.upper[d], center[d] + box_.resolution);
    steps[d] = static_cast<std::size_t>(std::floor((stop - start[d]) / fine + 1e-9)) + 1;
    total *= steps[d];
  }
  std::vector<double> theta(dim);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t d = dim; d-- > 0;) {
      theta[d] = start[d] + static_cast<double>(rest % steps[d]) * fine;
      rest /= steps[d];
    }
    for (std::size_t t = 0; t < m; ++t) values[t] = problem_.tasks[t]->value(theta);
    const double s = score(std::span<const double>(values));
    if (s < best.value) {
      best.value = s;
      best.argmin = theta;
    }
  }
  return best;
}

GridMinimum BruteForceSolver::perturbed_min(std::span<const double> xi) const {
  if (xi.size() != references_.size()) {
    throw ContractViolation("perturbation vector needs one entry per constraint");
  }
  const std::size_t last = problem_.size() - 1;
  return search([&](std::span<const double> v) {
    return feasible(v, xi) ? v[last] : kInf;
  });
}

GridMinimum BruteForceSolver::lagrangian_min(std::span<const double> lambdas,
                                             std::span<const std::vector<double>> extra) const {
  if (lambdas.size() != references_.size()) {
    throw ContractViolation("lagrangian needs one multiplier per constraint");
  }
  const std::size_t last = problem_.size() - 1;
  auto score = [&](std::span<const double> v) {
    double l = v[last];
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      l += lambdas[i] * (v[i] - references_[i] - tolerances_[i]);
    }
    return l;
  };
  GridMinimum best = search(score);
  std::vector<double> values(problem_.size());
  for (const auto& theta : extra) {
    for (std::size_t t = 0; t < values.size(); ++t) values[t] = problem_.tasks[t]->value(theta);
    const double s = score(values);
    if (s < best.value) {
      best.value = s;
      best.argmin = theta;
    }
  }
  return best;
}

double perturbation_function(const PriorityProblem& problem, const ParameterVector& theta_star,
                             std::span<const double> xi, const GridBox& box) {
  return BruteForceSolver(problem, theta_star, box).perturbed_min(xi).value;
}

namespace {

// Product lattice over per-axis values, first axis slowest.
void enumerate_lattice(const std::vector<std::vector<double>>& axes,
                       std::vector<std::vector<double>>& values,
                       std::vector<std::vector<std::size_t>>& lattice) {
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.empty()) throw ConfigError("lattice axis is empty");
    total *= a.size();
  }
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<std::size_t> coord(axes.size());
    std::vector<double> v(axes.size());
    std::size_t rest = idx;
    for (std::size_t d = axes.size(); d-- > 0;) {
      coord[d] = rest % axes[d].size();
      rest /= axes[d].size();
      v[d] = axes[d][coord[d]];
    }
    values.push_back(std::move(v));
    lattice.push_back(std::move(coord));
  }
}

double max_slope(const PriorityProblem& problem, std::span<const double> a,
                 std::span<const double> b) {
  const double dist = l2_distance(a, b);
  if (dist <= 0.0) return 0.0;
  double best = 0.0;
  for (const auto& task : problem.tasks) {
    best = std::max(best, std::abs(task->value(a) - task->value(b)) / dist);
  }
  return best;
}

}  // namespace

PerturbationGrid compute_perturbation_grid(const BruteForceSolver& solver,
                                           const std::vector<std::vector<double>>& xi_axes,
                                           std::uint64_t seed) {
  if (xi_axes.size() != solver.constraints()) {
    throw ConfigError("need one xi axis per constraint");
  }
  PerturbationGrid grid;
  grid.theta_grid = solver.box();
  enumerate_lattice(xi_axes, grid.xi_values, grid.lattice);
  for (const auto& xi : grid.xi_values) {
    auto best = solver.perturbed_min(xi);
    grid.p_values.push_back(best.value);
    grid.argmins.push_back(std::move(best.argmin));
  }

  // Adjacent lattice points: differ by one step along exactly one axis.
  for (std::size_t a = 0; a < grid.lattice.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.lattice.size(); ++b) {
      std::size_t steps = 0;
      for (std::size_t d = 0; d < xi_axes.size(); ++d) {
        const auto ia = grid.lattice[a][d], ib = grid.lattice[b][d];
        steps += ia > ib ? ia - ib : ib - ia;
      }
      if (steps != 1 || grid.argmins[a].empty() || grid.argmins[b].empty()) continue;
      grid.epsilon_estimate =
          std::max(grid.epsilon_estimate, l2_distance(grid.argmins[a], grid.argmins[b]));
    }
  }

  // Lipschitz estimate: sampled pairs of the unperturbed feasible set plus
  // every pair of perturbed optima.
  const auto& problem = solver.problem();
  const std::size_t m = problem.size();
  auto table_slope = [&](std::size_t a, std::size_t b) {
    const double dist = l2_distance(solver.point(a), solver.point(b));
    if (dist <= 0.0) return 0.0;
    double best = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      best = std::max(best, std::abs(solver.table_value(t, a) - solver.table_value(t, b)) / dist);
    }
    return best;
  };
  const std::vector<double> zero_xi(solver.constraints(), 0.0);
  std::vector<std::size_t> feasible;
  for (std::size_t idx = 0; idx < solver.points(); ++idx) {
    if (solver.feasible_at(idx, zero_xi)) feasible.push_back(idx);
  }
  std::mt19937_64 rng(seed);
  if (feasible.size() >= 2) {
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    for (int s = 0; s < 2000; ++s) {
      const std::size_t a = feasible[pick(rng)];
      const std::size_t b = feasible[pick(rng)];
      grid.lipschitz_estimate = std::max(grid.lipschitz_estimate, table_slope(a, b));
    }
  }
  double gradient_bound = 0.0;
  for (std::size_t a = 0; a < grid.argmins.size(); ++a) {
    if (grid.argmins[a].empty()) continue;
    for (const auto& task : problem.tasks) {
      gradient_bound = std::max(gradient_bound, l2_norm(task->gradient(grid.argmins[a])));
    }
    for (std::size_t b = a + 1; b < grid.argmins.size(); ++b) {
      if (grid.argmins[b].empty()) continue;
      grid.lipschitz_estimate =
          std::max(grid.lipschitz_estimate, max_slope(problem, grid.argmins[a], grid.argmins[b]));
    }
  }
  grid.grid_error = gradient_bound * solver.box().effective_resolution() *
                    std::sqrt(static_cast<double>(problem.dim()));
  return grid;
}

ConvexityReport check_midpoint_convexity(const PerturbationGrid& grid, double tolerance) {
  ConvexityReport report;
  report.tolerance = tolerance;
  const std::size_t n = grid.xi_values.size();
  auto find = [&](const std::vector<double>& target) -> std::size_t {
    for (std::size_t k = 0; k < n; ++k) {
      bool same = true;
      for (std::size_t d = 0; d < target.size() && same; ++d) {
        same = std::abs(grid.xi_values[k][d] - target[d]) <=
               1e-9 * std::max(1.0, std::abs(target[d]));
      }
      if (same) return k;
    }
    return n;
  };
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      if (!std::isfinite(grid.p_values[a]) || !std::isfinite(grid.p_values[b])) continue;
      std::vector<double> mid(grid.xi_values[a].size());
      for (std::size_t d = 0; d < mid.size(); ++d) {
        mid[d] = 0.5 * (grid.xi_values[a][d] + grid.xi_values[b][d]);
      }
      const std::size_t k = a == b ? a : find(mid);
      if (k == n) continue;
      ++report.pairs_checked;
      const double magnitude = grid.p_values[k] - 0.5 * (grid.p_values[a] + grid.p_values[b]);
      report.max_violation = std::max(report.max_violation, std::max(0.0, magnitude));
      if (magnitude > tolerance) report.violations.push_back({a, b, k, magnitude});
    }
  }
  return report;
}

std::size_t count_monotonicity_violations(const PerturbationGrid& grid, double tolerance) {
  std::size_t count = 0;
  const std::size_t n = grid.lattice.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // b is a's successor along exactly one axis.
      std::size_t axis = grid.lattice[a].size();
      bool neighbour = true;
      for (std::size_t d = 0; d < grid.lattice[a].size() && neighbour; ++d) {
        if (grid.lattice[b][d] == grid.lattice[a][d] + 1 && axis == grid.lattice[a].size()) {
          axis = d;
        } else if (grid.lattice[b][d] != grid.lattice[a][d]) {
          neighbour = false;
        }
      }
      if (!neighbour || axis == grid.lattice[a].size()) continue;
      const bool increasing = grid.xi_values[b][axis] > grid.xi_values[a][axis];
      const std::size_t lo = increasing ? a : b;
      const std::size_t hi = increasing ? b : a;
      // +inf is fine at the tight end; a finite value there with +inf at the
      // loose end is a violation.
      if (grid.p_values[hi] < grid.p_values[lo] - tolerance) ++count;
    }
  }
  return count;
}

std::vector<double> default_lambda_axis(std::size_t points, double lo, double hi) {
  std::vector<double> axis{0.0};
  if (points < 2) return axis;
  const double ratio = points > 2 ? std::log(hi / lo) / static_cast<double>(points - 2) : 0.0;
  for (std::size_t k = 0; k + 1 < points; ++k) {
    axis.push_back(lo * std::exp(ratio * static_cast<double>(k)));
  }
  axis.back() = points > 2 ? hi : lo;
  return axis;
}

DualityReport duality_gap(const BruteForceSolver& solver,
                          const std::vector<std::vector<double>>& lambda_axes) {
  const auto& problem = solver.problem();
  for (std::size_t i = 0; i + 1 < problem.size(); ++i) {
    if (!(problem.tolerance(i) > 0.0)) {
      throw ConfigError("duality check needs every constraint tolerance r_i > 0");
    }
  }
  if (lambda_axes.size() != solver.constraints()) {
    throw ConfigError("need one lambda axis per constraint");
  }
  for (const auto& axis : lambda_axes) {
    for (double l : axis) {
      if (!(l >= 0.0)) throw ConfigError("lambda grid values must be >= 0");
    }
  }

  DualityReport report;
  report.grid_points = solver.points();
  const std::vector<double> zero_xi(solver.constraints(), 0.0);
  const GridMinimum primal = solver.perturbed_min(zero_xi);
  report.primal_value = primal.value;
  report.primal_argmin = primal.argmin;

  std::vector<std::vector<double>> lambdas;
  std::vector<std::vector<std::size_t>> unused;
  enumerate_lattice(lambda_axes, lambdas, unused);
  std::vector<std::vector<double>> extra;
  if (primal.feasible()) extra.push_back(primal.argmin);
  report.dual_value = -kInf;
  for (const auto& l : lambdas) {
    const double value = solver.lagrangian_min(l, extra).value;
    if (value > report.dual_value) {
      report.dual_value = value;
      report.best_lambdas = l;
    }
  }
  report.gap = report.primal_value - report.dual_value;

  // Stability of the optimum under small perturbations xi in [-r/2, r/2].
  std::vector<std::vector<double>> xi_axes;
  for (std::size_t i = 0; i < solver.constraints(); ++i) {
    const double r = problem.tolerance(i);
    xi_axes.push_back({-0.5 * r, -0.25 * r, 0.0, 0.25 * r, 0.5 * r});
  }
  const PerturbationGrid grid = compute_perturbation_grid(solver, xi_axes);
  report.epsilon_estimate = grid.epsilon_estimate;
  report.lipschitz_estimate = grid.lipschitz_estimate;
  report.grid_error = grid.grid_error;

  // All r_i > 0 was checked above; the references themselves must be finite.
  report.slater = SlaterStatus::kHolds;
  for (double ref : solver.references()) {
    if (!std::isfinite(ref)) report.slater = SlaterStatus::kFails;
  }
  return report;
}

DualityReport duality_gap(const PriorityProblem& problem, const ParameterVector& theta_star,
                          const GridBox& box,
                          const std::vector<std::vector<double>>& lambda_axes) {
  BruteForceSolver solver(problem, theta_star, box);
  DualityReport report = duality_gap(solver, lambda_axes);
  report.slater = check_slater(problem, theta_star);
  return report;
}

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json to_json(const DualityReport& report) {
  return {{"primal_value", number_or_null(report.primal_value)},
          {"primal_argmin", report.primal_argmin},
          {"dual_value", number_or_null(report.dual_value)},
          {"best_lambdas", report.best_lambdas},
          {"gap", number_or_null(report.gap)},
          {"slater", to_string(report.slater)},
          {"epsilon_estimate", report.epsilon_estimate},
          {"lipschitz_estimate", report.lipschitz_estimate},
          {"grid_error", report.grid_error},
          {"grid_points", report.grid_points}};
}

nlohmann::json to_json(const ConvexityReport& report) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"a", v.a}, {"b", v.b}, {"mid", v.mid}, {"magnitude", v.magnitude}});
  }
  return {{"pairs_checked", report.pairs_checked},
          {"tolerance", report.tolerance},
          {"max_violation", report.max_violation},
          {"violation_count", report.violations.size()},
          {"violations", violations}};
}

std::string perturbation_grid_to_csv(const PerturbationGrid& grid) {
  const std::size_t k = grid.xi_values.empty() ? 0 : grid.xi_values.front().size();
  std::string out;
  for (std::size_t i = 1; i <= k; ++i) out += "xi_" + std::to_string(i) + ',';
  out += "P\n";
  for (std::size_t r = 0; r < grid.xi_values.size(); ++r) {
    for (double x : grid.xi_values[r]) out += format_double(x) + ',';
    out += format_double(grid.p_values[r]) + '\n';
  }
  return out;
}

bool BruteForceSolver::feasible_at(std::size_t index, std::span<const double> xi) const {
  for (std::size_t i = 0; i < references_.size(); ++i) {
    if (!(table_[i * points_ + index] <=
          references_[i] + tolerances_[i] - xi[i] + kFeasibilityTol)) {
      return false;
    }
  }
  return true;
}

}  // namespace nmt
