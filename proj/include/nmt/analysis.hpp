#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"
#include "nmt/optimizer.hpp"

namespace nmt {

// Brute-force checks of the relaxed constrained problem
//
//   min f_m(theta)  s.t.  f_i(theta) <= f_i(theta*) + r_i - xi_i,  i < m
//
// on a bounded parameter box. Everything here is exhaustive enumeration, so
// it is limited to problems with at most three parameters.

inline constexpr std::size_t kMaxBruteForceDim = 3;

/// Axis-aligned box sampled at `resolution` per dimension. When `refine` is
/// set, every minimization also scans a 10x finer grid around the incumbent.
struct GridBox {
  std::vector<double> lower;
  std::vector<double> upper;
  double resolution = 1e-2;
  bool refine = true;

  static GridBox uniform(std::size_t dim, double lo = -3.0, double hi = 3.0,
                         double resolution = 1e-2, bool refine = true);
  /// Points per axis.
  std::vector<std::size_t> counts() const;
  std::size_t size() const;
  /// Finest spacing actually searched.
  double effective_resolution() const { return refine ? resolution / 10.0 : resolution; }
};

enum class SlaterStatus { kHolds, kFails, kNotApplicable };
const char* to_string(SlaterStatus status) noexcept;

/// Strict feasibility of theta_star for the relaxed problem. Needs every
/// constraint tolerance r_i (i < m) to be positive, else kNotApplicable.
SlaterStatus check_slater(const PriorityProblem& problem, const ParameterVector& theta_star);

/// Minimum of a brute-force search. `value` is +inf when nothing is feasible.
struct GridMinimum {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  bool feasible() const noexcept { return !argmin.empty(); }
};

/// Every task evaluated once at every grid point, reused across queries.
class BruteForceSolver {
 public:
  /// Throws UnsupportedScaleError above three parameters and ConfigError on
  /// a malformed box or a problem with fewer than two tasks.
  BruteForceSolver(const PriorityProblem& problem, const ParameterVector& theta_star,
                   GridBox box, std::size_t threads = 1);

  std::size_t constraints() const noexcept { return references_.size(); }
  const std::vector<double>& references() const noexcept { return references_; }
  const GridBox& box() const noexcept { return box_; }
  std::vector<double> point(std::size_t index) const;
  double table_value(std::size_t task, std::size_t index) const {
    return table_[task * points_ + index];
  }
  std::size_t points() const noexcept { return points_; }
  const PriorityProblem& problem() const noexcept { return problem_; }
  /// Whether coarse grid point `index` satisfies the constraints perturbed by xi.
  bool feasible_at(std::size_t index, std::span<const double> xi) const;

  /// P(xi) with its grid argmin. Ties go to the first point in
  /// lexicographic grid order.
  GridMinimum perturbed_min(std::span<const double> xi) const;
  /// min over theta of f_m + sum_i lambda_i (f_i - f_i(theta*) - r_i).
  /// `extra` points are scored as well.
  GridMinimum lagrangian_min(std::span<const double> lambdas,
                             std::span<const std::vector<double>> extra = {}) const;

  /// Constraint slack allowed for floating-point round-off.
  static constexpr double kFeasibilityTol = 1e-9;

 private:
  bool feasible(std::span<const double> values, std::span<const double> xi) const;
  template <typename Score>
  GridMinimum search(Score&& score) const;

  PriorityProblem problem_;
  GridBox box_;
  std::vector<double> references_;
  std::vector<double> tolerances_;
  std::vector<std::size_t> counts_;
  std::size_t points_ = 0;
  std::vector<double> table_;   // task-major
};

/// P(xi) for one perturbation vector (builds a fresh table).
double perturbation_function(const PriorityProblem& problem, const ParameterVector& theta_star,
                             std::span<const double> xi, const GridBox& box);

/// P evaluated on the product lattice of per-constraint xi values.
struct PerturbationGrid {
  std::vector<std::vector<double>> xi_values;     // one xi vector per lattice point
  std::vector<std::vector<std::size_t>> lattice;   // per-axis index of each xi
  std::vector<double> p_values;                    // +inf when infeasible
  std::vector<std::vector<double>> argmins;        // empty when infeasible
  GridBox theta_grid;
  /// max |theta*(xi_a) - theta*(xi_b)| over lattice neighbours.
  double epsilon_estimate = 0.0;
  /// Max finite-difference slope of any task over sampled feasible pairs.
  double lipschitz_estimate = 0.0;
  /// Discretization bound: objective gradient bound times the searched
  /// spacing times sqrt(dim).
  double grid_error = 0.0;
};

PerturbationGrid compute_perturbation_grid(const BruteForceSolver& solver,
                                           const std::vector<std::vector<double>>& xi_axes,
                                           std::uint64_t seed = 0);

struct MidpointViolation {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t mid = 0;
  double magnitude = 0.0;   // P(mid) - (P(a) + P(b)) / 2
};

struct ConvexityReport {
  std::size_t pairs_checked = 0;
  double tolerance = 0.0;
  double max_violation = 0.0;   // max(0, magnitude) over checked pairs
  std::vector<MidpointViolation> violations;
};

/// Checks P(mid) <= (P(a) + P(b)) / 2 + tolerance for every pair with finite
/// values whose midpoint is itself on the grid.
ConvexityReport check_midpoint_convexity(const PerturbationGrid& grid, double tolerance);

/// Number of lattice neighbours (along one axis, xi increasing) where P
/// decreases by more than `tolerance`.
std::size_t count_monotonicity_violations(const PerturbationGrid& grid, double tolerance);

/// {0} followed by `points - 1` geometrically spaced values from `lo` to `hi`.
std::vector<double> default_lambda_axis(std::size_t points = 25, double lo = 0.01,
                                        double hi = 100.0);

struct DualityReport {
  double primal_value = 0.0;
  std::vector<double> primal_argmin;
  double dual_value = 0.0;
  std::vector<double> best_lambdas;
  double gap = 0.0;
  SlaterStatus slater = SlaterStatus::kNotApplicable;
  double epsilon_estimate = 0.0;
  double lipschitz_estimate = 0.0;
  double grid_error = 0.0;
  std::size_t grid_points = 0;
};

/// Primal: brute-force constrained minimum. Dual: max over the product of
/// `lambda_axes` of the grid-minimized Lagrangian. Requires r_i > 0.
DualityReport duality_gap(const BruteForceSolver& solver,
                          const std::vector<std::vector<double>>& lambda_axes);
DualityReport duality_gap(const PriorityProblem& problem, const ParameterVector& theta_star,
                          const GridBox& box,
                          const std::vector<std::vector<double>>& lambda_axes);

nlohmann::json to_json(const DualityReport& report);
nlohmann::json to_json(const ConvexityReport& report);
std::string perturbation_grid_to_csv(const PerturbationGrid& grid);

}  // namespace nmt
