#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. Nothing here calls into the code under test except to evaluate
// objective values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nmt/dataset.hpp"
#include "nmt/objectives.hpp"

namespace nmt::testing {

/// Central-difference gradient of `f` at `theta`.
inline std::vector<double> finite_difference(const TaskObjective& f, std::vector<double> theta,
                                             double h = 1e-6) {
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    const double up = f.value(theta);
    theta[i] = keep - h;
    const double down = f.value(theta);
    theta[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Largest |analytic - numeric| / max(1, |analytic|, |numeric|).
inline double gradient_error(const TaskObjective& f, const std::vector<double>& theta) {
  std::vector<double> grad(theta.size());
  f.value_and_gradient(theta, grad);
  const auto fd = finite_difference(f, theta);
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double scale = std::max({1.0, std::abs(grad[i]), std::abs(fd[i])});
    worst = std::max(worst, std::abs(grad[i] - fd[i]) / scale);
  }
  return worst;
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t dim, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> out(dim);
  for (double& v : out) v = u(rng);
  return out;
}

/// Pair-count AUC as the exact fraction (2 wins + ties) / (2 P N).
struct PairCount {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
};

inline PairCount pair_count(const std::vector<double>& scores, const std::vector<double>& labels) {
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      ++pairs;
      if (scores[i] > scores[j]) ++wins;
      if (scores[i] == scores[j]) ++ties;
    }
  }
  return {2 * wins + ties, 2 * pairs};
}

/// The oracle fraction rounded with the library's convention: direct
/// quotient up to 1/2, complement above.
inline double pair_count_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  const PairCount c = pair_count(scores, labels);
  const double d = static_cast<double>(c.denominator);
  if (2 * c.numerator <= c.denominator) return static_cast<double>(c.numerator) / d;
  return 1.0 - static_cast<double>(c.denominator - c.numerator) / d;
}

/// Dense 2-D grid search of min g(x, y) subject to c(x, y) <= 0.
struct GridOptimum {
  double value = std::numeric_limits<double>::infinity();
  double x = 0.0;
  double y = 0.0;
};

inline GridOptimum grid_minimize_2d(const std::function<double(double, double)>& g,
                                    const std::function<double(double, double)>& c, double lo,
                                    double hi, std::size_t n) {
  GridOptimum best;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lo + h * static_cast<double>(i);
      const double y = lo + h * static_cast<double>(j);
      if (c(x, y) > 0.0) continue;
      const double v = g(x, y);
      if (v < best.value) best = {v, x, y};
    }
  }
  return best;
}

/// Small dataset with the given feature rows and label columns.
inline std::shared_ptr<const Dataset> make_data(std::size_t features,
                                                std::vector<double> matrix,
                                                std::vector<std::vector<double>> labels) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < features; ++k) names.push_back("x" + std::to_string(k + 1));
  std::vector<Dataset::LabelColumn> columns;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    columns.push_back({"y" + std::to_string(k + 1), std::move(labels[k])});
  }
  return std::make_shared<const Dataset>(std::move(names), std::move(matrix), std::move(columns));
}

/// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace nmt::testing
