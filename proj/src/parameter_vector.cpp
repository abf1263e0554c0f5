#include "nmt/parameter_vector.hpp"

#include <cmath>

#include "nmt/errors.hpp"

namespace nmt {

ParameterVector::ParameterVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (!all_finite(values_)) {
    throw ConfigError("parameter vector contains a non-finite entry");
  }
}

ParameterVector::ParameterVector(std::initializer_list<double> values)
    : ParameterVector(std::vector<double>(values)) {}

ParameterVector ParameterVector::zeros(std::size_t dim) {
  return ParameterVector(std::vector<double>(dim, 0.0));
}

bool all_finite(std::span<const double> values) noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double l2_norm(std::span<const double> values) noexcept {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("l2_distance: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace nmt
