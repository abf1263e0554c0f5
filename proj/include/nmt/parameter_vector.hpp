#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nmt {

/// Dense vector of trainable parameters. Every entry is finite and the
/// dimension never changes after construction.
class ParameterVector {
 public:
  ParameterVector() = default;
  /// Throws ConfigError if any entry is NaN or infinite.
  explicit ParameterVector(std::vector<double> values);
  ParameterVector(std::initializer_list<double> values);

  static ParameterVector zeros(std::size_t dim);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& to_vector() const noexcept { return values_; }

  /// Bitwise equality of every entry.
  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> values_;
};

bool all_finite(std::span<const double> values) noexcept;
double l2_norm(std::span<const double> values) noexcept;
double l2_distance(std::span<const double> a, std::span<const double> b);

}  // namespace nmt
