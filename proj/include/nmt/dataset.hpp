#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nmt {

/// Row-major feature matrix plus one or more per-task label columns.
/// Immutable once built; objectives hold it through shared_ptr<const Dataset>.
class Dataset {
 public:
  struct LabelColumn {
    std::string name;
    std::vector<double> values;
    friend bool operator==(const LabelColumn&, const LabelColumn&) = default;
  };

  /// Throws ConfigError when the label columns and the feature matrix
  /// disagree on the number of rows.
  Dataset(std::vector<std::string> feature_names, std::vector<double> features,
          std::vector<LabelColumn> labels, std::uint64_t seed = 0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t features() const noexcept { return feature_names_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * features(), features()};
  }
  const std::vector<double>& feature_matrix() const noexcept { return features_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }
  const std::vector<LabelColumn>& label_columns() const noexcept { return labels_; }

  /// Index of the label column called `name`; throws ConfigError if absent.
  std::size_t label_index(const std::string& name) const;
  const std::vector<double>& labels(const std::string& name) const {
    return labels_[label_index(name)].values;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> feature_names_;
  std::vector<double> features_;
  std::vector<LabelColumn> labels_;
  std::size_t rows_ = 0;
  std::uint64_t seed_ = 0;
};

/// Knobs for the synthetic multi-task generator.
///
/// Features are i.i.d. standard normal. Task 1 labels come from a latent
/// linear score `x . w_1 + noise * e` thresholded at zero. Every other task
/// draws its own score along a direction orthogonal to `w_1`; with
/// probability `correlation` an example copies task 1's label instead. So
/// `correlation = 1` gives identical columns and `correlation = 0` gives
/// columns that agree on about half of the examples.
struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t n_examples = 200;
  std::size_t n_features = 2;
  std::size_t n_tasks = 2;
  double correlation = 0.0;
  double noise = 0.1;

  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

/// Throws ConfigError on n_examples < 2, n_features < 1, n_tasks < 1,
/// correlation outside [0, 1] or negative noise.
Dataset generate_synthetic(const SyntheticConfig& config);

/// Fraction of rows on which two label columns are equal.
double label_agreement(const Dataset& data, const std::string& a,
                       const std::string& b);

/// CSV with a header row: feature names then label column names.
void write_csv(const Dataset& data, const std::filesystem::path& path);
std::string to_csv(const Dataset& data);
/// The last `label_columns` columns are read as labels.
Dataset read_csv(const std::filesystem::path& path, std::size_t label_columns);

}  // namespace nmt
