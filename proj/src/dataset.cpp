#include "nmt/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nmt/errors.hpp"
#include "nmt/format.hpp"

namespace nmt {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

Dataset::Dataset(std::vector<std::string> feature_names,
                 std::vector<double> features, std::vector<LabelColumn> labels,
                 std::uint64_t seed)
    : feature_names_(std::move(feature_names)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      seed_(seed) {
  if (feature_names_.empty()) {
    throw ConfigError("dataset needs at least one feature column");
  }
  if (features_.size() % feature_names_.size() != 0) {
    throw ConfigError("feature matrix size is not a multiple of the column count");
  }
  rows_ = features_.size() / feature_names_.size();
  for (const auto& column : labels_) {
    if (column.values.size() != rows_) {
      throw ConfigError("label column '" + column.name + "' has " +
                        std::to_string(column.values.size()) + " rows, expected " +
                        std::to_string(rows_));
    }
  }
}

std::size_t Dataset::label_index(const std::string& name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name == name) return i;
  }
  throw ConfigError("unknown label column '" + name + "'");
}

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(dim);
  double norm = 0.0;
  while (norm < 1e-8) {
    norm = 0.0;
    for (auto& v : w) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
  }
  for (auto& v : w) v /= norm;
  return w;
}

// Removes the component of `w` along unit vector `base`, then renormalizes.
// Returns false when nothing is left (dim 1 or a degenerate draw).
bool orthogonalize(std::vector<double>& w, const std::vector<double>& base) {
  double dot = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) dot += w[i] * base[i];
  double norm = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] -= dot * base[i];
    norm += w[i] * w[i];
  }
  norm = std::sqrt(norm);
  if (norm < 1e-8) return false;
  for (auto& v : w) v /= norm;
  return true;
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.n_examples < 2) throw ConfigError("n_examples must be >= 2");
  if (config.n_features < 1) throw ConfigError("n_features must be >= 1");
  if (config.n_tasks < 1) throw ConfigError("n_tasks must be >= 1");
  if (!(config.correlation >= 0.0 && config.correlation <= 1.0)) {
    throw ConfigError("correlation must lie in [0, 1]");
  }
  if (!(config.noise >= 0.0)) throw ConfigError("noise must be >= 0");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const std::size_t d = config.n_features;
  std::vector<std::vector<double>> directions;
  std::vector<bool> has_direction;
  directions.push_back(random_unit(rng, d));
  has_direction.push_back(true);
  for (std::size_t t = 1; t < config.n_tasks; ++t) {
    auto w = random_unit(rng, d);
    has_direction.push_back(orthogonalize(w, directions[0]));
    directions.push_back(std::move(w));
  }

  std::vector<double> features(config.n_examples * d);
  std::vector<Dataset::LabelColumn> labels(config.n_tasks);
  for (std::size_t t = 0; t < config.n_tasks; ++t) {
    labels[t].name = "y" + std::to_string(t + 1);
    labels[t].values.resize(config.n_examples);
  }

  for (std::size_t i = 0; i < config.n_examples; ++i) {
    double* x = features.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = normal(rng);
    double first = 0.0;
    for (std::size_t t = 0; t < config.n_tasks; ++t) {
      double score = config.noise * normal(rng);
      if (has_direction[t]) {
        for (std::size_t j = 0; j < d; ++j) score += directions[t][j] * x[j];
      } else {
        score = normal(rng);
      }
      double label = score > 0.0 ? 1.0 : 0.0;
      if (t == 0) {
        first = label;
      } else if (uniform(rng) < config.correlation) {
        label = first;
      }
      labels[t].values[i] = label;
    }
  }

  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = "x" + std::to_string(j + 1);
  return Dataset(std::move(names), std::move(features), std::move(labels),
                 config.seed);
}

double label_agreement(const Dataset& data, const std::string& a,
                       const std::string& b) {
  const auto& la = data.labels(a);
  const auto& lb = data.labels(b);
  std::size_t same = 0;
  for (std::size_t i = 0; i < la.size(); ++i) same += la[i] == lb[i];
  return static_cast<double>(same) / static_cast<double>(la.size());
}

std::string to_csv(const Dataset& data) {
  std::string out;
  bool first = true;
  auto cell = [&](const std::string& s) {
    if (!first) out += ',';
    out += s;
    first = false;
  };
  for (const auto& name : data.feature_names()) cell(name);
  for (const auto& column : data.label_columns()) cell(column.name);
  out += '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    first = true;
    for (double v : data.row(i)) cell(format_double(v));
    for (const auto& column : data.label_columns()) cell(format_double(column.values[i]));
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_csv(data);
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, std::size_t label_columns) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset " + path.string() + " is empty");
  const auto header = split_commas(line);
  if (header.size() <= label_columns) {
    throw ConfigError("dataset header has no feature columns");
  }
  const std::size_t n_features = header.size() - label_columns;

  std::vector<std::string> names(header.begin(), header.begin() + n_features);
  std::vector<Dataset::LabelColumn> labels;
  for (std::size_t k = n_features; k < header.size(); ++k) {
    labels.push_back({header[k], {}});
  }
  std::vector<double> features;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ConfigError("dataset line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells");
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      double v = 0.0;
      const char* b = cells[k].data();
      auto [ptr, ec] = std::from_chars(b, b + cells[k].size(), v);
      if (ec != std::errc() || ptr != b + cells[k].size()) {
        throw ConfigError("dataset line " + std::to_string(line_no) +
                          ": bad number '" + cells[k] + "'");
      }
      if (k < n_features) {
        features.push_back(v);
      } else {
        labels[k - n_features].values.push_back(v);
      }
    }
  }
  return Dataset(std::move(names), std::move(features), std::move(labels));
}

}  // namespace nmt
