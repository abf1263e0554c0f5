#include "nmt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nmt/errors.hpp"
#include "nmt/metrics.hpp"

namespace nmt {

const char* to_string(ObjectiveKind kind) noexcept {
  switch (kind) {
    case ObjectiveKind::kQuadratic: return "quadratic";
    case ObjectiveKind::kLogistic: return "logistic";
    case ObjectiveKind::kPairwiseRanking: return "pairwise-ranking";
    case ObjectiveKind::kSharedTrunkHead: return "shared-trunk-head";
    case ObjectiveKind::kWeightedSum: return "weighted-sum";
  }
  return "unknown";
}

std::vector<double> TaskObjective::gradient(std::span<const double> theta) const {
  std::vector<double> grad(dim());
  value_and_gradient(theta, grad);
  return grad;
}

double neg_log_sigmoid(double x) noexcept {
  if (x > 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_theta(const TaskObjective& f, std::span<const double> theta) {
  if (theta.size() != f.dim()) {
    throw ContractViolation("objective '" + f.id() + "' expects dimension " +
                            std::to_string(f.dim()) + ", got " +
                            std::to_string(theta.size()));
  }
}

// Calls fn(i) for every example index of the batch (all of [0, n) if empty).
template <typename Fn>
void for_each_example(std::size_t n, Batch batch, Fn&& fn) {
  if (batch.empty()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  } else {
    for (std::size_t i : batch) fn(i);
  }
}

std::size_t batch_count(std::size_t n, Batch batch) {
  return batch.empty() ? n : batch.size();
}

std::optional<double> safe_auc(std::span<const double> scores,
                               std::span<const double> labels) {
  try {
    return auc(scores, labels);
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

class QuadraticObjective final : public TaskObjective {
 public:
  QuadraticObjective(QuadraticSpec spec, std::string id)
      : TaskObjective(std::move(id)), spec_(std::move(spec)) {}

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kQuadratic; }
  std::size_t dim() const noexcept override { return spec_.center.size(); }

  double value(std::span<const double> theta, Batch) const override {
    check_theta(*this, theta);
    double acc = 0.0;
    for (std::size_t d = 0; d < theta.size(); ++d) {
      const double diff = theta[d] - spec_.center[d];
      acc += spec_.scale[d] * diff * diff;
    }
    return acc;
  }

  double value_and_gradient(std::span<const double> theta, std::span<double> grad,
                            Batch) const override {
    check_theta(*this, theta);
    double acc = 0.0;
    for (std::size_t d = 0; d < theta.size(); ++d) {
      const double diff = theta[d] - spec_.center[d];
      acc += spec_.scale[d] * diff * diff;
      grad[d] = 2.0 * spec_.scale[d] * diff;
    }
    return acc;
  }

 private:
  QuadraticSpec spec_;
};

// Shared plumbing for the two linear scorers.
class LinearScorer : public TaskObjective {
 public:
  LinearScorer(std::string id, std::shared_ptr<const Dataset> data,
               std::size_t own_params, LinearLayout layout)
      : TaskObjective(std::move(id)), data_(std::move(data)), offset_(layout.offset) {
    total_dim_ = layout.total_dim == 0 ? layout.offset + own_params : layout.total_dim;
    if (offset_ + own_params > total_dim_) {
      throw ConfigError("objective '" + this->id() + "' does not fit in dimension " +
                        std::to_string(total_dim_));
    }
  }

  std::size_t dim() const noexcept override { return total_dim_; }

 protected:
  double score(std::span<const double> theta, std::size_t row, bool with_bias) const {
    const auto x = data_->row(row);
    double z = with_bias ? theta[offset_ + x.size()] : 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) z += theta[offset_ + j] * x[j];
    return z;
  }

  std::shared_ptr<const Dataset> data_;
  std::size_t offset_;
  std::size_t total_dim_ = 0;
};

class LogisticObjective final : public LinearScorer {
 public:
  LogisticObjective(std::shared_ptr<const Dataset> data, std::size_t column,
                    double l2, std::string id, LinearLayout layout)
      : LinearScorer(std::move(id), data, data->features() + 1, layout),
        labels_(&data->label_columns()[column].values),
        l2_(l2) {}

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kLogistic; }
  std::size_t examples() const noexcept override { return data_->rows(); }

  double value(std::span<const double> theta, Batch batch) const override {
    check_theta(*this, theta);
    double acc = 0.0;
    for_each_example(data_->rows(), batch, [&](std::size_t i) {
      const double z = score(theta, i, true);
      acc += neg_log_sigmoid(-z) - (*labels_)[i] * z;
    });
    return acc / static_cast<double>(batch_count(data_->rows(), batch)) + penalty(theta);
  }

  double value_and_gradient(std::span<const double> theta, std::span<double> grad,
                            Batch batch) const override {
    check_theta(*this, theta);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t nf = data_->features();
    double acc = 0.0;
    for_each_example(data_->rows(), batch, [&](std::size_t i) {
      const double z = score(theta, i, true);
      const double y = (*labels_)[i];
      acc += neg_log_sigmoid(-z) - y * z;
      const double dz = sigmoid(z) - y;
      const auto x = data_->row(i);
      for (std::size_t j = 0; j < nf; ++j) grad[offset_ + j] += dz * x[j];
      grad[offset_ + nf] += dz;
    });
    const double inv_n = 1.0 / static_cast<double>(batch_count(data_->rows(), batch));
    for (std::size_t j = 0; j <= nf; ++j) grad[offset_ + j] *= inv_n;
    for (std::size_t j = 0; j < nf; ++j) grad[offset_ + j] += 2.0 * l2_ * theta[offset_ + j];
    return acc * inv_n + penalty(theta);
  }

  std::optional<double> metric(std::span<const double> theta) const override {
    check_theta(*this, theta);
    std::vector<double> scores(data_->rows());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = score(theta, i, true);
    return safe_auc(scores, *labels_);
  }

 private:
  double penalty(std::span<const double> theta) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < data_->features(); ++j) {
      acc += theta[offset_ + j] * theta[offset_ + j];
    }
    return l2_ * acc;
  }

  const std::vector<double>* labels_;
  double l2_;
};

class PairwiseRankingObjective final : public LinearScorer {
 public:
  PairwiseRankingObjective(std::shared_ptr<const Dataset> data,
                           std::vector<RankPair> pairs, std::size_t column,
                           std::string id, LinearLayout layout)
      : LinearScorer(std::move(id), data, data->features(), layout),
        pairs_(std::move(pairs)),
        labels_(&data->label_columns()[column].values) {}

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kPairwiseRanking; }
  std::size_t examples() const noexcept override { return pairs_.size(); }

  double value(std::span<const double> theta, Batch batch) const override {
    check_theta(*this, theta);
    double acc = 0.0;
    for_each_example(pairs_.size(), batch, [&](std::size_t p) {
      acc += neg_log_sigmoid(margin(theta, pairs_[p]));
    });
    return acc / static_cast<double>(batch_count(pairs_.size(), batch));
  }

  double value_and_gradient(std::span<const double> theta, std::span<double> grad,
                            Batch batch) const override {
    check_theta(*this, theta);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t nf = data_->features();
    double acc = 0.0;
    for_each_example(pairs_.size(), batch, [&](std::size_t p) {
      const double m = margin(theta, pairs_[p]);
      acc += neg_log_sigmoid(m);
      // d/dm [-log sigmoid(m)] = -sigmoid(-m)
      const double dm = -sigmoid(-m);
      const auto xp = data_->row(pairs_[p].positive);
      const auto xn = data_->row(pairs_[p].negative);
      for (std::size_t j = 0; j < nf; ++j) grad[offset_ + j] += dm * (xp[j] - xn[j]);
    });
    const double inv_n = 1.0 / static_cast<double>(batch_count(pairs_.size(), batch));
    for (std::size_t j = 0; j < nf; ++j) grad[offset_ + j] *= inv_n;
    return acc * inv_n;
  }

  std::optional<double> metric(std::span<const double> theta) const override {
    check_theta(*this, theta);
    std::vector<double> scores(data_->rows());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = score(theta, i, false);
    return safe_auc(scores, *labels_);
  }

 private:
  double margin(std::span<const double> theta, const RankPair& pair) const {
    return score(theta, pair.positive, false) - score(theta, pair.negative, false);
  }

  std::vector<RankPair> pairs_;
  const std::vector<double>* labels_;
};

}  // namespace

ObjectivePtr make_quadratic(const QuadraticSpec& spec, std::string id) {
  if (spec.center.empty()) throw ConfigError("quadratic center must be nonempty");
  if (spec.scale.size() != spec.center.size()) {
    throw ConfigError("quadratic scale and center differ in length");
  }
  if (!all_finite(spec.center)) throw ConfigError("quadratic center must be finite");
  for (double s : spec.scale) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ConfigError("quadratic scale entries must be positive and finite");
    }
  }
  return std::make_shared<QuadraticObjective>(spec, std::move(id));
}

ObjectivePtr make_logistic(std::shared_ptr<const Dataset> data,
                           const std::string& task_column, double l2,
                           std::string id, LinearLayout layout) {
  if (!data || data->rows() == 0) throw ConfigError("logistic objective needs a nonempty dataset");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  const std::size_t column = data->label_index(task_column);
  for (double y : data->label_columns()[column].values) {
    if (y != 0.0 && y != 1.0) {
      throw ConfigError("logistic labels in '" + task_column + "' must be 0 or 1");
    }
  }
  return std::make_shared<LogisticObjective>(std::move(data), column, l2,
                                             std::move(id), layout);
}

std::vector<RankPair> make_pairs(const Dataset& data, const PairSpec& spec) {
  if (!spec.explicit_pairs.empty()) {
    for (const auto& p : spec.explicit_pairs) {
      if (p.positive >= data.rows() || p.negative >= data.rows()) {
        throw ConfigError("ranking pair index out of range");
      }
    }
    return spec.explicit_pairs;
  }
  const auto& labels = data.labels(spec.column);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] > 0.5 ? pos : neg).push_back(i);
  }
  std::vector<RankPair> pairs;
  const std::size_t total = pos.size() * neg.size();
  if (spec.max_pairs == 0 || spec.max_pairs >= total) {
    pairs.reserve(total);
    for (std::size_t p : pos) {
      for (std::size_t n : neg) pairs.push_back({p, n});
    }
    return pairs;
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick_pos(0, pos.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neg(0, neg.size() - 1);
  pairs.reserve(spec.max_pairs);
  for (std::size_t k = 0; k < spec.max_pairs; ++k) {
    const std::size_t p = pick_pos(rng);
    const std::size_t n = pick_neg(rng);
    pairs.push_back({pos[p], neg[n]});
  }
  return pairs;
}

ObjectivePtr make_pairwise_ranking(std::shared_ptr<const Dataset> data,
                                   const PairSpec& spec, std::string id,
                                   LinearLayout layout) {
  if (!data || data->rows() == 0) throw ConfigError("ranking objective needs a nonempty dataset");
  auto pairs = make_pairs(*data, spec);
  if (pairs.empty()) throw ConfigError("pairing rule for '" + spec.column + "' yields no pairs");
  const std::size_t column = data->label_index(spec.column);
  return std::make_shared<PairwiseRankingObjective>(std::move(data), std::move(pairs),
                                                    column, std::move(id), layout);
}

}  // namespace nmt
