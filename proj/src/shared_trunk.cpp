#include <algorithm>
#include <cmath>

#include "nmt/errors.hpp"
#include "nmt/metrics.hpp"
#include "nmt/objectives.hpp"

namespace nmt {

namespace {

struct TrunkLayout {
  std::size_t features = 0;
  std::size_t width = 0;
  std::size_t heads = 0;
  SharedTrunkOptions options;

  std::size_t weight_offset() const { return 0; }
  std::size_t bias_offset() const { return features * width; }
  std::size_t trunk_size() const { return features * width + (options.trunk_bias ? width : 0); }
  std::size_t head_size() const { return width + (options.head_bias ? 1 : 0); }
  std::size_t head_offset(std::size_t h) const { return trunk_size() + h * head_size(); }
  std::size_t total() const { return trunk_size() + heads * head_size(); }
};

// One head of the shared-trunk network. Hidden activations are recomputed per
// call so the object stays immutable.
class SharedTrunkHead final : public TaskObjective {
 public:
  SharedTrunkHead(std::shared_ptr<const Dataset> data, TrunkLayout layout,
                  std::size_t head, std::size_t column, std::string id)
      : TaskObjective(std::move(id)),
        data_(std::move(data)),
        layout_(layout),
        head_(head),
        labels_(&data_->label_columns()[column].values) {}

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kSharedTrunkHead; }
  std::size_t dim() const noexcept override { return layout_.total(); }
  std::size_t examples() const noexcept override { return data_->rows(); }

  double value(std::span<const double> theta, Batch batch) const override {
    check(theta);
    std::vector<double> hidden(layout_.width);
    double acc = 0.0;
    each(batch, [&](std::size_t i) {
      const double z = forward(theta, i, hidden);
      acc += neg_log_sigmoid(-z) - (*labels_)[i] * z;
    });
    return acc / count(batch);
  }

  double value_and_gradient(std::span<const double> theta, std::span<double> grad,
                            Batch batch) const override {
    check(theta);
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t width = layout_.width;
    const std::size_t nf = layout_.features;
    const std::size_t head = layout_.head_offset(head_);
    std::vector<double> hidden(width);
    double acc = 0.0;
    each(batch, [&](std::size_t i) {
      const double z = forward(theta, i, hidden);
      const double y = (*labels_)[i];
      acc += neg_log_sigmoid(-z) - y * z;
      const double dz = sigmoid(z) - y;
      const auto x = data_->row(i);
      for (std::size_t u = 0; u < width; ++u) {
        grad[head + u] += dz * hidden[u];
        const double da = dz * theta[head + u] * (1.0 - hidden[u] * hidden[u]);
        double* dw = grad.data() + layout_.weight_offset() + u * nf;
        for (std::size_t j = 0; j < nf; ++j) dw[j] += da * x[j];
        if (layout_.options.trunk_bias) grad[layout_.bias_offset() + u] += da;
      }
      if (layout_.options.head_bias) grad[head + width] += dz;
    });
    const double inv_n = 1.0 / count(batch);
    for (double& g : grad) g *= inv_n;
    return acc * inv_n;
  }

  std::optional<double> metric(std::span<const double> theta) const override {
    check(theta);
    std::vector<double> hidden(layout_.width);
    std::vector<double> scores(data_->rows());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = forward(theta, i, hidden);
    try {
      return auc(scores, *labels_);
    } catch (const UndefinedMetricError&) {
      return std::nullopt;
    }
  }

 private:
  void check(std::span<const double> theta) const {
    if (theta.size() != dim()) {
      throw ContractViolation("objective '" + id() + "' expects dimension " +
                              std::to_string(dim()) + ", got " +
                              std::to_string(theta.size()));
    }
  }

  template <typename Fn>
  void each(Batch batch, Fn&& fn) const {
    if (batch.empty()) {
      for (std::size_t i = 0; i < data_->rows(); ++i) fn(i);
    } else {
      for (std::size_t i : batch) fn(i);
    }
  }

  double count(Batch batch) const {
    return static_cast<double>(batch.empty() ? data_->rows() : batch.size());
  }

  // Fills `hidden` with tanh activations for row i and returns the head logit.
  double forward(std::span<const double> theta, std::size_t i,
                 std::vector<double>& hidden) const {
    const auto x = data_->row(i);
    const std::size_t nf = layout_.features;
    const std::size_t head = layout_.head_offset(head_);
    double z = layout_.options.head_bias ? theta[head + layout_.width] : 0.0;
    for (std::size_t u = 0; u < layout_.width; ++u) {
      const double* w = theta.data() + layout_.weight_offset() + u * nf;
      double a = layout_.options.trunk_bias ? theta[layout_.bias_offset() + u] : 0.0;
      for (std::size_t j = 0; j < nf; ++j) a += w[j] * x[j];
      hidden[u] = std::tanh(a);
      z += theta[head + u] * hidden[u];
    }
    return z;
  }

  std::shared_ptr<const Dataset> data_;
  TrunkLayout layout_;
  std::size_t head_;
  const std::vector<double>* labels_;
};

}  // namespace

std::size_t shared_trunk_dim(std::size_t features, std::size_t trunk_width,
                             std::size_t heads, SharedTrunkOptions options) {
  return TrunkLayout{features, trunk_width, heads, options}.total();
}

std::vector<ObjectivePtr> make_shared_trunk_model(
    std::shared_ptr<const Dataset> data, std::size_t trunk_width,
    const std::vector<std::string>& heads, SharedTrunkOptions options) {
  if (!data || data->rows() == 0) throw ConfigError("shared-trunk model needs a nonempty dataset");
  if (trunk_width < 1) throw ConfigError("trunk_width must be >= 1");
  if (heads.empty()) throw ConfigError("shared-trunk model needs at least one head");
  std::vector<std::size_t> columns;
  for (const auto& name : heads) {
    const std::size_t column = data->label_index(name);
    for (double y : data->label_columns()[column].values) {
      if (y != 0.0 && y != 1.0) {
        throw ConfigError("head labels in '" + name + "' must be 0 or 1");
      }
    }
    columns.push_back(column);
  }
  const TrunkLayout layout{data->features(), trunk_width, heads.size(), options};
  std::vector<ObjectivePtr> out;
  for (std::size_t h = 0; h < heads.size(); ++h) {
    out.push_back(std::make_shared<SharedTrunkHead>(data, layout, h, columns[h],
                                                    "head:" + heads[h]));
  }
  return out;
}

}  // namespace nmt
