#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmt/dataset.hpp"
#include "nmt/parameter_vector.hpp"

namespace nmt {

/// Indices of the examples in a minibatch. Empty means the full dataset.
using Batch = std::span<const std::size_t>;

enum class ObjectiveKind {
  kQuadratic,
  kLogistic,
  kPairwiseRanking,
  kSharedTrunkHead,
  kWeightedSum,
};

const char* to_string(ObjectiveKind kind) noexcept;

/// A differentiable scalar task loss f(theta).
///
/// Implementations are immutable after construction; evaluation is pure and
/// may be called concurrently from several threads.
class TaskObjective {
 public:
  explicit TaskObjective(std::string id) : id_(std::move(id)) {}
  virtual ~TaskObjective() = default;

  const std::string& id() const noexcept { return id_; }
  virtual ObjectiveKind kind() const noexcept = 0;
  /// Length of the full parameter vector this objective reads.
  virtual std::size_t dim() const noexcept = 0;
  /// Number of minibatch units (examples or pairs). Zero for data-free
  /// objectives, which ignore any batch they are given.
  virtual std::size_t examples() const noexcept { return 0; }

  virtual double value(std::span<const double> theta, Batch batch = {}) const = 0;
  /// Writes the gradient into `grad` (overwriting it) and returns the value.
  virtual double value_and_gradient(std::span<const double> theta,
                                    std::span<double> grad,
                                    Batch batch = {}) const = 0;
  /// Ranking quality on the bound dataset (AUC), when the task has one.
  virtual std::optional<double> metric(std::span<const double> /*theta*/) const {
    return std::nullopt;
  }

  double evaluate(const ParameterVector& theta) const { return value(theta.values()); }
  std::vector<double> gradient(std::span<const double> theta) const;

 private:
  std::string id_;
};

using ObjectivePtr = std::shared_ptr<const TaskObjective>;

/// Where a linear scorer's weights live inside the full parameter vector.
/// `total_dim == 0` means "exactly the scorer's own parameters".
struct LinearLayout {
  std::size_t offset = 0;
  std::size_t total_dim = 0;
};

struct QuadraticSpec {
  std::vector<double> center;
  std::vector<double> scale;
};

/// f(theta) = sum_d scale_d (theta_d - center_d)^2.
/// Throws ConfigError on a nonpositive scale or a size mismatch.
ObjectivePtr make_quadratic(const QuadraticSpec& spec, std::string id = "quadratic");

/// Mean binary cross-entropy of logits x.w + b against label column
/// `task_column`, plus l2 * |w|^2. Parameters are [w..., b] at layout.offset.
ObjectivePtr make_logistic(std::shared_ptr<const Dataset> data,
                           const std::string& task_column, double l2,
                           std::string id = "logistic", LinearLayout layout = {});

struct RankPair {
  std::size_t positive;
  std::size_t negative;
};

/// Pairs every positive of `column` with every negative. When `max_pairs` is
/// nonzero and smaller than that product, a seeded sample of `max_pairs`
/// pairs is drawn instead. `explicit_pairs`, when nonempty, overrides both.
struct PairSpec {
  std::string column;
  std::size_t max_pairs = 0;
  std::uint64_t seed = 0;
  std::vector<RankPair> explicit_pairs;
};

std::vector<RankPair> make_pairs(const Dataset& data, const PairSpec& spec);

/// Mean over pairs of -log(sigmoid(z_pos - z_neg)) for the linear score
/// z = x.w. Parameters are [w...] at layout.offset. Throws ConfigError when
/// the pairing rule yields no pairs.
ObjectivePtr make_pairwise_ranking(std::shared_ptr<const Dataset> data,
                                   const PairSpec& pairs,
                                   std::string id = "ranking",
                                   LinearLayout layout = {});

struct SharedTrunkOptions {
  bool trunk_bias = true;
  bool head_bias = true;
};

/// One tanh hidden layer shared by every head, one linear logit per head,
/// binary cross-entropy per head. Layout of theta:
///   [W (width x features, row-major), b (width)?, {v_h (width), c_h?} per head].
/// Returns one objective per entry of `heads`, in order.
std::vector<ObjectivePtr> make_shared_trunk_model(
    std::shared_ptr<const Dataset> data, std::size_t trunk_width,
    const std::vector<std::string>& heads, SharedTrunkOptions options = {});

/// Parameter count of the model built by make_shared_trunk_model.
std::size_t shared_trunk_dim(std::size_t features, std::size_t trunk_width,
                             std::size_t heads, SharedTrunkOptions options = {});

/// -log(sigmoid(x)) = log(1 + exp(-x)) without overflow for large |x|.
double neg_log_sigmoid(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace nmt
