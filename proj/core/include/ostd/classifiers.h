#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ostd/label.h"
#include "ostd/matrix.h"
#include "ostd/rng.h"

namespace ostd {

// ---------------------------------------------------------------------------
// One-feature logistic regression ("single decision threshold").

struct ThresholdFitOptions {
  double learning_rate = 0.1;
  std::size_t max_iterations = 5000;
  double gradient_tolerance = 1e-8;  // stop when the gradient inf-norm drops below
};

struct ThresholdModel {
  double weight = 0.0;
  double bias = 0.0;
  std::size_t iterations = 0;

  // -bias / weight; nullopt when weight == 0.
  std::optional<double> boundary() const;
  // Faithful iff weight * x + bias > 0.
  Label predict(double x) const;
  std::vector<Label> predict(std::span<const double> x) const;
};

// Full-batch gradient descent on the mean logistic loss from w = b = 0.
// Raises DataError unless both classes are present.
ThresholdModel fit_threshold(std::span<const double> x, std::span<const Label> y,
                             const ThresholdFitOptions& options = {});

// ---------------------------------------------------------------------------
// CART decision tree (Gini impurity, binary labels).

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // go left iff value <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint64_t, 2> class_counts{};  // indexed by Label
  std::size_t depth = 0;

  // Majority class; ties go to hallucinated.
  Label prediction() const {
    return class_counts[1] > class_counts[0] ? Label::kFaithful : Label::kHallucinated;
  }
};

class TreeModel {
 public:
  TreeModel(std::vector<TreeNode> nodes, std::size_t max_depth, std::size_t n_features)
      : nodes_(std::move(nodes)), max_depth_(max_depth), n_features_(n_features) {}

  std::span<const TreeNode> nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t max_depth() const { return max_depth_; }
  std::size_t n_features() const { return n_features_; }
  // Longest root-to-leaf path, in edges.
  std::size_t depth() const;
  std::size_t leaf_count() const;

  // Raises InvalidArgument when the row arity differs from training.
  Label predict_row(std::span<const double> row) const;
  std::vector<Label> predict(const Matrix& x) const;

  // Indented text rendering with feature names, thresholds and class counts.
  std::string dump(std::span<const std::string> feature_names) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t max_depth_;
  std::size_t n_features_;
};

// Exhaustive search over midpoints of consecutive distinct values per
// feature. A node splits only when the weighted child Gini is strictly below
// its own; equal-Gini candidates resolve to the lowest feature index, then
// the lowest threshold. No pruning, minimum leaf size 1.
TreeModel fit_tree(const Matrix& x, std::span<const Label> y, std::size_t max_depth);

double gini(std::uint64_t hallucinated, std::uint64_t faithful);

// ---------------------------------------------------------------------------
// Multilayer perceptron: input -> 32 -> 64 -> 32 -> 2, ReLU hidden layers,
// softmax output, mean cross-entropy, Adam.

struct MlpConfig {
  std::vector<std::size_t> hidden = {32, 64, 32};
  double learning_rate = 1e-4;
  std::size_t batch_size = 20;
  std::size_t epochs = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

  // He-uniform weights for ReLU layers, Glorot-uniform for the output layer,
  // zero biases; drawn layer by layer in row-major order.
  static MlpModel initialize(std::size_t input_dim, const MlpConfig& config, Rng& rng);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
  std::span<const DenseLayer> layers() const { return layers_; }
  std::span<DenseLayer> layers() { return layers_; }
  std::size_t parameter_count() const;
  // Pointers to every weight and bias, for optimizers and gradient checks.
  std::vector<double*> parameters();

  // Rows of class probabilities [p(hallucinated), p(faithful)].
  Matrix predict_proba(const Matrix& x) const;
  std::vector<Label> predict(const Matrix& x) const;
  double loss(const Matrix& x, std::span<const Label> y) const;
  // Gradient of loss() with the same layout as the model.
  std::vector<DenseLayer> gradient(const Matrix& x, std::span<const Label> y) const;

  bool operator==(const MlpModel&) const = default;

 private:
  void check_input(const Matrix& x) const;
  std::vector<DenseLayer> layers_;
};

struct MlpTrainTrace {
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
  std::vector<double> step_losses;   // mini-batch loss before each update
};

// Deterministic given the seed: initialization, then one shuffle per epoch,
// batches in shuffled order (the last one may be short), no early stopping.
// Non-finite inputs raise InvalidArgument.
MlpModel fit_mlp(const Matrix& x, std::span<const Label> y, std::uint64_t seed,
                 const MlpConfig& config = {}, MlpTrainTrace* trace = nullptr);

}  // namespace ostd
