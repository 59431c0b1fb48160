#include <algorithm>
#include <cmath>
#include <numeric>

#include "ostd/classifiers.h"
#include "ostd/error.h"

namespace ostd {
namespace {

struct Forward {
  std::vector<Matrix> pre;   // z = a_prev W^T + b, per layer
  std::vector<Matrix> post;  // a; post[0] is the input
};

Forward forward(std::span<const DenseLayer> layers, const Matrix& x) {
  Forward f;
  f.post.push_back(x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const Matrix& a = f.post.back();
    Matrix z(a.rows(), layer.weight.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t o = 0; o < layer.weight.rows(); ++o) {
        double s = layer.bias[o];
        for (std::size_t i = 0; i < a.cols(); ++i) s += a(r, i) * layer.weight(o, i);
        z(r, o) = s;
      }
    }
    Matrix act = z;
    if (l + 1 < layers.size()) {
      for (std::size_t r = 0; r < act.rows(); ++r) {
        for (auto& v : act.row(r)) v = std::max(0.0, v);
      }
    }
    f.pre.push_back(std::move(z));
    f.post.push_back(std::move(act));
  }
  return f;
}

// Softmax of each row of logits, computed stably.
Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0;
    for (std::size_t c = 0; c < row.size(); ++c) sum += std::exp(row[c] - mx);
    for (std::size_t c = 0; c < row.size(); ++c) p(r, c) = std::exp(row[c] - mx) / sum;
  }
  return p;
}

double cross_entropy(const Matrix& logits, std::span<const Label> y) {
  double total = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0;
    for (double v : row) sum += std::exp(v - mx);
    total += -(row[as_int(y[r])] - mx - std::log(sum));
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace

MlpModel MlpModel::initialize(std::size_t input_dim, const MlpConfig& config, Rng& rng) {
  if (input_dim == 0) throw InvalidArgument("MLP input dimension must be positive");
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(2);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
    const bool output = l + 2 == sizes.size();
    const double limit = output ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                : std::sqrt(6.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    for (std::size_t o = 0; o < fan_out; ++o) {
      for (std::size_t i = 0; i < fan_in; ++i) layer.weight(o, i) = rng.uniform(-limit, limit);
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.rows() * l.weight.cols() + l.bias.size();
  return n;
}

std::vector<double*> MlpModel::parameters() {
  std::vector<double*> out;
  out.reserve(parameter_count());
  for (auto& l : layers_) {
    for (std::size_t o = 0; o < l.weight.rows(); ++o) {
      for (auto& w : l.weight.row(o)) out.push_back(&w);
    }
    for (auto& b : l.bias) out.push_back(&b);
  }
  return out;
}

void MlpModel::check_input(const Matrix& x) const {
  if (layers_.empty()) throw InvalidArgument("MLP has no layers");
  if (x.cols() != input_dim()) {
    throw InvalidArgument("MLP expects " + std::to_string(input_dim()) + " features, got " +
                          std::to_string(x.cols()));
  }
}

Matrix MlpModel::predict_proba(const Matrix& x) const {
  check_input(x);
  return softmax_rows(forward(layers_, x).post.back());
}

std::vector<Label> MlpModel::predict(const Matrix& x) const {
  const auto p = predict_proba(x);
  std::vector<Label> out;
  out.reserve(p.rows());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    out.push_back(p(r, 1) > p(r, 0) ? Label::kFaithful : Label::kHallucinated);
  }
  return out;
}

double MlpModel::loss(const Matrix& x, std::span<const Label> y) const {
  check_input(x);
  if (x.rows() != y.size() || y.empty()) throw InvalidArgument("batch/label size mismatch");
  return cross_entropy(forward(layers_, x).post.back(), y);
}

std::vector<DenseLayer> MlpModel::gradient(const Matrix& x, std::span<const Label> y) const {
  check_input(x);
  if (x.rows() != y.size() || y.empty()) throw InvalidArgument("batch/label size mismatch");
  const auto f = forward(layers_, x);
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  // d loss / d logits = (softmax - onehot) / N
  Matrix delta = softmax_rows(f.post.back());
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    delta(r, as_int(y[r])) -= 1.0;
    for (auto& v : delta.row(r)) v *= inv_n;
  }

  std::vector<DenseLayer> grads(layers_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const Matrix& a_prev = f.post[l];
    DenseLayer g{Matrix(layer.weight.rows(), layer.weight.cols()),
                 std::vector<double>(layer.bias.size(), 0.0)};
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      for (std::size_t o = 0; o < layer.weight.rows(); ++o) {
        const double d = delta(r, o);
        if (d == 0.0) continue;
        g.bias[o] += d;
        for (std::size_t i = 0; i < layer.weight.cols(); ++i) g.weight(o, i) += d * a_prev(r, i);
      }
    }
    if (l > 0) {
      Matrix prev(delta.rows(), layer.weight.cols());
      for (std::size_t r = 0; r < delta.rows(); ++r) {
        for (std::size_t i = 0; i < layer.weight.cols(); ++i) {
          if (f.pre[l - 1](r, i) <= 0.0) continue;  // ReLU gate
          double s = 0;
          for (std::size_t o = 0; o < layer.weight.rows(); ++o) s += delta(r, o) * layer.weight(o, i);
          prev(r, i) = s;
        }
      }
      delta = std::move(prev);
    }
    grads[l] = std::move(g);
  }
  return grads;
}

MlpModel fit_mlp(const Matrix& x, std::span<const Label> y, std::uint64_t seed,
                 const MlpConfig& config, MlpTrainTrace* trace) {
  if (x.rows() == 0) throw InvalidArgument("MLP training needs at least one row");
  if (x.rows() != y.size()) throw InvalidArgument("feature and label lengths differ");
  if (config.batch_size == 0) throw InvalidArgument("batch size must be positive");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite MLP input");
  }

  Rng rng(seed);
  MlpModel model = MlpModel::initialize(x.cols(), config, rng);
  auto params = model.parameters();
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  if (trace) trace->initial_loss = model.loss(x, y);

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = x.select_rows(idx);
      std::vector<Label> yb;
      yb.reserve(idx.size());
      for (std::size_t i : idx) yb.push_back(y[i]);

      if (trace) trace->step_losses.push_back(model.loss(xb, yb));
      const auto grads = model.gradient(xb, yb);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      std::size_t k = 0;
      for (const auto& g : grads) {
        for (std::size_t o = 0; o < g.weight.rows(); ++o) {
          for (double gv : g.weight.row(o)) {
            m1[k] = config.beta1 * m1[k] + (1 - config.beta1) * gv;
            m2[k] = config.beta2 * m2[k] + (1 - config.beta2) * gv * gv;
            *params[k] -= config.learning_rate * (m1[k] / bc1) /
                          (std::sqrt(m2[k] / bc2) + config.adam_epsilon);
            ++k;
          }
        }
        for (double gv : g.bias) {
          m1[k] = config.beta1 * m1[k] + (1 - config.beta1) * gv;
          m2[k] = config.beta2 * m2[k] + (1 - config.beta2) * gv * gv;
          *params[k] -= config.learning_rate * (m1[k] / bc1) /
                        (std::sqrt(m2[k] / bc2) + config.adam_epsilon);
          ++k;
        }
      }
    }
    if (trace) trace->epoch_losses.push_back(model.loss(x, y));
  }
  return model;
}

}  // namespace ostd
