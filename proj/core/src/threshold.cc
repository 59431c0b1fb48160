#include <cmath>

#include "ostd/classifiers.h"
#include "ostd/error.h"

namespace ostd {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::optional<double> ThresholdModel::boundary() const {
  if (weight == 0.0) return std::nullopt;
  return -bias / weight;
}

Label ThresholdModel::predict(double x) const {
  return weight * x + bias > 0 ? Label::kFaithful : Label::kHallucinated;
}

std::vector<Label> ThresholdModel::predict(std::span<const double> x) const {
  std::vector<Label> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(predict(v));
  return out;
}

ThresholdModel fit_threshold(std::span<const double> x, std::span<const Label> y,
                             const ThresholdFitOptions& options) {
  if (x.size() != y.size()) throw InvalidArgument("feature and label lengths differ");
  if (!has_both_classes(y)) throw DataError("threshold model needs both classes");
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");
  }
  ThresholdModel m;
  const double n = static_cast<double>(x.size());
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double gw = 0, gb = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double err = sigmoid(m.weight * x[i] + m.bias) - static_cast<double>(as_int(y[i]));
      gw += err * x[i];
      gb += err;
    }
    gw /= n;
    gb /= n;
    if (std::max(std::fabs(gw), std::fabs(gb)) < options.gradient_tolerance) break;
    m.weight -= options.learning_rate * gw;
    m.bias -= options.learning_rate * gb;
    m.iterations = it + 1;
  }
  return m;
}

}  // namespace ostd
