#include "ostd/metrics.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "ostd/error.h"

namespace ostd {

double auroc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  if (!has_both_classes(labels)) throw DataError("AUROC needs both classes");
  for (double x : scores) {
    if (std::isnan(x)) throw InvalidArgument("AUROC scores contain NaN");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Sum of (doubled) average ranks of the positives keeps everything integral.
  std::uint64_t twice_rank_sum = 0;
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t twice_avg_rank = (i + 1) + j;  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::kFaithful) {
        twice_rank_sum += twice_avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = n - positives;
  // U = R - P(P+1)/2, doubled.
  const std::uint64_t twice_u = twice_rank_sum - positives * (positives + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) *
                                         static_cast<double>(negatives));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  if (!has_both_classes(labels)) throw DataError("ROC curve needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  double pos = 0, neg = 0;
  for (Label l : labels) (l == Label::kFaithful ? pos : neg) += 1;

  std::vector<RocPoint> points{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == Label::kFaithful ? tp : fp) += 1;
      ++j;
    }
    points.push_back({scores[order[i]], fp / neg, tp / pos});
    i = j;
  }
  return points;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("mean of empty sample");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double sample_stddev(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0)) throw InvalidArgument("degrees of freedom must be positive");
  if (t == 0.0) return 1.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("each sample needs at least 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  if (!(va + vb > 0)) throw InvalidArgument("both samples have zero variance");
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  return {t, df, student_t_two_sided_p(t, df)};
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw InvalidArgument("prediction/label length mismatch");
  if (truth.empty()) throw InvalidArgument("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace ostd
