#pragma once

// Brute-force reference implementations. Deliberately naive and independent
// of the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ostd/corpus.h"
#include "ostd/index_set.h"
#include "ostd/label.h"

namespace ostd::oracle {

// Sort all suffixes with a comparison sort.
inline std::vector<std::uint64_t> naive_suffix_array(std::span<const TokenId> text) {
  std::vector<std::uint64_t> sa(text.size());
  std::iota(sa.begin(), sa.end(), 0);
  std::sort(sa.begin(), sa.end(), [&](std::uint64_t a, std::uint64_t b) {
    return std::lexicographical_compare(text.begin() + a, text.end(), text.begin() + b, text.end());
  });
  return sa;
}

inline std::uint64_t scan_count(std::span<const TokenId> text, std::span<const TokenId> pattern) {
  if (pattern.empty() || pattern.size() > text.size()) return 0;
  std::uint64_t n = 0;
  for (std::size_t p = 0; p + pattern.size() <= text.size(); ++p) {
    if (std::equal(pattern.begin(), pattern.end(), text.begin() + p)) ++n;
  }
  return n;
}

// Counts by scanning every stream; the stand-in for IndexSet in oracle
// comparisons.
class ScanCounter final : public NgramCounter {
 public:
  explicit ScanCounter(std::vector<std::vector<TokenId>> streams) : streams_(std::move(streams)) {}
  std::uint64_t total_count(std::span<const TokenId> pattern) const override {
    std::uint64_t total = 0;
    for (const auto& s : streams_) total += scan_count(s, pattern);
    return total;
  }

 private:
  std::vector<std::vector<TokenId>> streams_;
};

// Mean raw count over all n-grams, from scan counts.
inline std::optional<double> s_raw_by_scan(std::span<const TokenId> z, std::size_t n, const ScanCounter& c) {
  if (z.size() < n) return std::nullopt;
  std::uint64_t sum = 0;
  std::uint64_t grams = 0;
  for (std::size_t t = 0; t + n <= z.size(); ++t, ++grams) sum += c.total_count(z.subspan(t, n));
  return static_cast<double>(sum) / static_cast<double>(grams);
}

// Mean smoothed log count ratio over all n-grams, from scan counts.
inline std::optional<double> s_ng_by_scan(std::span<const TokenId> z, std::size_t n, const ScanCounter& c,
                                  double eps = 1e-8) {
  if (z.size() < n) return std::nullopt;
  double sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t t = 0; t + n <= z.size(); ++t, ++terms) {
    const double num = static_cast<double>(c.total_count(z.subspan(t, n))) + eps;
    const double den = static_cast<double>(c.total_count(z.subspan(t, n - 1))) + eps;
    sum += std::log(num / den);
  }
  return sum / static_cast<double>(terms);
}

// P(faithful score > hallucinated score) + 0.5 P(tie), by enumerating pairs.
inline double pairwise_auroc(std::span<const double> scores, std::span<const Label> labels) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::kFaithful) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Label::kHallucinated) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

inline double gini(double h, double f) {
  const double n = h + f;
  if (n == 0) return 0.0;
  return 1.0 - (h / n) * (h / n) - (f / n) * (f / n);
}

struct SplitOracle {
  double parent_gini;
  double best_weighted_gini;  // equals parent when no threshold helps
  std::optional<double> best_threshold;
};

// Tries every cut between distinct sorted values of a single feature.
inline SplitOracle best_single_split(std::span<const double> x, std::span<const Label> y) {
  double h = 0, f = 0;
  for (auto l : y) (l == Label::kFaithful ? f : h) += 1;
  SplitOracle out{gini(h, f), gini(h, f), std::nullopt};
  std::vector<double> values(x.begin(), x.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double thr = values[i] + (values[i + 1] - values[i]) / 2;
    double lh = 0, lf = 0, rh = 0, rf = 0;
    for (std::size_t r = 0; r < x.size(); ++r) {
      const bool left = x[r] <= thr;
      const bool faithful = y[r] == Label::kFaithful;
      (left ? (faithful ? lf : lh) : (faithful ? rf : rh)) += 1;
    }
    const double n = static_cast<double>(x.size());
    const double w = (lh + lf) / n * gini(lh, lf) + (rh + rf) / n * gini(rh, rf);
    if (w < out.best_weighted_gini - 1e-12) {
      out.best_weighted_gini = w;
      out.best_threshold = thr;
    }
  }
  return out;
}

// Classic O(|a||b|) dynamic program written out directly.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

// Welch statistic and Welch-Satterthwaite df by the textbook formulas.
struct Welch {
  double t;
  double df;
};

inline Welch welch(std::span<const double> a, std::span<const double> b) {
  auto mean = [](std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  auto var = [&](std::span<const double> v) {
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  const double va = var(a) / a.size(), vb = var(b) / b.size();
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1));
  return {t, df};
}

}  // namespace ostd::oracle
