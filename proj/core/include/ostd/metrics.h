#pragma once

#include <span>
#include <vector>

#include "ostd/label.h"

namespace ostd {

// Probability that a random faithful record scores higher than a random
// hallucinated one, ties counting one half (Mann-Whitney U with average
// ranks). Raises DataError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const Label> labels);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

// ROC points for "predict faithful when score >= threshold", one per
// distinct score in descending order, preceded by the (0, 0) point at
// threshold +inf.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> labels);

struct WelchResult {
  double t;
  double df;
  double p;  // two-sided
};

// Two-sample unequal-variance t-test. Each sample needs >= 2 values and the
// combined standard error must be nonzero; otherwise InvalidArgument.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Two-sided p-value of Student's t with (possibly fractional) df.
double student_t_two_sided_p(double t, double df);

double mean(std::span<const double> v);
// 1/(N-1) normalization; 0 for fewer than two values.
double sample_variance(std::span<const double> v);
double sample_stddev(std::span<const double> v);

double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

}  // namespace ostd
