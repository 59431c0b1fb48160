#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.h"
#include "oracles.h"
#include "ostd/classifiers.h"
#include "ostd/error.h"
#include "ostd/metrics.h"

namespace ostd {
namespace {

constexpr Label H = Label::kHallucinated;
constexpr Label F = Label::kFaithful;

Matrix column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

TEST(Threshold, SeparableBoundaryInGap) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<Label> y = {H, H, F, F};
  const auto m = fit_threshold(x, y);
  ASSERT_TRUE(m.boundary());
  EXPECT_GT(*m.boundary(), 1.0);
  EXPECT_LT(*m.boundary(), 2.0);
  EXPECT_EQ(accuracy(m.predict(x), y), 1.0);
  EXPECT_GT(m.weight, 0.0);
  EXPECT_LE(m.iterations, 5000u);
}

TEST(Threshold, LabelFlipFlipsWeightSign) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(20);
    std::vector<Label> y(20), flipped(20);
    for (std::size_t i = 0; i < 20; ++i) {
      x[i] = rng.uniform(-2, 2);
      y[i] = x[i] + rng.uniform(-1, 1) > 0 ? F : H;
      flipped[i] = y[i] == F ? H : F;
    }
    y[0] = F;
    y[1] = H;
    flipped[0] = H;
    flipped[1] = F;
    const auto a = fit_threshold(x, y);
    const auto b = fit_threshold(x, flipped);
    EXPECT_NEAR(a.weight, -b.weight, 1e-12);
    EXPECT_NEAR(a.bias, -b.bias, 1e-12);
  }
}

TEST(Threshold, RejectsSingleClass) {
  EXPECT_THROW(fit_threshold(std::vector<double>{1, 2}, std::vector<Label>{F, F}), DataError);
  ThresholdModel zero;
  EXPECT_FALSE(zero.boundary().has_value());
  EXPECT_EQ(zero.predict(5.0), H);
}

TEST(Tree, Examples) {
  const auto single = fit_tree(column({1, 2, 3}), std::vector<Label>{F, F, F}, 3);
  EXPECT_EQ(single.nodes().size(), 1u);
  EXPECT_EQ(single.predict(column({-100, 100})), (std::vector<Label>{F, F}));

  const auto t = fit_tree(column({0, 1, 2, 3}), std::vector<Label>{H, H, F, F}, 1);
  EXPECT_FALSE(t.root().leaf);
  EXPECT_EQ(t.root().threshold, 1.5);
  EXPECT_EQ(t.predict(column({0, 1, 2, 3})), (std::vector<Label>{H, H, F, F}));
  EXPECT_EQ(t.predict_row(std::vector<double>{1.5}), H);  // value at threshold goes left
  EXPECT_THROW(t.predict_row(std::vector<double>{1, 2}), InvalidArgument);
  EXPECT_THROW(fit_tree(column({1}), std::vector<Label>{H}, 0), InvalidArgument);
}

TEST(Tree, LeafTieGoesToHallucinated) {
  const auto t = fit_tree(column({5, 5}), std::vector<Label>{F, H}, 3);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.predict_row(std::vector<double>{5}), H);
}

TEST(Tree, DepthOneMatchesExhaustiveOracleOnAllSmallDatasets) {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int layout = 0; layout < 2; ++layout) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = layout == 0 ? static_cast<double>(i) : static_cast<double>(i / 2);
      for (std::uint32_t pattern = 0; pattern < (1u << n); ++pattern) {
        std::vector<Label> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = label_from_int((pattern >> i) & 1);
        const auto tree = fit_tree(column(x), y, 1);
        const auto o = oracle::best_single_split(x, y);
        const auto& root = tree.root();
        if (!o.best_threshold) {
          EXPECT_TRUE(root.leaf) << n << " " << pattern;
          continue;
        }
        ASSERT_FALSE(root.leaf) << n << " " << pattern;
        EXPECT_EQ(root.threshold, *o.best_threshold);
        const auto& l = tree.nodes()[root.left].class_counts;
        const auto& r = tree.nodes()[root.right].class_counts;
        const double nl = l[0] + l[1], nr = r[0] + r[1];
        const double w = nl / n * oracle::gini(l[0], l[1]) + nr / n * oracle::gini(r[0], r[1]);
        EXPECT_NEAR(w, o.best_weighted_gini, 1e-12);
      }
    }
  }
}

struct RandomData {
  Matrix x;
  std::vector<Label> y;
};

RandomData random_data(Rng& rng, std::size_t n, std::size_t d, bool unique) {
  RandomData out{Matrix(n, d), std::vector<Label>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      out.x(r, c) = unique ? rng.uniform(-1, 1) : static_cast<double>(rng.uniform_below(4));
    }
    out.y[r] = label_from_int(static_cast<int>(rng.uniform_below(2)));
  }
  return out;
}

TEST(Tree, StructuralInvariants) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto data = random_data(rng, 40, 3, trial % 2 == 0);
    const std::size_t depth = 1 + rng.uniform_below(6);
    const auto tree = fit_tree(data.x, data.y, depth);
    EXPECT_LE(tree.depth(), depth);
    for (const auto& node : tree.nodes()) {
      EXPECT_LE(node.depth, depth);
      if (node.leaf) continue;
      const auto& l = tree.nodes()[node.left];
      const auto& r = tree.nodes()[node.right];
      EXPECT_EQ(l.class_counts[0] + r.class_counts[0], node.class_counts[0]);
      EXPECT_EQ(l.class_counts[1] + r.class_counts[1], node.class_counts[1]);
      const double n = node.class_counts[0] + node.class_counts[1];
      const double nl = l.class_counts[0] + l.class_counts[1], nr = r.class_counts[0] + r.class_counts[1];
      const double w = nl / n * gini(l.class_counts[0], l.class_counts[1]) +
                       nr / n * gini(r.class_counts[0], r.class_counts[1]);
      EXPECT_LT(w, gini(node.class_counts[0], node.class_counts[1]));
    }
  }
}

TEST(Tree, TrainingAccuracyNonDecreasingInDepth) {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto data = random_data(rng, 60, 2, trial % 2 == 0);
    double prev = 0.0;
    for (std::size_t depth = 1; depth <= 20; ++depth) {
      const double acc = accuracy(fit_tree(data.x, data.y, depth).predict(data.x), data.y);
      EXPECT_GE(acc, prev) << "depth " << depth;
      prev = acc;
    }
  }
}

TEST(Tree, MemorizesUniqueRows) {
  Rng rng(33);
  const auto data = random_data(rng, 50, 2, true);
  const auto tree = fit_tree(data.x, data.y, 20);
  EXPECT_EQ(tree.predict(data.x), data.y);
}

TEST(Tree, InvariantUnderMonotoneTransform) {
  Rng rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const auto train = random_data(rng, 50, 3, trial % 2 == 0);
    auto warp = [](Matrix m) {
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = std::exp(2 * m(r, c)) + c;
      return m;
    };
    const auto a = fit_tree(train.x, train.y, 4);
    const auto b = fit_tree(warp(train.x), train.y, 4);
    EXPECT_EQ(a.predict(train.x), b.predict(warp(train.x)));
    for (std::size_t i = 0; i < a.nodes().size(); ++i) {
      EXPECT_EQ(a.nodes()[i].feature, b.nodes()[i].feature);
      EXPECT_EQ(a.nodes()[i].class_counts, b.nodes()[i].class_counts);
    }
  }
}

TEST(Tree, TieBreaksToLowestFeatureThenThreshold) {
  // Both columns separate the classes perfectly.
  const auto x = Matrix::from_rows({{0, 10}, {1, 11}, {2, 12}, {3, 13}});
  const auto t = fit_tree(x, std::vector<Label>{H, H, F, F}, 1);
  EXPECT_EQ(t.root().feature, 0u);
  // Cuts at 0.5 and 1.5 give the same weighted Gini.
  const auto sym = fit_tree(column({0, 1, 2}), std::vector<Label>{H, F, H}, 1);
  ASSERT_FALSE(sym.root().leaf);
  EXPECT_EQ(sym.root().threshold, 0.5);
}

TEST(Tree, DumpMentionsNamesThresholdsAndCounts) {
  const auto t = fit_tree(column({0, 1, 2, 3}), std::vector<Label>{H, H, F, F}, 2);
  const std::vector<std::string> names = {"gen_ng_2"};
  const auto text = t.dump(names);
  EXPECT_NE(text.find("gen_ng_2"), std::string::npos);
  EXPECT_NE(text.find("1.5"), std::string::npos);
  EXPECT_NE(text.find("2"), std::string::npos);
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(-2, 2);
  return m;
}

TEST(Mlp, ShapesAndSoftmax) {
  Rng rng(1);
  const auto model = MlpModel::initialize(4, MlpConfig{}, rng);
  ASSERT_EQ(model.layers().size(), 4u);
  EXPECT_EQ(model.layers()[0].weight.rows(), 32u);
  EXPECT_EQ(model.layers()[1].weight.rows(), 64u);
  EXPECT_EQ(model.layers()[2].weight.rows(), 32u);
  EXPECT_EQ(model.layers()[3].weight.rows(), 2u);
  EXPECT_EQ(model.parameter_count(), (4 * 32 + 32) + (32 * 64 + 64) + (64 * 32 + 32) + (32 * 2 + 2));
  const auto p = model.predict_proba(random_matrix(rng, 50, 4));
  for (std::size_t r = 0; r < p.rows(); ++r) EXPECT_NEAR(p(r, 0) + p(r, 1), 1.0, 1e-6);
  EXPECT_THROW(model.predict_proba(random_matrix(rng, 2, 3)), InvalidArgument);
}

TEST(Mlp, GradientMatchesCentralDifferences) {
  Rng rng(2);
  auto model = MlpModel::initialize(4, MlpConfig{}, rng);
  const auto x = random_matrix(rng, 10, 4);
  std::vector<Label> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = label_from_int(i % 3 == 0);
  const auto grad = model.gradient(x, y);
  std::vector<double> analytic;
  for (const auto& layer : grad) {
    analytic.insert(analytic.end(), layer.weight.data().begin(), layer.weight.data().end());
    analytic.insert(analytic.end(), layer.bias.begin(), layer.bias.end());
  }
  const auto params = model.parameters();
  ASSERT_EQ(params.size(), analytic.size());
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = model.loss(x, y);
    *params[i] = saved - h;
    const double down = model.loss(x, y);
    *params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-7});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Mlp, SeededTrainingIsBitDeterministicAndLossDecreases) {
  Rng rng(3);
  const auto x = random_matrix(rng, 60, 3);
  std::vector<Label> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = x(i, 0) + x(i, 1) > 0 ? F : H;
  MlpTrainTrace t1, t2;
  const auto a = fit_mlp(x, y, 42, MlpConfig{}, &t1);
  const auto b = fit_mlp(x, y, 42, MlpConfig{}, &t2);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(t1.step_losses, t2.step_losses);
  EXPECT_EQ(t1.epoch_losses.size(), 25u);
  EXPECT_EQ(t1.step_losses.size(), 25u * 3);
  for (double l : t1.step_losses) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LE(t1.epoch_losses.back(), t1.initial_loss);
  EXPECT_FALSE(a == fit_mlp(x, y, 43));
}

TEST(Mlp, RejectsNonFiniteInput) {
  Matrix x(4, 2, 1.0);
  x(2, 1) = std::nan("");
  EXPECT_THROW(fit_mlp(x, std::vector<Label>{H, F, H, F}, 1), InvalidArgument);
  MlpConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(fit_mlp(Matrix(4, 2, 1.0), std::vector<Label>{H, F, H, F}, 1, bad), InvalidArgument);
}

}  // namespace
}  // namespace ostd
