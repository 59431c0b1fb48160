#include <gtest/gtest.h>

#include <atomic>
#include <set>

#include "fixtures.h"
#include "ostd/error.h"
#include "ostd/metrics.h"
#include "ostd/parallel.h"
#include "ostd/protocol.h"
#include "ostd/rng.h"

namespace ostd {
namespace {

constexpr Label H = Label::kHallucinated;
constexpr Label F = Label::kFaithful;

LabeledDataset separable(std::size_t per_class) {
  LabeledDataset ds;
  ds.feature_names = feature_names();
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    LabeledRecord r;
    r.id = "s" + std::to_string(i);
    r.label = i < per_class ? H : F;
    r.generation_tokens = 4;
    r.features.assign(ds.feature_names.size(), 0.0);
    for (std::size_t c = 0; c < r.features.size(); ++c) r.features[c] = static_cast<double>((i * 7 + c) % 5);
    r.features[14] = (r.label == F ? 1.0 : -3.0) - 0.01 * static_cast<double>(i % 10);  // gen_logp
    ds.records.push_back(r);
  }
  return ds;
}

TEST(Names, ParseAndDisplay) {
  EXPECT_EQ(parse_feature_set("logprob_only"), FeatureSet::kLogprobOnly);
  EXPECT_EQ(parse_feature_set("FULL"), FeatureSet::kFull);
  EXPECT_THROW(parse_feature_set("half"), InvalidArgument);
  EXPECT_EQ(parse_model_kind("mlp"), ModelKind::kMlp);
  EXPECT_EQ(std::string(to_string(ModelKind::kMlp)), "nn");
  EXPECT_THROW(parse_model_kind("forest"), InvalidArgument);
  ModelSpec tree;
  tree.depth = 5;
  EXPECT_EQ(tree.display_name(), "Tree (depth 5)");
  ModelSpec nn, threshold;
  nn.kind = ModelKind::kMlp;
  threshold.kind = ModelKind::kThreshold;
  EXPECT_EQ(nn.display_name(), "NN");
  EXPECT_EQ(threshold.display_name(), "Threshold");
}

TEST(Protocol, ThresholdOnSeparableLogprobIsPerfect) {
  ProtocolConfig c;
  c.features = FeatureSet::kLogprobOnly;
  c.model.kind = ModelKind::kThreshold;
  c.master_seed = 11;
  const auto r = run_protocol(separable(20), c);
  ASSERT_EQ(r.runs.size(), 5u);
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.stddev, 0.0);
  for (const auto& run : r.runs) {
    EXPECT_EQ(run.features_used, std::vector<std::string>{"gen_logp"});
    EXPECT_EQ(run.train_size, 32u);
    EXPECT_EQ(run.test_size, 8u);
  }
}

TEST(Protocol, ThresholdRejectsFullFeatureSet) {
  ProtocolConfig c;
  c.model.kind = ModelKind::kThreshold;
  EXPECT_THROW(run_protocol(separable(10), c), InvalidArgument);
  ProtocolConfig zero;
  zero.seeds = 0;
  EXPECT_THROW(run_protocol(separable(10), zero), InvalidArgument);
}

TEST(Protocol, DeterministicAndEqualToPerSeedPreparation) {
  const auto ds = fixtures::narrow_band(40, 3);
  ProtocolConfig c;
  c.master_seed = 99;
  const auto a = run_protocol(ds, c);
  const auto b = run_protocol(ds, c);
  for (std::size_t i = 0; i < c.seeds; ++i) {
    EXPECT_EQ(a.runs[i].test_accuracy, b.runs[i].test_accuracy);
    EXPECT_EQ(a.runs[i].features_used.size(), 4u);
    const auto split = prepare_split(ds, c, i);
    const auto tree = fit_tree(split.train_x, split.train_y, 3);
    EXPECT_EQ(accuracy(tree.predict(split.test_x), split.test_y), a.runs[i].test_accuracy);
    EXPECT_EQ(split.seed, a.runs[i].seed);
  }
  EXPECT_EQ(a.mean, b.mean);
  c.master_seed = 100;
  EXPECT_NE(prepare_split(ds, c, 0).test_ids, prepare_split(ds, ProtocolConfig{}, 0).test_ids);
}

TEST(Protocol, FullFeatureTreeBeatsLogprobOnNarrowBand) {
  const auto ds = fixtures::narrow_band(100, 1);
  ProtocolConfig full;
  full.master_seed = 5;
  ProtocolConfig logprob = full;
  logprob.features = FeatureSet::kLogprobOnly;
  const auto rf = run_protocol(ds, full);
  const auto rl = run_protocol(ds, logprob);
  EXPECT_GE(rf.mean - rl.mean, 0.10);
  for (const auto& run : rf.runs) EXPECT_EQ(run.features_used.back(), "gen_ng_2");
}

TEST(Protocol, PreparedSplitIsStandardizedOnTrain) {
  const auto split = prepare_split(fixtures::narrow_band(30, 2), ProtocolConfig{}, 0);
  for (std::size_t c = 0; c < split.train_x.cols(); ++c) EXPECT_NEAR(mean(split.train_x.column(c)), 0.0, 1e-9);
  EXPECT_EQ(split.test_ids.size(), split.test_y.size());
}

TEST(Bootstrap, WideMarginIsFullyConsistent) {
  const auto f = fixtures::wide_margin(7);
  const auto r = bootstrap_consistency(f.train_x, f.train_y, f.test_x, 200, 3, 1);
  EXPECT_EQ(r.consistency, 1.0);
  EXPECT_EQ(r.runs, 200u);
  for (std::size_t i = 0; i < f.test_y.size(); ++i) {
    EXPECT_EQ(r.faithful_votes[i], f.test_y[i] == F ? 200u : 0u);
  }
}

TEST(Bootstrap, SingleRunIsVacuouslyConsistent) {
  const auto f = fixtures::label_noise(0.3, 4);
  EXPECT_EQ(bootstrap_consistency(f.train_x, f.train_y, f.test_x, 1, 3, 9).consistency, 1.0);
}

TEST(Bootstrap, StraddledRowDisagrees) {
  Matrix train(30, 1);
  std::vector<Label> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    train(i, 0) = static_cast<double>(i / 10);
    y[i] = i < 10 ? H : (i < 20 ? label_from_int(i % 2) : F);
  }
  const auto test = Matrix::from_rows({{0}, {1}, {2}});
  const auto r = bootstrap_consistency(train, y, test, 200, 3, 3);
  EXPECT_EQ(r.faithful_votes[0], 0u);
  EXPECT_EQ(r.faithful_votes[2], 200u);
  EXPECT_GT(r.faithful_votes[1], 0u);
  EXPECT_LT(r.faithful_votes[1], 200u);
  EXPECT_DOUBLE_EQ(r.consistency, 2.0 / 3.0);
}

TEST(Bootstrap, NoiseLowersConsistencyMonotonically) {
  double prev = 1.0;
  for (double noise : {0.0, 0.02, 0.05, 0.1}) {
    const auto f = fixtures::label_noise(noise, 6);
    const double c = bootstrap_consistency(f.train_x, f.train_y, f.test_x, 200, 3, 2).consistency;
    EXPECT_LE(c, prev) << noise;
    prev = c;
  }
  EXPECT_LT(prev, 1.0);
}

TEST(Bootstrap, RejectsEmptyInputs) {
  EXPECT_THROW(bootstrap_consistency(Matrix(), {}, Matrix(1, 1), 10), InvalidArgument);
  const auto f = fixtures::wide_margin(1);
  EXPECT_THROW(bootstrap_consistency(f.train_x, f.train_y, f.test_x, 0), InvalidArgument);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a = Rng::stream(5, 0), b = Rng::stream(5, 0), c = Rng::stream(5, 1);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  Rng ref(5489);
  EXPECT_EQ(ref.next_u64(), 14514284786278117030ull);  // first mt19937_64 output for the default seed
}

TEST(Rng, BoundedDrawsStayInRangeAndCoverIt) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_below(7);
    EXPECT_LT(v, 7u);
    seen.insert(v);
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
  std::vector<int> v = {1, 2, 3, 4, 5};
  rng.shuffle(std::span<int>(v));
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(Parallel, VisitsEachIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 3) throw DataError("boom");
               }),
               DataError);
  EXPECT_GE(thread_budget(), 1u);
}

}  // namespace
}  // namespace ostd
