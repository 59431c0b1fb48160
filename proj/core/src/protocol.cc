#include "ostd/protocol.h"

#include <algorithm>
#include <cctype>

#include "ostd/error.h"
#include "ostd/metrics.h"
#include "ostd/parallel.h"
#include "ostd/rng.h"

namespace ostd {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::size_t> column_indices(std::span<const std::string> all,
                                        std::span<const std::string> wanted) {
  std::vector<std::size_t> idx;
  for (const auto& w : wanted) {
    const auto it = std::find(all.begin(), all.end(), w);
    if (it == all.end()) throw DataError("dataset has no feature column '" + w + "'");
    idx.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  return idx;
}

struct SeedStreams {
  std::uint64_t split;
  std::uint64_t partition;
  std::uint64_t fit;
};

SeedStreams seeds_for(std::uint64_t master, std::size_t index) {
  Rng rng = Rng::stream(master, index);
  SeedStreams s{};
  s.split = rng.next_u64();
  s.partition = rng.next_u64();
  s.fit = rng.next_u64();
  return s;
}

}  // namespace

FeatureSet parse_feature_set(std::string_view name) {
  const auto n = lower(name);
  if (n == "logprob" || n == "logprob_only") return FeatureSet::kLogprobOnly;
  if (n == "full") return FeatureSet::kFull;
  throw InvalidArgument("unknown feature set '" + std::string(name) + "' (logprob|full)");
}

const char* to_string(FeatureSet f) { return f == FeatureSet::kFull ? "full" : "logprob"; }

ModelKind parse_model_kind(std::string_view name) {
  const auto n = lower(name);
  if (n == "threshold") return ModelKind::kThreshold;
  if (n == "tree") return ModelKind::kTree;
  if (n == "nn" || n == "mlp") return ModelKind::kMlp;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (threshold|tree|nn)");
}

const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::kThreshold: return "threshold";
    case ModelKind::kTree: return "tree";
    case ModelKind::kMlp: return "nn";
  }
  return "?";
}

std::string ModelSpec::display_name() const {
  switch (kind) {
    case ModelKind::kThreshold: return "Threshold";
    case ModelKind::kTree: return "Tree (depth " + std::to_string(depth) + ")";
    case ModelKind::kMlp: return "NN";
  }
  return "?";
}

std::vector<std::string> select_protocol_features(const LabeledDataset& train, FeatureSet features,
                                                  OccurrenceFamily family) {
  if (features == FeatureSet::kLogprobOnly) return {"gen_logp"};
  const auto best = select_best_occurrence_features(train.matrix(), train.feature_names,
                                                    train.labels(), family);
  return {"gen_logp", "pr_logp", best.prompt_feature, best.generation_feature};
}

PreparedSplit prepare_split(const LabeledDataset& dataset, const ProtocolConfig& config,
                            std::size_t seed_index) {
  const auto s = seeds_for(config.master_seed, seed_index);
  const auto balanced = balanced_split(dataset, s.split);
  auto [train, test] = train_test_split(balanced, config.train_fraction, s.partition);
  if (!has_both_classes(train.labels())) {
    throw DataError("training split of seed " + std::to_string(seed_index) + " has one class");
  }

  PreparedSplit out;
  out.seed = s.fit;
  out.feature_names = select_protocol_features(train, config.features, config.family);
  const auto cols = column_indices(dataset.feature_names, out.feature_names);
  Matrix train_x = train.matrix().select_columns(cols);
  Matrix test_x = test.matrix().select_columns(cols);
  if (config.log1p_counts) {
    log1p_count_columns(train_x, out.feature_names);
    log1p_count_columns(test_x, out.feature_names);
  }
  const auto params = fit_standardizer(train_x);
  out.train_x = apply_standardizer(params, train_x);
  out.test_x = apply_standardizer(params, test_x);
  out.train_y = train.labels();
  out.test_y = test.labels();
  for (const auto& r : test.records) out.test_ids.push_back(r.id);
  return out;
}

ProtocolResult run_protocol(const LabeledDataset& dataset, const ProtocolConfig& config) {
  if (config.seeds == 0) throw InvalidArgument("protocol needs at least one seed");
  if (config.model.kind == ModelKind::kThreshold && config.features != FeatureSet::kLogprobOnly) {
    throw InvalidArgument("the threshold model takes the logprob feature set only");
  }
  if (config.model.kind == ModelKind::kTree && config.model.depth == 0) {
    throw InvalidArgument("tree depth must be at least 1");
  }

  ProtocolResult result;
  result.runs.resize(config.seeds);
  parallel_for(config.seeds, [&](std::size_t i) {
    const auto split = prepare_split(dataset, config, i);
    SeedRun run;
    run.index = i;
    run.seed = split.seed;
    run.features_used = split.feature_names;
    run.train_size = split.train_y.size();
    run.test_size = split.test_y.size();

    std::vector<Label> train_pred, test_pred;
    switch (config.model.kind) {
      case ModelKind::kThreshold: {
        const auto model = fit_threshold(split.train_x.column(0), split.train_y, config.model.threshold);
        train_pred = model.predict(split.train_x.column(0));
        test_pred = model.predict(split.test_x.column(0));
        break;
      }
      case ModelKind::kTree: {
        const auto model = fit_tree(split.train_x, split.train_y, config.model.depth);
        train_pred = model.predict(split.train_x);
        test_pred = model.predict(split.test_x);
        break;
      }
      case ModelKind::kMlp: {
        const auto model = fit_mlp(split.train_x, split.train_y, split.seed, config.model.mlp);
        train_pred = model.predict(split.train_x);
        test_pred = model.predict(split.test_x);
        break;
      }
    }
    run.train_accuracy = accuracy(train_pred, split.train_y);
    run.test_accuracy = accuracy(test_pred, split.test_y);
    result.runs[i] = std::move(run);
  });

  std::vector<double> acc;
  for (const auto& r : result.runs) acc.push_back(r.test_accuracy);
  result.mean = mean(acc);
  result.stddev = sample_stddev(acc);
  return result;
}

ConsistencyResult bootstrap_consistency(const Matrix& train_x, std::span<const Label> train_y,
                                        const Matrix& test_x, std::size_t runs, std::size_t depth,
                                        std::uint64_t seed) {
  if (train_x.rows() == 0 || test_x.rows() == 0) {
    throw InvalidArgument("bootstrap needs non-empty train and test sets");
  }
  if (train_x.rows() != train_y.size()) throw InvalidArgument("feature and label lengths differ");
  if (train_x.cols() != test_x.cols()) throw InvalidArgument("train and test arity differ");
  if (runs == 0) throw InvalidArgument("bootstrap needs at least one run");

  std::vector<std::vector<Label>> predictions(runs);
  parallel_for(runs, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    std::vector<std::size_t> idx(train_x.rows());
    for (auto& i : idx) i = rng.uniform_below(train_x.rows());
    std::vector<Label> y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back(train_y[i]);
    predictions[r] = fit_tree(train_x.select_rows(idx), y, depth).predict(test_x);
  });

  ConsistencyResult out;
  out.runs = runs;
  out.faithful_votes.assign(test_x.rows(), 0);
  for (const auto& p : predictions) {
    for (std::size_t t = 0; t < p.size(); ++t) out.faithful_votes[t] += p[t] == Label::kFaithful;
  }
  std::size_t unanimous = 0;
  for (std::size_t v : out.faithful_votes) unanimous += (v == 0 || v == runs);
  out.consistency = static_cast<double>(unanimous) / static_cast<double>(test_x.rows());
  return out;
}

}  // namespace ostd
