#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ostd/classifiers.h"
#include "ostd/features.h"
#include "ostd/labeling.h"
#include "ostd/matrix.h"

namespace ostd {

// "logprob": gen_logp alone. "full": gen_logp, pr_logp and the best prompt-
// and generation-side occurrence features picked on each training split.
enum class FeatureSet { kLogprobOnly, kFull };
FeatureSet parse_feature_set(std::string_view name);  // "logprob" | "full"
const char* to_string(FeatureSet f);

enum class ModelKind { kThreshold, kTree, kMlp };
ModelKind parse_model_kind(std::string_view name);  // "threshold" | "tree" | "nn"
const char* to_string(ModelKind m);

struct ModelSpec {
  ModelKind kind = ModelKind::kTree;
  std::size_t depth = 3;  // trees only
  MlpConfig mlp;
  ThresholdFitOptions threshold;

  // Row label such as "Tree (depth 3)", "NN", "Threshold".
  std::string display_name() const;
};

struct ProtocolConfig {
  FeatureSet features = FeatureSet::kFull;
  OccurrenceFamily family = OccurrenceFamily::kAll;
  ModelSpec model;
  std::size_t seeds = 5;
  std::uint64_t master_seed = 0;
  double train_fraction = 0.8;
  bool log1p_counts = false;
};

struct SeedRun {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> features_used;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct ProtocolResult {
  std::vector<SeedRun> runs;
  double mean = 0.0;
  double stddev = 0.0;  // sample (1/(N-1)); 0 for one seed
};

// Seed i uses its own stream derived from (master_seed, i): balanced split,
// 80/20 split, feature selection and standardization on the training part,
// fit, test accuracy. Seeds run in parallel with identical results to a
// serial run. The threshold model accepts the logprob feature set only.
ProtocolResult run_protocol(const LabeledDataset& dataset, const ProtocolConfig& config);

// Columns of the feature set for one training split, in model input order.
std::vector<std::string> select_protocol_features(const LabeledDataset& train, FeatureSet features,
                                                  OccurrenceFamily family);

struct ConsistencyResult {
  double consistency = 0.0;  // fraction of test rows with unanimous predictions
  std::vector<std::size_t> faithful_votes;  // per test row, out of runs
  std::size_t runs = 0;
};

// Fits `runs` trees of the given depth on bootstrap resamples (uniform, with
// replacement, same size) of the training rows and measures how many test
// rows receive the same prediction from every tree. Run r draws from the
// stream (seed, r).
ConsistencyResult bootstrap_consistency(const Matrix& train_x, std::span<const Label> train_y,
                                        const Matrix& test_x, std::size_t runs = 200,
                                        std::size_t depth = 3, std::uint64_t seed = 0);

// The matrices run_protocol would fit on for one seed, for inspection
// commands (bootstrap, tree dump).
struct PreparedSplit {
  std::vector<std::string> feature_names;
  Matrix train_x;
  std::vector<Label> train_y;
  Matrix test_x;
  std::vector<Label> test_y;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

PreparedSplit prepare_split(const LabeledDataset& dataset, const ProtocolConfig& config,
                            std::size_t seed_index);

}  // namespace ostd
