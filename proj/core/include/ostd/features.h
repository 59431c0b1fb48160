#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ostd/corpus.h"
#include "ostd/index_set.h"
#include "ostd/label.h"
#include "ostd/matrix.h"
#include "ostd/ngram_stats.h"
#include "ostd/tokenizer.h"

namespace ostd {

// One prompt/generation pair. Log-probabilities are natural logs supplied by
// an external model run: one per generation token, and one per prompt token
// from the second onwards.
struct QARecord {
  std::string id;
  std::string question;
  std::string generation;
  std::vector<std::string> references;
  std::vector<TokenId> question_tokens;
  std::vector<TokenId> generation_tokens;
  std::optional<std::vector<double>> gen_token_logprobs;
  std::optional<std::vector<double>> prompt_token_logprobs;
  std::optional<std::vector<std::string>> key_phrases;
};

// Frozen feature names; this order is the CSV header contract.
const std::vector<std::string>& feature_names();

enum class FeatureGroup { kPrompt, kGeneration, kLogprob };
FeatureGroup feature_group(std::string_view name);

// Occurrence-feature family used when picking the best occurrence features:
// raw-frequency scores (pr_raw_*, pr_keyphrase, gen_raw_*, gen_full_count),
// n-gram model scores (pr_ng_*, gen_ng_2), or both.
enum class OccurrenceFamily { kAll, kRaw, kNgram };
OccurrenceFamily parse_occurrence_family(std::string_view name);
bool in_family(std::string_view feature, OccurrenceFamily family);

struct FeatureVector {
  std::vector<std::pair<std::string, double>> values;
  std::set<std::string> undefined_flags;

  double at(std::string_view name) const;
  bool is_undefined(std::string_view name) const { return undefined_flags.count(std::string(name)) > 0; }
};

struct FeatureConfig {
  ScoreConfig score;
  StopwordMode prompt_raw_filter = StopwordMode::kNone;
  StopwordMode prompt_ng_filter = StopwordMode::kNone;
  StopwordMode generation_raw_filter = StopwordMode::kNone;
  StopwordMode generation_ng_filter = StopwordMode::kNone;
  double frac_threshold = 0.66;
  // Default for a raw-frequency score with no surviving grams; the n-gram
  // score defaults to log(epsilon).
  double raw_undefined_default = 0.0;
  // When false, missing log-probabilities are defaulted to 0 and flagged.
  bool require_logprobs = true;
};

// Mean of the per-token generation log-probabilities. Empty input raises
// InvalidArgument.
double gen_logprob(std::span<const double> gen_token_logprobs);

// Mean of the m-1 log-probabilities of prompt tokens 2..m. Raises
// InvalidArgument when m < 2 or the list length is not m-1.
double prompt_logprob(std::span<const double> prompt_token_logprobs, std::size_t m);

FeatureVector assemble_features(const QARecord& record, const NgramCounter& counter,
                                const Tokenizer& tokenizer, const FeatureConfig& config = {});

// Features for many records; parallel over records (OSTD_THREADS caps the
// worker count). Output order matches input order.
std::vector<FeatureVector> assemble_all(std::span<const QARecord> records,
                                        const NgramCounter& counter, const Tokenizer& tokenizer,
                                        const FeatureConfig& config = {});

struct BestOccurrenceFeatures {
  std::string prompt_feature;
  std::string generation_feature;
};

// Per group, the occurrence feature with the highest AUROC against the
// faithful class; ties go to the earlier name in feature_names() order.
// `names` labels the matrix columns; columns outside the occurrence groups
// are ignored. Single-class labels raise DataError.
BestOccurrenceFeatures select_best_occurrence_features(
    const Matrix& matrix, std::span<const std::string> names, std::span<const Label> labels,
    OccurrenceFamily family = OccurrenceFamily::kAll);

// Replaces every raw-count column (pr_raw_*, pr_keyphrase, gen_raw_*,
// gen_full_count) by log1p of its value. Optional preprocessing, off by
// default in the training protocol.
void log1p_count_columns(Matrix& m, std::span<const std::string> names);

struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> stddev;  // population (1/N)
};

StandardizationParams fit_standardizer(const Matrix& train);
// Columns with zero stddev map to 0.
Matrix apply_standardizer(const StandardizationParams& params, const Matrix& m);
Matrix invert_standardizer(const StandardizationParams& params, const Matrix& z);

}  // namespace ostd
