#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ostd/features.h"
#include "ostd/labeling.h"
#include "ostd/matrix.h"
#include "ostd/metrics.h"
#include "ostd/tokenizer.h"

namespace ostd {

// QA JSON-lines: {"id", "question", "generation", "references": [...],
// "gen_token_logprobs", "prompt_token_logprobs", "key_phrases"}; the last
// three may be null or absent. Optional "question_tokens" and
// "generation_tokens" arrays bypass tokenization. Log-probabilities must be
// finite and <= 0. Schema violations raise DataError with file:line.
std::vector<QARecord> read_qa_records(const std::filesystem::path& path);
std::vector<QARecord> parse_qa_records(std::string_view jsonl, const std::string& source = "<memory>");

// Fills question_tokens / generation_tokens that are still empty, using
// lookup-only encoding.
void tokenize_records(std::vector<QARecord>& records, const Tokenizer& tokenizer);

// Feature matrix CSV: header "id,<feature_names()...>", one row per record,
// values printed with 17 significant digits.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<std::string> ids;
  Matrix values;
};

void write_feature_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const FeatureVector> rows);
FeatureTable read_feature_csv(const std::filesystem::path& path);

// Sidecar JSON next to the CSV: per record, the defaulted feature names and
// the generation length in tokens.
struct FeatureSidecarEntry {
  std::vector<std::string> undefined;
  std::optional<std::size_t> generation_tokens;
};

void write_feature_sidecar(const std::filesystem::path& path, std::span<const std::string> ids,
                           std::span<const FeatureVector> rows,
                           std::span<const std::size_t> generation_tokens);
std::map<std::string, FeatureSidecarEntry> read_feature_sidecar(const std::filesystem::path& path);

// Labels JSON-lines: {"id", "label", "criterion", "rouge_l": float|null}.
struct LabelRow {
  std::string id;
  Label label = Label::kHallucinated;
  Criterion criterion = Criterion::kExactMatch;
  std::optional<double> rouge_l;
};

void write_labels(const std::filesystem::path& path, std::span<const LabelRow> rows);
std::vector<LabelRow> read_labels(const std::filesystem::path& path);

// Joins features and labels by id (label order is kept). Every labeled id
// needs a feature row; mixed criteria raise DataError.
LabeledDataset join_features_labels(const FeatureTable& features, std::span<const LabelRow> labels,
                                    const std::map<std::string, FeatureSidecarEntry>* sidecar = nullptr);

// ROC points as CSV: feature,threshold,fpr,tpr.
void write_roc_csv(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::vector<RocPoint>>>& curves);

struct AccuracyRow {
  std::string model;     // e.g. "Tree (depth 3)"
  std::string features;  // "logprob" | "full"
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_seed;
};

struct EvalReport {
  std::string dataset;
  std::string criterion;
  std::vector<std::pair<std::string, double>> auroc;
  std::vector<AccuracyRow> accuracy;
  std::optional<double> consistency;
  std::optional<WelchResult> t_test;
  std::string rng_algorithm;

  std::string to_json() const;
};

// Accuracy table as CSV: model,features,mean,std,seed_0..seed_k.
std::string accuracy_csv(std::span<const AccuracyRow> rows);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace ostd
