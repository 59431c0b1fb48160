#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ostd/label.h"
#include "ostd/matrix.h"

namespace ostd {

enum class Criterion { kExactMatch, kRougeL };

// Accepts "em" / "rougel" (case-insensitive, also "rouge_l").
Criterion parse_criterion(std::string_view name);
const char* to_string(Criterion c);  // "em" or "rougel"

// Lowercase, trim, collapse internal whitespace runs to one space.
std::string normalize_answer(std::string_view text);

// Faithful iff the normalized generation equals some normalized reference.
// An empty reference list raises InvalidArgument.
Label exact_match_label(std::string_view generation, std::span<const std::string> references);

// ROUGE-L words: lowercased, split on whitespace, leading/trailing ASCII
// punctuation stripped, empty words dropped.
std::vector<std::string> rouge_words(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// ROUGE-L F1 (beta = 1). 0 when either side has no words.
double rouge_l(std::string_view candidate, std::string_view reference);
double max_rouge_l(std::string_view candidate, std::span<const std::string> references);

inline constexpr double kRougeThreshold = 0.3;

// Hallucinated iff the best ROUGE-L over references is strictly below the
// threshold.
Label rouge_label(std::string_view generation, std::span<const std::string> references,
                  double threshold = kRougeThreshold);

struct LabelResult {
  Label label;
  std::optional<double> rouge_l;  // set for the ROUGE-L criterion only
};

LabelResult label_generation(std::string_view generation, std::span<const std::string> references,
                             Criterion criterion, double rouge_threshold = kRougeThreshold);

struct LabeledRecord {
  std::string id;
  std::vector<double> features;
  Label label = Label::kHallucinated;
  // Generation length in tokens; unknown lengths are never excluded.
  std::optional<std::size_t> generation_tokens;
};

struct LabeledDataset {
  std::vector<std::string> feature_names;
  std::vector<LabeledRecord> records;
  std::uint64_t split_seed = 0;
  Criterion criterion = Criterion::kExactMatch;

  std::size_t size() const { return records.size(); }
  Matrix matrix() const;
  std::vector<Label> labels() const;
  std::size_t count(Label l) const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

// Drops records with fewer than two generation tokens, then downsamples the
// majority class uniformly at random so both classes have equal size, and
// shuffles. Raises DataError (with class counts) when a class is empty.
LabeledDataset balanced_split(const LabeledDataset& dataset, std::uint64_t seed);

// Seeded shuffle, then the first ceil(fraction * N) records train and the
// rest test. Needs N >= 5.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& dataset,
                                                           double fraction, std::uint64_t seed);

}  // namespace ostd
