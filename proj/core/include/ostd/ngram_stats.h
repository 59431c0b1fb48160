#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ostd/corpus.h"
#include "ostd/index_set.h"
#include "ostd/tokenizer.h"

namespace ostd {

struct NGram {
  std::vector<TokenId> tokens;

  std::size_t n() const { return tokens.size(); }
  bool operator==(const NGram&) const = default;
};

// Stride-1 overlapping windows in position order; max(0, T-n+1) grams.
// n == 0 raises InvalidArgument.
std::vector<NGram> enumerate_ngrams(std::span<const TokenId> tokens, std::size_t n);

// English stopword list (the NLTK snapshot, 179 lowercase words).
const std::unordered_set<std::string>& english_stopwords();

enum class StopwordMode {
  kNone,
  kRawFrac,     // drop grams whose stopword fraction exceeds frac_threshold
  kFinalToken,  // drop grams whose last token is a stopword
};

StopwordMode parse_stopword_mode(std::string_view name);
const char* to_string(StopwordMode mode);

struct StopwordFilterConfig {
  std::unordered_set<std::string> stopwords = english_stopwords();
  double frac_threshold = 0.66;
  StopwordMode mode = StopwordMode::kNone;
};

class StopwordFilter {
 public:
  StopwordFilter(StopwordFilterConfig config, const Tokenizer& tokenizer);

  // A token is a stopword when its decoded text, whitespace-stripped and
  // lowercased, is in the set.
  bool is_stopword(TokenId id) const;
  double stopword_frac(std::span<const TokenId> gram) const;
  // Comparison against frac_threshold is strict (>).
  bool keeps(std::span<const TokenId> gram) const;
  StopwordMode mode() const { return config_.mode; }

 private:
  StopwordFilterConfig config_;
  const Tokenizer& tokenizer_;
};

struct ScoreConfig {
  double epsilon = 1e-8;
};

// Mean total count over surviving n-grams of z. nullopt when no gram
// survives (including T < n). A null filter keeps everything.
std::optional<double> s_raw(std::span<const TokenId> z, std::size_t n, const NgramCounter& counter,
                            const StopwordFilter* filter = nullptr);

// Count-based n-gram log-likelihood: the mean over surviving positions t of
// log((Count(z[t..t+n)) + eps) / (Count(z[t..t+n-1)) + eps)). Only the
// final-token stopword rule applies here; any other filter mode keeps every
// position. n < 2 raises InvalidArgument; nullopt when no position survives.
std::optional<double> s_ng(std::span<const TokenId> z, std::size_t n, const NgramCounter& counter,
                           const ScoreConfig& config = {}, const StopwordFilter* filter = nullptr);

// Original, lowercase and title-case forms, then each of those with exactly
// one leading space; duplicates removed, first occurrence kept.
std::vector<std::string> expand_phrase_variants(std::string_view phrase);

// Sum of counts over the phrase's variants. Variants that tokenize to the
// same sequence are counted once; variants containing pieces outside the
// vocabulary cannot occur in the corpus and contribute 0.
std::uint64_t phrase_total_count(std::string_view phrase, const NgramCounter& counter,
                                 const Tokenizer& tokenizer);

// Mean of phrase_total_count over phrases; nullopt for an empty list.
std::optional<double> keyphrase_score(std::span<const std::string> phrases,
                                      const NgramCounter& counter, const Tokenizer& tokenizer);

// Count of the whole generation as one pattern. Empty input raises
// InvalidArgument.
std::uint64_t full_generation_count(std::span<const TokenId> generation,
                                    const NgramCounter& counter);

struct SparsityRow {
  std::string label;  // "1".."5" or "key_phrases"
  std::uint64_t items = 0;
  std::uint64_t zeros = 0;
  std::vector<std::string> examples;  // first zero-count items, decoded

  // Percentage of zero-count items; nullopt when there are no items.
  std::optional<double> percent_zero() const;
};

struct SparsityReport {
  std::string dataset;
  std::vector<SparsityRow> rows;

  const SparsityRow& row(std::string_view label) const;
  std::string to_json() const;
};

// Pooled zero-occurrence percentages of question n-grams for each n and, when
// key phrases are given, of key phrases (variant-summed counts). `tokenizer`
// may be null, in which case no examples are decoded.
SparsityReport sparsity_report(std::string dataset,
                               std::span<const std::vector<TokenId>> questions,
                               const NgramCounter& counter, std::span<const std::size_t> n_values,
                               const Tokenizer* tokenizer = nullptr, std::size_t max_examples = 3,
                               std::span<const std::vector<std::string>> key_phrases = {});

}  // namespace ostd
