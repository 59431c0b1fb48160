#include "ostd/ngram_stats.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "ostd/error.h"

namespace ostd {
namespace {

std::string strip_lower(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  std::string out(s.substr(first, last - first + 1));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// str.title(): a letter is uppercased when the preceding character is not a
// letter, lowercased otherwise.
std::string to_title(std::string_view s) {
  std::string out(s);
  bool prev_alpha = false;
  for (char& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      c = static_cast<char>(prev_alpha ? std::tolower(u) : std::toupper(u));
      prev_alpha = true;
    } else {
      prev_alpha = false;
    }
  }
  return out;
}

}  // namespace

std::vector<NGram> enumerate_ngrams(std::span<const TokenId> tokens, std::size_t n) {
  if (n == 0) throw InvalidArgument("n-gram order must be >= 1");
  std::vector<NGram> grams;
  if (tokens.size() < n) return grams;
  grams.reserve(tokens.size() - n + 1);
  for (std::size_t t = 0; t + n <= tokens.size(); ++t) {
    grams.push_back(NGram{{tokens.begin() + t, tokens.begin() + t + n}});
  }
  return grams;
}

StopwordMode parse_stopword_mode(std::string_view name) {
  if (name == "none") return StopwordMode::kNone;
  if (name == "raw_frac") return StopwordMode::kRawFrac;
  if (name == "final_token") return StopwordMode::kFinalToken;
  throw InvalidArgument("unknown stopword mode: " + std::string(name));
}

const char* to_string(StopwordMode mode) {
  switch (mode) {
    case StopwordMode::kNone: return "none";
    case StopwordMode::kRawFrac: return "raw_frac";
    case StopwordMode::kFinalToken: return "final_token";
  }
  return "none";
}

StopwordFilter::StopwordFilter(StopwordFilterConfig config, const Tokenizer& tokenizer)
    : config_(std::move(config)), tokenizer_(tokenizer) {
  if (!(config_.frac_threshold > 0.0 && config_.frac_threshold <= 1.0)) {
    throw InvalidArgument("stopword fraction threshold must lie in (0, 1]");
  }
}

bool StopwordFilter::is_stopword(TokenId id) const {
  return config_.stopwords.count(strip_lower(tokenizer_.decode_token(id))) > 0;
}

double StopwordFilter::stopword_frac(std::span<const TokenId> gram) const {
  if (gram.empty()) throw InvalidArgument("empty n-gram");
  std::size_t hits = 0;
  for (TokenId id : gram) hits += is_stopword(id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gram.size());
}

bool StopwordFilter::keeps(std::span<const TokenId> gram) const {
  switch (config_.mode) {
    case StopwordMode::kNone:
      return true;
    case StopwordMode::kRawFrac:
      return !(stopword_frac(gram) > config_.frac_threshold);
    case StopwordMode::kFinalToken:
      return !is_stopword(gram.back());
  }
  return true;
}

std::optional<double> s_raw(std::span<const TokenId> z, std::size_t n, const NgramCounter& counter,
                            const StopwordFilter* filter) {
  if (n == 0) throw InvalidArgument("n-gram order must be >= 1");
  std::uint64_t sum = 0;
  std::uint64_t kept = 0;
  for (std::size_t t = 0; t + n <= z.size(); ++t) {
    const auto gram = z.subspan(t, n);
    if (filter && !filter->keeps(gram)) continue;
    sum += counter.total_count(gram);
    ++kept;
  }
  if (kept == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(kept);
}

std::optional<double> s_ng(std::span<const TokenId> z, std::size_t n, const NgramCounter& counter,
                           const ScoreConfig& config, const StopwordFilter* filter) {
  if (n < 2) throw InvalidArgument("n-gram likelihood score needs n >= 2");
  if (!(config.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const bool final_token_rule = filter && filter->mode() == StopwordMode::kFinalToken;
  double sum = 0.0;
  std::size_t kept = 0;
  for (std::size_t t = 0; t + n <= z.size(); ++t) {
    const auto gram = z.subspan(t, n);
    if (final_token_rule && !filter->keeps(gram)) continue;
    const auto full = static_cast<double>(counter.total_count(gram));
    const auto prefix = static_cast<double>(counter.total_count(gram.first(n - 1)));
    sum += std::log((full + config.epsilon) / (prefix + config.epsilon));
    ++kept;
  }
  if (kept == 0) return std::nullopt;
  return sum / static_cast<double>(kept);
}

std::vector<std::string> expand_phrase_variants(std::string_view phrase) {
  if (phrase.empty()) throw InvalidArgument("empty key phrase");
  std::vector<std::string> base = {std::string(phrase), to_lower(phrase), to_title(phrase)};
  std::vector<std::string> out;
  auto add = [&](std::string v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
  };
  for (const auto& b : base) add(b);
  for (const auto& b : base) {
    const auto first = b.find_first_not_of(' ');
    add(" " + (first == std::string::npos ? std::string() : b.substr(first)));
  }
  return out;
}

std::uint64_t phrase_total_count(std::string_view phrase, const NgramCounter& counter,
                                 const Tokenizer& tokenizer) {
  std::set<std::vector<TokenId>> patterns;
  for (const auto& variant : expand_phrase_variants(phrase)) {
    auto ids = tokenizer.try_encode(variant);
    if (ids && !ids->empty()) patterns.insert(std::move(*ids));
  }
  std::uint64_t total = 0;
  for (const auto& p : patterns) total += counter.total_count(p);
  return total;
}

std::optional<double> keyphrase_score(std::span<const std::string> phrases,
                                      const NgramCounter& counter, const Tokenizer& tokenizer) {
  if (phrases.empty()) return std::nullopt;
  std::uint64_t sum = 0;
  for (const auto& p : phrases) sum += phrase_total_count(p, counter, tokenizer);
  return static_cast<double>(sum) / static_cast<double>(phrases.size());
}

std::uint64_t full_generation_count(std::span<const TokenId> generation,
                                    const NgramCounter& counter) {
  if (generation.empty()) throw InvalidArgument("empty generation");
  return counter.total_count(generation);
}

std::optional<double> SparsityRow::percent_zero() const {
  if (items == 0) return std::nullopt;
  return 100.0 * static_cast<double>(zeros) / static_cast<double>(items);
}

const SparsityRow& SparsityReport::row(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw std::out_of_range("no sparsity row " + std::string(label));
}

std::string SparsityReport::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  nlohmann::ordered_json pct = nlohmann::ordered_json::object();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  nlohmann::ordered_json examples = nlohmann::ordered_json::object();
  for (const auto& r : rows) {
    auto p = r.percent_zero();
    pct[r.label] = p ? nlohmann::ordered_json(*p) : nlohmann::ordered_json(nullptr);
    counts[r.label] = {{"items", r.items}, {"zeros", r.zeros}};
    examples[r.label] = r.examples;
  }
  j["percent_zero"] = std::move(pct);
  j["counts"] = std::move(counts);
  j["examples"] = std::move(examples);
  return j.dump(2);
}

SparsityReport sparsity_report(std::string dataset,
                               std::span<const std::vector<TokenId>> questions,
                               const NgramCounter& counter, std::span<const std::size_t> n_values,
                               const Tokenizer* tokenizer, std::size_t max_examples,
                               std::span<const std::vector<std::string>> key_phrases) {
  SparsityReport report;
  report.dataset = std::move(dataset);
  for (std::size_t n : n_values) {
    if (n == 0) throw InvalidArgument("n-gram order must be >= 1");
    SparsityRow row;
    row.label = std::to_string(n);
    for (const auto& q : questions) {
      for (std::size_t t = 0; t + n <= q.size(); ++t) {
        const auto gram = std::span<const TokenId>(q).subspan(t, n);
        ++row.items;
        if (counter.total_count(gram) == 0) {
          ++row.zeros;
          if (tokenizer && row.examples.size() < max_examples) {
            row.examples.push_back(tokenizer->decode(gram));
          }
        }
      }
    }
    report.rows.push_back(std::move(row));
  }
  if (!key_phrases.empty()) {
    if (!tokenizer) throw InvalidArgument("key-phrase sparsity needs a tokenizer");
    SparsityRow row;
    row.label = "key_phrases";
    for (const auto& phrases : key_phrases) {
      for (const auto& p : phrases) {
        ++row.items;
        if (phrase_total_count(p, counter, *tokenizer) == 0) {
          ++row.zeros;
          if (row.examples.size() < max_examples) row.examples.push_back(p);
        }
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace ostd
