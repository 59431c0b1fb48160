#include "ostd/labeling.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "ostd/error.h"
#include "ostd/rng.h"

namespace ostd {

const char* to_string(Label l) { return l == Label::kFaithful ? "faithful" : "hallucinated"; }

Label parse_label(std::string_view s) {
  if (s == "faithful" || s == "1") return Label::kFaithful;
  if (s == "hallucinated" || s == "0") return Label::kHallucinated;
  throw DataError("unknown label: " + std::string(s));
}

bool has_both_classes(std::span<const Label> labels) {
  bool pos = false, neg = false;
  for (Label l : labels) (l == Label::kFaithful ? pos : neg) = true;
  return pos && neg;
}


Criterion parse_criterion(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "em" || lower == "exact_match") return Criterion::kExactMatch;
  if (lower == "rougel" || lower == "rouge_l" || lower == "rouge-l") return Criterion::kRougeL;
  throw InvalidArgument("unknown labeling criterion: " + std::string(name));
}

const char* to_string(Criterion c) { return c == Criterion::kExactMatch ? "em" : "rougel"; }

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

Label exact_match_label(std::string_view generation, std::span<const std::string> references) {
  if (references.empty()) throw InvalidArgument("exact match needs at least one reference");
  const auto gen = normalize_answer(generation);
  for (const auto& ref : references) {
    if (normalize_answer(ref) == gen) return Label::kFaithful;
  }
  return Label::kHallucinated;
}

std::vector<std::string> rouge_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string w(text.substr(b, e - b));
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.push_back(std::move(w));
    }
    i = j;
  }
  return words;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = rouge_words(candidate);
  const auto r = rouge_words(reference);
  const auto lcs = lcs_length(c, r);
  if (lcs == 0) return 0.0;
  // 2PR/(P+R) with P = lcs/|c| and R = lcs/|r| simplifies to 2 lcs/(|c|+|r|);
  // the single division keeps boundary values such as 0.3 exact.
  return 2.0 * static_cast<double>(lcs) / static_cast<double>(c.size() + r.size());
}

double max_rouge_l(std::string_view candidate, std::span<const std::string> references) {
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, rouge_l(candidate, ref));
  return best;
}

Label rouge_label(std::string_view generation, std::span<const std::string> references,
                  double threshold) {
  if (references.empty()) throw InvalidArgument("ROUGE-L labeling needs at least one reference");
  return max_rouge_l(generation, references) < threshold ? Label::kHallucinated : Label::kFaithful;
}

LabelResult label_generation(std::string_view generation, std::span<const std::string> references,
                             Criterion criterion, double rouge_threshold) {
  if (criterion == Criterion::kExactMatch) {
    return {exact_match_label(generation, references), std::nullopt};
  }
  if (references.empty()) throw InvalidArgument("ROUGE-L labeling needs at least one reference");
  const double score = max_rouge_l(generation, references);
  return {score < rouge_threshold ? Label::kHallucinated : Label::kFaithful, score};
}

Matrix LabeledDataset::matrix() const {
  Matrix m(records.size(), feature_names.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].features.size() != feature_names.size()) {
      throw DataError("record " + records[r].id + " has the wrong number of features");
    }
    std::copy(records[r].features.begin(), records[r].features.end(), m.row(r).begin());
  }
  return m;
}

std::vector<Label> LabeledDataset::labels() const {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

std::size_t LabeledDataset::count(Label l) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.label == l; }));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.split_seed = split_seed;
  out.criterion = criterion;
  out.records.reserve(indices.size());
  for (std::size_t i : indices) out.records.push_back(records.at(i));
  return out;
}

LabeledDataset balanced_split(const LabeledDataset& dataset, std::uint64_t seed) {
  std::vector<std::size_t> hallucinated, faithful;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    if (r.generation_tokens && *r.generation_tokens < 2) continue;
    (r.label == Label::kFaithful ? faithful : hallucinated).push_back(i);
  }
  if (hallucinated.empty() || faithful.empty()) {
    throw DataError("balanced split needs both classes; have " +
                    std::to_string(hallucinated.size()) + " hallucinated and " +
                    std::to_string(faithful.size()) + " faithful after excluding short generations");
  }
  Rng rng(seed);
  auto& majority = hallucinated.size() > faithful.size() ? hallucinated : faithful;
  const std::size_t keep = std::min(hallucinated.size(), faithful.size());
  // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
  for (std::size_t i = 0; i < keep && majority.size() > keep; ++i) {
    const std::size_t j = i + rng.uniform_below(majority.size() - i);
    std::swap(majority[i], majority[j]);
  }
  majority.resize(keep);

  std::vector<std::size_t> chosen;
  chosen.reserve(2 * keep);
  chosen.insert(chosen.end(), hallucinated.begin(), hallucinated.end());
  chosen.insert(chosen.end(), faithful.begin(), faithful.end());
  std::sort(chosen.begin(), chosen.end());
  rng.shuffle(std::span<std::size_t>(chosen));

  auto out = dataset.subset(chosen);
  out.split_seed = seed;
  return out;
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& dataset,
                                                           double fraction, std::uint64_t seed) {
  const std::size_t n = dataset.records.size();
  if (n < 5) throw DataError("train/test split needs at least 5 records, have " + std::to_string(n));
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  // Guard against 0.8 * 10 landing a hair above 8 in binary floating point.
  auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  const std::span<const std::size_t> all(order);
  auto train = dataset.subset(all.first(n_train));
  auto test = dataset.subset(all.subspan(n_train));
  train.split_seed = test.split_seed = seed;
  return {std::move(train), std::move(test)};
}

}  // namespace ostd
