#include "ostd/features.h"

#include <algorithm>
#include <cmath>

#include "ostd/error.h"
#include "ostd/metrics.h"
#include "ostd/parallel.h"

namespace ostd {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> kNames = {
      "pr_raw_1", "pr_raw_2", "pr_raw_3", "pr_raw_4", "pr_raw_5",     "pr_ng_2",
      "pr_ng_3",  "pr_ng_4",  "pr_ng_5",  "pr_keyphrase", "gen_raw_1", "gen_raw_2",
      "gen_ng_2", "gen_full_count", "gen_logp", "pr_logp",
  };
  return kNames;
}

FeatureGroup feature_group(std::string_view name) {
  if (name == "gen_logp" || name == "pr_logp") return FeatureGroup::kLogprob;
  if (name.starts_with("pr_")) return FeatureGroup::kPrompt;
  if (name.starts_with("gen_")) return FeatureGroup::kGeneration;
  throw InvalidArgument("unknown feature: " + std::string(name));
}

OccurrenceFamily parse_occurrence_family(std::string_view name) {
  if (name == "all") return OccurrenceFamily::kAll;
  if (name == "raw") return OccurrenceFamily::kRaw;
  if (name == "ngram") return OccurrenceFamily::kNgram;
  throw InvalidArgument("unknown occurrence family: " + std::string(name));
}

bool in_family(std::string_view feature, OccurrenceFamily family) {
  if (feature_group(feature) == FeatureGroup::kLogprob) return false;
  const bool ngram = feature.find("_ng_") != std::string_view::npos;
  switch (family) {
    case OccurrenceFamily::kAll: return true;
    case OccurrenceFamily::kRaw: return !ngram;
    case OccurrenceFamily::kNgram: return ngram;
  }
  return false;
}

double FeatureVector::at(std::string_view name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  throw std::out_of_range("no feature named " + std::string(name));
}

double gen_logprob(std::span<const double> gen_token_logprobs) {
  if (gen_token_logprobs.empty()) throw InvalidArgument("generation log-prob list is empty");
  return mean(gen_token_logprobs);
}

double prompt_logprob(std::span<const double> prompt_token_logprobs, std::size_t m) {
  if (m < 2) throw InvalidArgument("prompt log-prob needs at least two prompt tokens");
  if (prompt_token_logprobs.size() != m - 1) {
    throw InvalidArgument("prompt log-prob list has " +
                          std::to_string(prompt_token_logprobs.size()) + " entries, expected " +
                          std::to_string(m - 1));
  }
  return mean(prompt_token_logprobs);
}

FeatureVector assemble_features(const QARecord& record, const NgramCounter& counter,
                                const Tokenizer& tokenizer, const FeatureConfig& config) {
  FeatureVector fv;
  fv.values.reserve(feature_names().size());
  const double ng_default = std::log(config.score.epsilon);

  auto put = [&](const char* name, std::optional<double> v, double fallback) {
    if (!v) fv.undefined_flags.insert(name);
    fv.values.emplace_back(name, v.value_or(fallback));
  };
  auto filter_for = [&](StopwordMode mode) {
    StopwordFilterConfig cfg;
    cfg.mode = mode;
    cfg.frac_threshold = config.frac_threshold;
    return StopwordFilter(std::move(cfg), tokenizer);
  };
  const auto pr_raw_filter = filter_for(config.prompt_raw_filter);
  const auto pr_ng_filter = filter_for(config.prompt_ng_filter);
  const auto gen_raw_filter = filter_for(config.generation_raw_filter);
  const auto gen_ng_filter = filter_for(config.generation_ng_filter);

  const std::span<const TokenId> q = record.question_tokens;
  const std::span<const TokenId> g = record.generation_tokens;
  static const char* kPrRaw[] = {"pr_raw_1", "pr_raw_2", "pr_raw_3", "pr_raw_4", "pr_raw_5"};
  static const char* kPrNg[] = {"pr_ng_2", "pr_ng_3", "pr_ng_4", "pr_ng_5"};
  for (std::size_t n = 1; n <= 5; ++n) {
    put(kPrRaw[n - 1], s_raw(q, n, counter, &pr_raw_filter), config.raw_undefined_default);
  }
  for (std::size_t n = 2; n <= 5; ++n) {
    put(kPrNg[n - 2], s_ng(q, n, counter, config.score, &pr_ng_filter), ng_default);
  }
  std::optional<double> keyphrase;
  if (record.key_phrases && !record.key_phrases->empty()) {
    keyphrase = keyphrase_score(*record.key_phrases, counter, tokenizer);
  }
  put("pr_keyphrase", keyphrase, config.raw_undefined_default);

  put("gen_raw_1", s_raw(g, 1, counter, &gen_raw_filter), config.raw_undefined_default);
  put("gen_raw_2", s_raw(g, 2, counter, &gen_raw_filter), config.raw_undefined_default);
  put("gen_ng_2", s_ng(g, 2, counter, config.score, &gen_ng_filter), ng_default);
  std::optional<double> full;
  if (!g.empty()) full = static_cast<double>(full_generation_count(g, counter));
  put("gen_full_count", full, config.raw_undefined_default);

  std::optional<double> gen_lp, pr_lp;
  if (record.gen_token_logprobs && !record.gen_token_logprobs->empty()) {
    gen_lp = gen_logprob(*record.gen_token_logprobs);
  }
  if (record.prompt_token_logprobs && !record.prompt_token_logprobs->empty()) {
    pr_lp = prompt_logprob(*record.prompt_token_logprobs, record.prompt_token_logprobs->size() + 1);
  }
  if (config.require_logprobs && (!gen_lp || !pr_lp)) {
    throw DataError("record " + record.id + " lacks " +
                    (!gen_lp ? "gen_token_logprobs" : "prompt_token_logprobs"));
  }
  put("gen_logp", gen_lp, 0.0);
  put("pr_logp", pr_lp, 0.0);
  return fv;
}

std::vector<FeatureVector> assemble_all(std::span<const QARecord> records,
                                        const NgramCounter& counter, const Tokenizer& tokenizer,
                                        const FeatureConfig& config) {
  std::vector<FeatureVector> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    out[i] = assemble_features(records[i], counter, tokenizer, config);
  });
  return out;
}

BestOccurrenceFeatures select_best_occurrence_features(const Matrix& matrix,
                                                       std::span<const std::string> names,
                                                       std::span<const Label> labels,
                                                       OccurrenceFamily family) {
  if (names.size() != matrix.cols()) throw InvalidArgument("column names do not match matrix");
  if (labels.size() != matrix.rows()) throw InvalidArgument("labels do not match matrix rows");
  if (matrix.rows() < 2 || !has_both_classes(labels)) {
    throw DataError("feature selection needs at least two records of both classes");
  }
  std::optional<std::pair<std::string, double>> best_prompt, best_gen;
  for (const auto& name : feature_names()) {
    if (!in_family(name, family)) continue;
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) continue;
    const double score = auroc(matrix.column(static_cast<std::size_t>(it - names.begin())), labels);
    auto& best = feature_group(name) == FeatureGroup::kPrompt ? best_prompt : best_gen;
    if (!best || score > best->second) best = std::make_pair(name, score);
  }
  if (!best_prompt || !best_gen) {
    throw DataError("matrix lacks prompt-side or generation-side occurrence features");
  }
  return {best_prompt->first, best_gen->first};
}

void log1p_count_columns(Matrix& m, std::span<const std::string> names) {
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& name = names[c];
    const bool is_count = (name.starts_with("pr_raw_") || name == "pr_keyphrase" ||
                           name.starts_with("gen_raw_") || name == "gen_full_count");
    if (!is_count) continue;
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = std::log1p(m(r, c));
  }
}

StandardizationParams fit_standardizer(const Matrix& train) {
  if (train.empty()) throw InvalidArgument("cannot fit a standardizer on an empty matrix");
  StandardizationParams p;
  p.mean.assign(train.cols(), 0.0);
  p.stddev.assign(train.cols(), 0.0);
  const auto n = static_cast<double>(train.rows());
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double s = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) s += train(r, c);
    const double mu = s / n;
    double ss = 0;
    for (std::size_t r = 0; r < train.rows(); ++r) ss += (train(r, c) - mu) * (train(r, c) - mu);
    p.mean[c] = mu;
    p.stddev[c] = std::sqrt(ss / n);
  }
  return p;
}

Matrix apply_standardizer(const StandardizationParams& params, const Matrix& m) {
  if (params.mean.size() != m.cols()) throw InvalidArgument("standardizer arity mismatch");
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(r, c) = params.stddev[c] > 0 ? (m(r, c) - params.mean[c]) / params.stddev[c] : 0.0;
    }
  }
  return out;
}

Matrix invert_standardizer(const StandardizationParams& params, const Matrix& z) {
  if (params.mean.size() != z.cols()) throw InvalidArgument("standardizer arity mismatch");
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      out(r, c) = z(r, c) * params.stddev[c] + params.mean[c];
    }
  }
  return out;
}

}  // namespace ostd
