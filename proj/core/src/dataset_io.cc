#include "ostd/dataset_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "binary_io.h"
#include "ostd/error.h"

namespace ostd {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<std::vector<double>> optional_logprobs(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  auto v = j[key].get<std::vector<double>>();
  for (double x : v) {
    if (!std::isfinite(x) || x > 0.0) {
      throw DataError(std::string(key) + " holds " + format_double(x) + "; log-probabilities must be finite and <= 0");
    }
  }
  return v;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  return fields;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

QARecord parse_qa(const json& j) {
  QARecord r;
  r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
  r.question = j.at("question").get<std::string>();
  r.generation = j.at("generation").get<std::string>();
  r.references = j.at("references").get<std::vector<std::string>>();
  r.gen_token_logprobs = optional_logprobs(j, "gen_token_logprobs");
  r.prompt_token_logprobs = optional_logprobs(j, "prompt_token_logprobs");
  if (j.contains("key_phrases") && !j["key_phrases"].is_null()) {
    r.key_phrases = j["key_phrases"].get<std::vector<std::string>>();
  }
  if (j.contains("question_tokens") && !j["question_tokens"].is_null()) {
    r.question_tokens = j["question_tokens"].get<std::vector<TokenId>>();
  }
  if (j.contains("generation_tokens") && !j["generation_tokens"].is_null()) {
    r.generation_tokens = j["generation_tokens"].get<std::vector<TokenId>>();
  }
  return r;
}

}  // namespace

std::vector<QARecord> parse_qa_records(std::string_view jsonl, const std::string& source) {
  std::vector<QARecord> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto r = parse_qa(json::parse(line));
      if (!seen.insert(r.id).second) throw DataError("duplicate id '" + r.id + "'");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<QARecord> read_qa_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_qa_records(ss.str(), path.string());
}

void tokenize_records(std::vector<QARecord>& records, const Tokenizer& tokenizer) {
  for (auto& r : records) {
    if (r.question_tokens.empty()) r.question_tokens = tokenizer.encode_known(r.question);
    if (r.generation_tokens.empty()) r.generation_tokens = tokenizer.encode_known(r.generation);
  }
}

void write_feature_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                       std::span<const FeatureVector> rows) {
  if (ids.size() != rows.size()) throw InvalidArgument("ids and feature rows differ in length");
  auto out = internal::open_for_write(path.string());
  out << "id";
  for (const auto& n : feature_names()) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << csv_field(ids[i]);
    for (const auto& n : feature_names()) out << ',' << format_double(rows[i].at(n));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  FeatureTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty feature file");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "id") {
    throw DataError(path.string() + ": feature header must start with 'id'");
  }
  t.names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    t.ids.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(fields[c], &used));
        if (used != fields[c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + fields[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  t.values = rows.empty() ? Matrix(0, t.names.size()) : Matrix::from_rows(rows);
  return t;
}

void write_feature_sidecar(const std::filesystem::path& path, std::span<const std::string> ids,
                           std::span<const FeatureVector> rows,
                           std::span<const std::size_t> generation_tokens) {
  if (ids.size() != rows.size() || ids.size() != generation_tokens.size()) {
    throw InvalidArgument("sidecar inputs differ in length");
  }
  json records = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json undefined = json::array();
    for (const auto& n : feature_names()) {
      if (rows[i].is_undefined(n)) undefined.push_back(n);
    }
    records.push_back({{"id", ids[i]}, {"undefined", undefined}, {"generation_tokens", generation_tokens[i]}});
  }
  const json doc = {{"format", "ostd-feature-flags-v1"}, {"records", records}};
  write_text_file(path, doc.dump(1) + "\n");
}

std::map<std::string, FeatureSidecarEntry> read_feature_sidecar(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  std::map<std::string, FeatureSidecarEntry> out;
  try {
    if (doc.at("format") != "ostd-feature-flags-v1") throw DataError(path.string() + ": unknown sidecar format");
    for (const auto& r : doc.at("records")) {
      FeatureSidecarEntry e;
      e.undefined = r.at("undefined").get<std::vector<std::string>>();
      if (r.contains("generation_tokens") && !r["generation_tokens"].is_null()) {
        e.generation_tokens = r["generation_tokens"].get<std::size_t>();
      }
      out[r.at("id").get<std::string>()] = std::move(e);
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

void write_labels(const std::filesystem::path& path, std::span<const LabelRow> rows) {
  std::string text;
  for (const auto& r : rows) {
    json j = {{"id", r.id}, {"label", to_string(r.label)}, {"criterion", to_string(r.criterion)}};
    j["rouge_l"] = r.rouge_l ? json(*r.rouge_l) : json(nullptr);
    text += j.dump() + "\n";
  }
  write_text_file(path, text);
}

std::vector<LabelRow> read_labels(const std::filesystem::path& path) {
  std::vector<LabelRow> out;
  for (const auto& j : read_json_lines(path)) {
    try {
      LabelRow r;
      r.id = j.at("id").get<std::string>();
      const auto& label = j.at("label");
      r.label = label.is_number() ? label_from_int(label.get<int>()) : parse_label(label.get<std::string>());
      r.criterion = parse_criterion(j.at("criterion").get<std::string>());
      if (j.contains("rouge_l") && !j["rouge_l"].is_null()) r.rouge_l = j["rouge_l"].get<double>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return out;
}

LabeledDataset join_features_labels(const FeatureTable& features, std::span<const LabelRow> labels,
                                    const std::map<std::string, FeatureSidecarEntry>* sidecar) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < features.ids.size(); ++i) row_of[features.ids[i]] = i;
  LabeledDataset ds;
  ds.feature_names = features.names;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (i == 0) ds.criterion = l.criterion;
    if (l.criterion != ds.criterion) throw DataError("labels mix EM and ROUGE-L criteria");
    const auto it = row_of.find(l.id);
    if (it == row_of.end()) throw DataError("no feature row for labeled id '" + l.id + "'");
    LabeledRecord rec;
    rec.id = l.id;
    const auto row = features.values.row(it->second);
    rec.features.assign(row.begin(), row.end());
    rec.label = l.label;
    if (sidecar) {
      const auto s = sidecar->find(l.id);
      if (s != sidecar->end()) rec.generation_tokens = s->second.generation_tokens;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void write_roc_csv(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::vector<RocPoint>>>& curves) {
  std::string text = "feature,threshold,fpr,tpr\n";
  for (const auto& [name, points] : curves) {
    for (const auto& p : points) {
      text += csv_field(name) + "," + (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) +
              "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
    }
  }
  write_text_file(path, text);
}

std::string EvalReport::to_json() const {
  json j;
  j["dataset"] = dataset;
  j["criterion"] = criterion;
  j["rng_algorithm"] = rng_algorithm;
  json au = json::object();
  for (const auto& [name, v] : auroc) au[name] = v;
  j["auroc"] = au;
  json acc = json::array();
  for (const auto& r : accuracy) {
    acc.push_back({{"model", r.model}, {"features", r.features}, {"mean", r.mean},
                   {"std", r.stddev}, {"per_seed", r.per_seed}});
  }
  j["accuracy"] = acc;
  j["consistency"] = consistency ? json(*consistency) : json(nullptr);
  j["t_test"] = t_test ? json{{"t", t_test->t}, {"df", t_test->df}, {"p", t_test->p}} : json(nullptr);
  return j.dump(2);
}

std::string accuracy_csv(std::span<const AccuracyRow> rows) {
  std::size_t seeds = 0;
  for (const auto& r : rows) seeds = std::max(seeds, r.per_seed.size());
  std::string text = "model,features,mean,std";
  for (std::size_t i = 0; i < seeds; ++i) text += ",seed_" + std::to_string(i);
  text += "\n";
  for (const auto& r : rows) {
    text += csv_field(r.model) + "," + r.features + "," + format_double(r.mean) + "," + format_double(r.stddev);
    for (std::size_t i = 0; i < seeds; ++i) {
      text += ",";
      if (i < r.per_seed.size()) text += format_double(r.per_seed[i]);
    }
    text += "\n";
  }
  return text;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  auto out = internal::open_for_write(path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ostd
