#include "cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "ostd/classifiers.h"
#include "ostd/corpus.h"
#include "ostd/dataset_io.h"
#include "ostd/error.h"
#include "ostd/features.h"
#include "ostd/index_set.h"
#include "ostd/labeling.h"
#include "ostd/metrics.h"
#include "ostd/ngram_stats.h"
#include "ostd/protocol.h"
#include "ostd/rng.h"
#include "ostd/suffix_index.h"
#include "ostd/tokenizer.h"

namespace ostd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t hash_config(const json& config) {
  const auto text = config.dump();
  return fnv1a64({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

json versions() {
  return {{"ostd", OSTD_VERSION},
          {"index_format", kIndexFormatVersion},
          {"rng", Rng::kAlgorithm},
          {"compiler", __VERSION__}};
}

// A run directory named by command and config hash, plus the provenance file
// that goes with it. Re-running the same config rewrites the same directory.
class Run {
 public:
  Run(const std::string& command, const fs::path& out_dir, json config)
      : command_(command), config_(std::move(config)) {
    hash_ = hash_config(json{{"command", command}, {"config", config_}});
    std::string name = command;
    std::replace(name.begin(), name.end(), ' ', '-');
    dir_ = out_dir / (name + "-" + hex64(hash_).substr(0, 12));
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create run directory " + dir_.string() + ": " + ec.message());
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& file) {
    outputs_.push_back(file);
    return dir_ / file;
  }
  void set_seeds(json seeds) { seeds_ = std::move(seeds); }
  void finish() const { write_provenance(dir_ / "provenance.json", command_, config_, hash_, seeds_, outputs_); }

  static void write_provenance(const fs::path& file, const std::string& command, const json& config,
                               std::uint64_t hash, const json& seeds, const std::vector<std::string>& outputs) {
    const json doc = {{"command", command}, {"config", config}, {"config_hash", hex64(hash)},
                      {"seeds", seeds}, {"versions", versions()}, {"outputs", outputs},
                      {"created_utc", utc_now()}};
    write_text_file(file, doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_;
  std::uint64_t hash_ = 0;
  fs::path dir_;
  json seeds_ = json::object();
  std::vector<std::string> outputs_;
};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// ---------------------------------------------------------------------------
// build-index

struct BuildIndexOptions {
  std::string input;
  std::string tokens;
  std::string docs;
  std::string subset;
  std::string out;
  std::string out_dir;
  std::string manifest;
  std::string vocab;
  std::uint32_t vocab_size = 0;
};

std::vector<std::string> subsets_in(const std::vector<std::string>& doc_subsets, const std::string& only) {
  std::vector<std::string> names;
  if (!only.empty()) return {only};
  for (const auto& s : doc_subsets) {
    if (s.empty()) throw DataError("document without a subset; pass --subset to name it");
    if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
  }
  return names;
}

int cmd_build_index(const BuildIndexOptions& o, std::ostream& out) {
  if (o.input.empty() == o.tokens.empty()) throw InvalidArgument("pass exactly one of --input or --tokens");
  if (!o.tokens.empty() && o.docs.empty()) throw InvalidArgument("--tokens needs --docs");
  if (!o.out.empty() && !o.out_dir.empty()) throw InvalidArgument("pass at most one of --out and --out-dir");

  std::vector<std::vector<TokenId>> documents;
  std::vector<std::string> doc_subsets;
  std::shared_ptr<WordTokenizer> tokenizer;
  std::uint32_t vocab_size = o.vocab_size;

  const fs::path manifest_path =
      !o.manifest.empty() ? fs::path(o.manifest)
                          : (!o.out.empty() ? fs::absolute(o.out).parent_path() : fs::path(o.out_dir.empty() ? "." : o.out_dir)) /
                                "manifest.json";
  Manifest manifest;
  if (fs::exists(manifest_path)) manifest = Manifest::load(manifest_path);

  fs::path vocab_path;
  if (!o.input.empty()) {
    vocab_path = !o.vocab.empty() ? fs::path(o.vocab)
                                  : (!manifest.vocab.empty() ? manifest.vocab : manifest_path.parent_path() / "vocab.json");
    tokenizer = std::make_shared<WordTokenizer>(fs::exists(vocab_path) ? WordTokenizer::load(vocab_path)
                                                                       : WordTokenizer());
    const auto size_before = tokenizer->vocab_size();
    for (const auto& d : read_text_documents(o.input)) {
      documents.push_back(tokenizer->encode(d.text));
      doc_subsets.push_back(d.subset);
    }
    vocab_size = tokenizer->vocab_size();
    if (vocab_size != size_before && fs::exists(vocab_path)) {
      // Indexes already built against the smaller vocabulary would no longer
      // be compatible unless they are all rebuilt now.
      const auto building = subsets_in(doc_subsets, o.subset);
      for (const auto& e : manifest.subsets) {
        if (std::find(building.begin(), building.end(), e.name) == building.end()) {
          throw DataError("input adds " + std::to_string(vocab_size - size_before) +
                          " vocabulary entries but subset '" + e.name +
                          "' was built with the old vocabulary; rebuild all subsets from one input");
        }
      }
    }
  } else {
    const auto tokens = read_token_file(o.tokens);
    const auto spans = read_document_manifest(o.docs);
    std::uint64_t pos = 0;
    for (const auto& s : spans) {
      if (pos + s.length > tokens.size()) throw DataError("document manifest is longer than the token file");
      documents.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                             tokens.begin() + static_cast<std::ptrdiff_t>(pos + s.length));
      doc_subsets.push_back(s.subset);
      pos += s.length;
    }
    if (pos != tokens.size()) throw DataError("document manifest does not cover the token file");
    if (!o.vocab.empty()) {
      tokenizer = std::make_shared<WordTokenizer>(WordTokenizer::load(o.vocab));
      vocab_path = o.vocab;
      vocab_size = tokenizer->vocab_size();
    }
    if (vocab_size == 0) {
      TokenId max_id = 0;
      for (auto t : tokens) max_id = std::max(max_id, t);
      vocab_size = max_id + 1;
    }
  }

  const auto names = subsets_in(doc_subsets, o.subset);
  if (names.size() > 1 && !o.out.empty()) {
    throw InvalidArgument("input holds " + std::to_string(names.size()) + " subsets; use --out-dir");
  }
  json built = json::array();
  for (const auto& name : names) {
    std::vector<std::vector<TokenId>> docs;
    for (std::size_t i = 0; i < documents.size(); ++i) {
      if (doc_subsets[i] == name || (doc_subsets[i].empty() && !o.subset.empty())) docs.push_back(documents[i]);
    }
    if (docs.empty()) throw DataError("no documents for subset '" + name + "'");
    const auto index = SuffixIndex::build(flatten_corpus(docs, WordTokenizer::kEosId, name, vocab_size));
    const fs::path path = !o.out.empty() ? fs::path(o.out) : fs::path(o.out_dir.empty() ? "." : o.out_dir) / (name + ".idx");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    index.save(path);
    manifest.upsert({name, fs::absolute(path)});
    built.push_back({{"subset", name}, {"path", path.string()}, {"tokens", index.size()},
                     {"documents", index.corpus().num_documents()}, {"checksum", hex64(index.checksum())}});
    out << "built " << name << ": " << index.corpus().num_documents() << " documents, " << index.size()
        << " tokens -> " << path.string() << "\n";
  }
  if (tokenizer && !o.input.empty()) tokenizer->save(vocab_path);
  if (!vocab_path.empty()) manifest.vocab = fs::absolute(vocab_path);
  if (manifest_path.has_parent_path()) fs::create_directories(manifest_path.parent_path());
  manifest.save(manifest_path);
  out << "manifest: " << manifest_path.string() << "\n";

  const json config = {{"input", o.input}, {"tokens", o.tokens}, {"docs", o.docs}, {"subset", o.subset},
                       {"out", o.out}, {"out_dir", o.out_dir}, {"manifest", manifest_path.string()},
                       {"vocab", vocab_path.string()}, {"vocab_size", vocab_size}};
  std::vector<std::string> outputs;
  for (const auto& b : built) outputs.push_back(b["path"]);
  outputs.push_back(manifest_path.string());
  Run::write_provenance(fs::path(manifest_path).replace_extension(".provenance.json"), "build-index", config,
                        hash_config(config), json::object(), outputs);
  return kOk;
}

// ---------------------------------------------------------------------------
// count

struct CountOptions {
  std::string manifest = "manifest.json";
  std::vector<std::string> texts;
  std::vector<std::string> ids;
  bool expand = false;
  bool json_output = false;
  std::string out_dir = "ostd-runs";
};

std::vector<TokenId> parse_ids(const std::string& s) {
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto end = std::min(s.find_first_of(", ", pos), s.size());
    const auto piece = s.substr(pos, end - pos);
    if (!piece.empty()) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(piece, &used);
        if (used != piece.size() || v > 0xffffffffULL) throw std::out_of_range(piece);
        ids.push_back(static_cast<TokenId>(v));
      } catch (const std::exception&) {
        throw InvalidArgument("bad token id '" + piece + "'");
      }
    }
    pos = end + 1;
  }
  if (ids.empty()) throw InvalidArgument("empty token id list");
  return ids;
}

// Per-subset counts of a text; with expansion, summed over distinct variant
// token sequences. Pieces outside the vocabulary make a sequence count 0;
// `unknown` is set when no form of the text is in the vocabulary.
CountResult count_text_per_subset(const IndexSet& set, const std::string& text, bool expand, bool& unknown) {
  CountResult result;
  for (const auto& name : set.subset_names()) result.per_subset.push_back({name, 0});
  const auto variants = expand ? expand_phrase_variants(text) : std::vector<std::string>{text};
  std::set<std::vector<TokenId>> seen;
  bool any_pieces = false;
  bool any_known = false;
  for (const auto& v : variants) {
    if (split_surface(v).empty()) continue;
    any_pieces = true;
    const auto ids = set.tokenizer().try_encode(v);
    if (!ids) continue;
    any_known = true;
    if (!seen.insert(*ids).second) continue;
    const auto c = set.count(*ids);
    for (std::size_t i = 0; i < c.per_subset.size(); ++i) result.per_subset[i].count += c.per_subset[i].count;
    result.total += c.total;
  }
  if (!any_pieces) throw InvalidArgument("pattern text '" + text + "' has no tokens");
  unknown = !any_known;
  return result;
}

int cmd_count(const CountOptions& o, std::ostream& out, std::ostream& err) {
  if (o.texts.empty() && o.ids.empty()) throw InvalidArgument("pass --pattern-text or --pattern-ids");
  const auto set = IndexSet::open(o.manifest);
  const auto subsets = set.subset_names();

  std::vector<std::pair<std::string, CountResult>> rows;
  for (const auto& t : o.texts) {
    bool unknown = false;
    rows.emplace_back(t, count_text_per_subset(set, t, o.expand, unknown));
    if (unknown) err << "note: '" << t << "' is outside the vocabulary and counts 0\n";
  }
  for (const auto& s : o.ids) rows.emplace_back(s, set.count(parse_ids(s)));

  json results = json::array();
  for (const auto& [pattern, c] : rows) {
    json per = json::object();
    for (const auto& sc : c.per_subset) per[sc.subset] = sc.count;
    results.push_back({{"pattern", pattern}, {"counts", per}, {"total", c.total}});
  }
  if (o.json_output) {
    out << results.dump(2) << "\n";
  } else {
    out << "pattern";
    for (const auto& s : subsets) out << '\t' << s;
    out << "\ttotal\n";
    for (const auto& [pattern, c] : rows) {
      out << pattern;
      for (const auto& sc : c.per_subset) out << '\t' << sc.count;
      out << '\t' << c.total << "\n";
    }
  }

  Run run("count", o.out_dir,
          {{"manifest", fs::absolute(o.manifest).string()}, {"texts", o.texts}, {"ids", o.ids}, {"expand", o.expand}});
  write_text_file(run.path("counts.json"), results.dump(2) + "\n");
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct FeatureOptions {
  bool stopword_filter = false;
  double epsilon = 1e-8;
  double frac_threshold = 0.66;
  bool allow_missing_logprobs = false;
};

FeatureConfig make_feature_config(const FeatureOptions& o) {
  FeatureConfig c;
  c.score.epsilon = o.epsilon;
  c.frac_threshold = o.frac_threshold;
  c.require_logprobs = !o.allow_missing_logprobs;
  if (o.stopword_filter) {
    c.prompt_raw_filter = StopwordMode::kRawFrac;
    c.prompt_ng_filter = StopwordMode::kFinalToken;
  }
  return c;
}

json feature_config_json(const FeatureOptions& o) {
  return {{"stopword_filter", o.stopword_filter}, {"epsilon", o.epsilon}, {"frac_threshold", o.frac_threshold},
          {"allow_missing_logprobs", o.allow_missing_logprobs}};
}

struct DatasetOptions {
  std::string features_csv;
  std::string flags;
  std::string labels;
  std::string criterion;
};

LabeledDataset load_labeled(const DatasetOptions& o) {
  const auto table = read_feature_csv(o.features_csv);
  auto labels = read_labels(o.labels);
  if (labels.empty()) throw DataError("no labels in " + o.labels);
  if (!o.criterion.empty()) {
    const auto want = parse_criterion(o.criterion);
    for (const auto& l : labels) {
      if (l.criterion != want) {
        throw DataError("labels in " + o.labels + " use criterion '" + to_string(l.criterion) + "', not '" +
                        to_string(want) + "'");
      }
    }
  }
  fs::path flags = o.flags;
  if (flags.empty()) {
    const auto sibling = fs::path(o.features_csv).parent_path() / "features.flags.json";
    if (fs::exists(sibling)) flags = sibling;
  }
  if (flags.empty()) return join_features_labels(table, labels);
  const auto sidecar = read_feature_sidecar(flags);
  return join_features_labels(table, labels, &sidecar);
}

json dataset_config_json(const DatasetOptions& o) {
  return {{"features_csv", fs::absolute(o.features_csv).string()}, {"flags", o.flags},
          {"labels", fs::absolute(o.labels).string()}, {"criterion", o.criterion}};
}

IndexSet open_with_vocab(const std::string& manifest) {
  auto set = IndexSet::open(manifest);
  if (!set.has_tokenizer()) throw DataError("manifest " + manifest + " names no vocabulary");
  return set;
}

std::vector<QARecord> load_records(const std::string& dataset, const Tokenizer& tokenizer) {
  auto records = read_qa_records(dataset);
  tokenize_records(records, tokenizer);
  return records;
}

// ---------------------------------------------------------------------------
// ngram-stats

struct NgramStatsOptions {
  std::string manifest = "manifest.json";
  std::vector<std::string> texts;
  std::string dataset;
  std::vector<std::size_t> n = {1, 2, 3, 4, 5};
  std::string out_dir = "ostd-runs";
};

int cmd_ngram_stats(const NgramStatsOptions& o, std::ostream& out) {
  if (o.texts.empty() && o.dataset.empty()) throw InvalidArgument("pass --text or --dataset");
  const auto set = open_with_vocab(o.manifest);
  const auto& tok = set.tokenizer();
  std::vector<std::vector<TokenId>> sequences;
  for (const auto& t : o.texts) sequences.push_back(tok.encode_known(t));
  if (!o.dataset.empty()) {
    for (const auto& r : load_records(o.dataset, tok)) sequences.push_back(r.question_tokens);
  }

  std::string csv = "n,gram_decoded";
  for (const auto& s : set.subset_names()) csv += "," + csv_quote(s);
  csv += ",total\n";
  for (std::size_t n : o.n) {
    std::set<std::vector<TokenId>> seen;
    for (const auto& seq : sequences) {
      for (const auto& g : enumerate_ngrams(seq, n)) {
        if (!seen.insert(g.tokens).second) continue;
        const auto c = set.count(g.tokens);
        csv += std::to_string(n) + "," + csv_quote(tok.decode(g.tokens));
        for (const auto& sc : c.per_subset) csv += "," + std::to_string(sc.count);
        csv += "," + std::to_string(c.total) + "\n";
      }
    }
  }
  out << csv;
  Run run("ngram-stats", o.out_dir,
          {{"manifest", fs::absolute(o.manifest).string()}, {"texts", o.texts}, {"dataset", o.dataset}, {"n", o.n}});
  write_text_file(run.path("ngram_stats.csv"), csv);
  run.finish();
  return kOk;
}

// ---------------------------------------------------------------------------
// features

struct FeaturesCmdOptions {
  std::string manifest = "manifest.json";
  std::string dataset;
  FeatureOptions features;
  std::string out_dir = "ostd-runs";
};

int cmd_features(const FeaturesCmdOptions& o, std::ostream& out) {
  const auto set = open_with_vocab(o.manifest);
  const auto records = load_records(o.dataset, set.tokenizer());
  std::vector<FeatureVector> rows;
  try {
    rows = assemble_all(records, set, set.tokenizer(), make_feature_config(o.features));
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("feature assembly failed: ") + e.what());
  }
  std::vector<std::string> ids;
  std::vector<std::size_t> gen_lengths;
  for (const auto& r : records) {
    ids.push_back(r.id);
    gen_lengths.push_back(r.generation_tokens.size());
  }
  json config = {{"manifest", fs::absolute(o.manifest).string()}, {"dataset", fs::absolute(o.dataset).string()},
                 {"features", feature_config_json(o.features)}};
  Run run("features", o.out_dir, config);
  write_feature_csv(run.path("features.csv"), ids, rows);
  write_feature_sidecar(run.path("features.flags.json"), ids, rows, gen_lengths);
  run.finish();
  out << "features: " << (run.dir() / "features.csv").string() << " (" << rows.size() << " records)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// label

struct LabelOptions {
  std::string dataset;
  std::string criterion;
  double rouge_threshold = kRougeThreshold;
  std::string out_dir = "ostd-runs";
};

int cmd_label(const LabelOptions& o, std::ostream& out) {
  const auto criterion = parse_criterion(o.criterion);
  const auto records = read_qa_records(o.dataset);
  std::vector<LabelRow> rows;
  std::size_t faithful = 0;
  for (const auto& r : records) {
    if (r.references.empty()) throw DataError("record " + r.id + " has no references");
    const auto res = label_generation(r.generation, r.references, criterion, o.rouge_threshold);
    rows.push_back({r.id, res.label, criterion, res.rouge_l});
    faithful += res.label == Label::kFaithful;
  }
  Run run("label", o.out_dir,
          {{"dataset", fs::absolute(o.dataset).string()}, {"criterion", to_string(criterion)},
           {"rouge_threshold", o.rouge_threshold}});
  write_labels(run.path("labels.jsonl"), rows);
  run.finish();
  out << "labels: " << (run.dir() / "labels.jsonl").string() << " (" << faithful << " faithful, "
      << rows.size() - faithful << " hallucinated)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train-eval

struct TrainEvalOptions {
  DatasetOptions data;
  std::vector<std::string> features = {"full"};
  std::vector<std::string> models = {"tree"};
  std::vector<std::size_t> depths = {3};
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::string family = "all";
  double train_fraction = 0.8;
  bool log1p_counts = false;
  std::string out_dir = "ostd-runs";
};

int cmd_train_eval(const TrainEvalOptions& o, std::ostream& out) {
  const auto dataset = load_labeled(o.data);
  const auto family = parse_occurrence_family(o.family);

  std::vector<AccuracyRow> table;
  json runs = json::array();
  for (const auto& model_name : o.models) {
    const auto kind = parse_model_kind(model_name);
    const std::vector<std::size_t> depths = kind == ModelKind::kTree ? o.depths : std::vector<std::size_t>{0};
    for (std::size_t depth : depths) {
      for (const auto& fs_name : o.features) {
        const auto fset = parse_feature_set(fs_name);
        if (kind == ModelKind::kThreshold && fset != FeatureSet::kLogprobOnly) continue;
        ProtocolConfig cfg;
        cfg.features = fset;
        cfg.family = family;
        cfg.model.kind = kind;
        cfg.model.depth = depth;
        cfg.seeds = o.seeds;
        cfg.master_seed = o.seed;
        cfg.train_fraction = o.train_fraction;
        cfg.log1p_counts = o.log1p_counts;
        const auto result = run_protocol(dataset, cfg);
        AccuracyRow row{cfg.model.display_name(), to_string(fset), result.mean, result.stddev, {}};
        for (const auto& r : result.runs) {
          row.per_seed.push_back(r.test_accuracy);
          runs.push_back({{"model", row.model}, {"features", row.features}, {"seed_index", r.index},
                          {"fit_seed", r.seed}, {"features_used", r.features_used},
                          {"train_size", r.train_size}, {"test_size", r.test_size},
                          {"train_accuracy", r.train_accuracy}, {"test_accuracy", r.test_accuracy}});
        }
        table.push_back(std::move(row));
      }
    }
  }
  if (table.empty()) throw InvalidArgument("no valid model/feature-set combination requested");

  EvalReport report;
  report.dataset = fs::path(o.data.features_csv).string();
  report.criterion = to_string(dataset.criterion);
  report.rng_algorithm = Rng::kAlgorithm;
  report.accuracy = table;
  const auto m = dataset.matrix();
  const auto labels = dataset.labels();
  std::vector<std::pair<std::string, std::vector<RocPoint>>> curves;
  if (has_both_classes(labels)) {
    for (std::size_t c = 0; c < dataset.feature_names.size(); ++c) {
      const auto col = m.column(c);
      report.auroc.emplace_back(dataset.feature_names[c], auroc(col, labels));
      curves.emplace_back(dataset.feature_names[c], roc_curve(col, labels));
    }
  }

  json config = {{"data", dataset_config_json(o.data)}, {"features", o.features}, {"models", o.models},
                 {"depths", o.depths}, {"seeds", o.seeds}, {"seed", o.seed}, {"family", o.family},
                 {"train_fraction", o.train_fraction}, {"log1p_counts", o.log1p_counts}};
  Run run("train-eval", o.out_dir, config);
  run.set_seeds({{"master", o.seed}, {"count", o.seeds}});
  const auto csv = accuracy_csv(table);
  write_text_file(run.path("accuracy.csv"), csv);
  json report_json = json::parse(report.to_json());
  report_json["runs"] = runs;
  write_text_file(run.path("report.json"), report_json.dump(2) + "\n");
  write_roc_csv(run.path("roc.csv"), curves);
  run.finish();
  out << csv;
  return kOk;
}

// ---------------------------------------------------------------------------
// bootstrap and tree dump

struct SplitOptions {
  DatasetOptions data;
  std::string features = "full";
  std::string family = "all";
  std::size_t depth = 3;
  std::uint64_t seed = 0;
  std::size_t seed_index = 0;
  double train_fraction = 0.8;
  bool log1p_counts = false;
  std::string out_dir = "ostd-runs";
};

ProtocolConfig split_config(const SplitOptions& o) {
  ProtocolConfig cfg;
  cfg.features = parse_feature_set(o.features);
  cfg.family = parse_occurrence_family(o.family);
  cfg.model.kind = ModelKind::kTree;
  cfg.model.depth = o.depth;
  cfg.master_seed = o.seed;
  cfg.seeds = o.seed_index + 1;
  cfg.train_fraction = o.train_fraction;
  cfg.log1p_counts = o.log1p_counts;
  return cfg;
}

json split_config_json(const SplitOptions& o) {
  return {{"data", dataset_config_json(o.data)}, {"features", o.features}, {"family", o.family},
          {"depth", o.depth}, {"seed", o.seed}, {"seed_index", o.seed_index},
          {"train_fraction", o.train_fraction}, {"log1p_counts", o.log1p_counts}};
}

int cmd_bootstrap(const SplitOptions& o, std::size_t runs, std::ostream& out) {
  const auto split = prepare_split(load_labeled(o.data), split_config(o), o.seed_index);
  const auto result = bootstrap_consistency(split.train_x, split.train_y, split.test_x, runs, o.depth, split.seed);

  json rows = json::array();
  for (std::size_t i = 0; i < split.test_ids.size(); ++i) {
    const auto v = result.faithful_votes[i];
    rows.push_back({{"id", split.test_ids[i]}, {"faithful_votes", v}, {"hallucinated_votes", runs - v},
                    {"unanimous", v == 0 || v == runs}});
  }
  const json doc = {{"consistency", result.consistency}, {"runs", runs}, {"depth", o.depth},
                    {"features", split.feature_names}, {"test_rows", rows}};
  json config = split_config_json(o);
  config["runs"] = runs;
  Run run("bootstrap", o.out_dir, config);
  run.set_seeds({{"master", o.seed}, {"seed_index", o.seed_index}, {"bootstrap", split.seed}});
  write_text_file(run.path("consistency.json"), doc.dump(2) + "\n");
  run.finish();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.consistency);
  out << "consistency " << buf << " (" << runs << " runs, depth " << o.depth << ", features "
      << join(split.feature_names, ",") << ")\n";
  return kOk;
}

int cmd_tree_dump(const SplitOptions& o, std::ostream& out) {
  const auto split = prepare_split(load_labeled(o.data), split_config(o), o.seed_index);
  const auto tree = fit_tree(split.train_x, split.train_y, o.depth);
  const auto text = tree.dump(split.feature_names);
  Run run("tree-dump", o.out_dir, split_config_json(o));
  run.set_seeds({{"master", o.seed}, {"seed_index", o.seed_index}});
  write_text_file(run.path("tree.txt"), text);
  run.finish();
  out << text;
  return kOk;
}

// ---------------------------------------------------------------------------
// sparsity

struct SparsityOptions {
  std::string manifest = "manifest.json";
  std::string dataset;
  std::vector<std::size_t> n = {1, 2, 3, 4, 5};
  std::size_t examples = 3;
  bool no_key_phrases = false;
  std::string out_dir = "ostd-runs";
};

int cmd_sparsity(const SparsityOptions& o, std::ostream& out) {
  const auto set = open_with_vocab(o.manifest);
  const auto records = load_records(o.dataset, set.tokenizer());
  if (records.empty()) throw DataError("no records in " + o.dataset);
  std::vector<std::vector<TokenId>> questions;
  std::vector<std::vector<std::string>> phrases;
  bool any_phrases = false;
  for (const auto& r : records) {
    questions.push_back(r.question_tokens);
    phrases.push_back(r.key_phrases.value_or(std::vector<std::string>{}));
    any_phrases = any_phrases || r.key_phrases.has_value();
  }
  const auto name = fs::path(o.dataset).stem().string();
  const auto report = sparsity_report(name, questions, set, o.n, &set.tokenizer(), o.examples,
                                      any_phrases && !o.no_key_phrases
                                          ? std::span<const std::vector<std::string>>(phrases)
                                          : std::span<const std::vector<std::string>>());
  const auto text = report.to_json();
  Run run("sparsity", o.out_dir,
          {{"manifest", fs::absolute(o.manifest).string()}, {"dataset", fs::absolute(o.dataset).string()},
           {"n", o.n}, {"examples", o.examples}, {"key_phrases", !o.no_key_phrases}});
  write_text_file(run.path("sparsity.json"), text + "\n");
  run.finish();
  out << text << "\n";
  return kOk;
}

void add_out_dir(CLI::App* sub, std::string& out_dir) {
  sub->add_option("--out-dir", out_dir, "Directory that receives the run directory <command>-<config hash>")
      ->capture_default_str();
}

void add_dataset_options(CLI::App* sub, DatasetOptions& o) {
  sub->add_option("--features-csv", o.features_csv, "Feature matrix CSV written by `features`")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--labels", o.labels, "Labels JSON-lines written by `label`")->required()->check(CLI::ExistingFile);
  sub->add_option("--flags", o.flags,
                  "Undefined-flag sidecar (default: features.flags.json next to the CSV). Supplies generation "
                  "lengths; records under two tokens are excluded from splits");
  sub->add_option("--criterion", o.criterion, "Require labels of this criterion: em | rougel");
}

void add_split_options(CLI::App* sub, SplitOptions& o) {
  add_dataset_options(sub, o.data);
  sub->add_option("--features", o.features, "Feature set: logprob | full")->capture_default_str();
  sub->add_option("--family", o.family, "Occurrence family for best-feature selection: all | raw | ngram")
      ->capture_default_str();
  sub->add_option("--depth", o.depth, "Tree depth")->capture_default_str()->check(CLI::Range(1, 64));
  sub->add_option("--seed", o.seed, "Master seed (required)")->required();
  sub->add_option("--seed-index", o.seed_index, "Which protocol seed's split to use")->capture_default_str();
  sub->add_option("--train-fraction", o.train_fraction, "Training fraction of the balanced split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--log1p-counts", o.log1p_counts, "Apply log1p to raw-count features before standardizing");
  add_out_dir(sub, o.out_dir);
}

void add_feature_options(CLI::App* sub, FeatureOptions& o) {
  sub->add_flag("--stopword-filter", o.stopword_filter,
                "Filter prompt grams: stopword fraction > --frac-threshold for raw scores, final-token rule "
                "for n-gram scores");
  sub->add_option("--epsilon", o.epsilon, "Additive smoothing for the n-gram score")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--frac-threshold", o.frac_threshold, "Stopword fraction threshold (strict >)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--allow-missing-logprobs", o.allow_missing_logprobs,
                "Default missing log-probabilities to 0 and flag them instead of failing");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus-occurrence indexing and hallucination-feature toolkit.\n"
               "Exit codes: 0 ok, 2 usage, 3 I/O, 4 data validation. OSTD_THREADS caps worker threads."};
  app.name(args.empty() ? "ostd" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.set_version_flag("--version", OSTD_VERSION);

  BuildIndexOptions bi;
  auto* build = app.add_subcommand("build-index", "Tokenize documents and write suffix-array index files");
  build->add_option("--input", bi.input, "Text documents, JSON-lines {\"text\", \"subset\"}")->check(CLI::ExistingFile);
  build->add_option("--tokens", bi.tokens, "Pre-tokenized token file (OSTDTOK1)")->check(CLI::ExistingFile);
  build->add_option("--docs", bi.docs, "Document manifest for --tokens, JSON-lines {\"length\", \"subset\"}")
      ->check(CLI::ExistingFile);
  build->add_option("--subset", bi.subset, "Build only this subset; documents without a subset join it");
  build->add_option("--out", bi.out, "Index file for a single subset");
  build->add_option("--out-dir", bi.out_dir, "Directory for <subset>.idx files");
  build->add_option("--manifest", bi.manifest, "Manifest to create or update (default: manifest.json next to the output)");
  build->add_option("--vocab", bi.vocab, "Vocabulary JSON (default: the manifest's, else vocab.json next to it)");
  build->add_option("--vocab-size", bi.vocab_size, "Alphabet size for --tokens without --vocab (default: max id + 1)");

  CountOptions co;
  auto* count = app.add_subcommand("count", "Count exact occurrences of token sequences in every subset");
  count->add_option("--manifest", co.manifest, "Index manifest")->capture_default_str();
  count->add_option("--pattern-text", co.texts, "Pattern text (repeatable)");
  count->add_option("--pattern-ids", co.ids, "Pattern as comma-separated token ids (repeatable)");
  count->add_flag("--expand-variants", co.expand, "Sum over case and leading-space variants of the text");
  count->add_flag("--json", co.json_output, "Print JSON instead of a table");
  add_out_dir(count, co.out_dir);

  NgramStatsOptions ns;
  auto* ngram = app.add_subcommand("ngram-stats", "Per-subset counts of every n-gram of texts or dataset questions (CSV)");
  ngram->add_option("--manifest", ns.manifest, "Index manifest")->capture_default_str();
  ngram->add_option("--text", ns.texts, "Text to enumerate (repeatable)");
  ngram->add_option("--dataset", ns.dataset, "QA JSON-lines; questions are enumerated")->check(CLI::ExistingFile);
  ngram->add_option("--n", ns.n, "n values")->delimiter(',')->capture_default_str()->check(CLI::Range(1, 64));
  add_out_dir(ngram, ns.out_dir);

  FeaturesCmdOptions fo;
  auto* features = app.add_subcommand("features", "Assemble the named feature vector of every QA record");
  features->add_option("--manifest", fo.manifest, "Index manifest (must name a vocabulary)")->capture_default_str();
  features->add_option("--dataset", fo.dataset, "QA JSON-lines")->required()->check(CLI::ExistingFile);
  add_feature_options(features, fo.features);
  add_out_dir(features, fo.out_dir);

  LabelOptions lo;
  auto* label = app.add_subcommand("label", "Label generations by exact match or ROUGE-L");
  label->add_option("--dataset", lo.dataset, "QA JSON-lines")->required()->check(CLI::ExistingFile);
  label->add_option("--criterion", lo.criterion, "em | rougel")->required();
  label->add_option("--rouge-threshold", lo.rouge_threshold, "Hallucinated iff ROUGE-L is strictly below")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_out_dir(label, lo.out_dir);

  TrainEvalOptions te;
  auto* train = app.add_subcommand("train-eval", "Seeded balanced-split accuracy protocol (mean and sample std)");
  add_dataset_options(train, te.data);
  train->add_option("--features", te.features, "Feature sets: logprob, full")->delimiter(',')->capture_default_str();
  train->add_option("--model", te.models, "Models: threshold, tree, nn")->delimiter(',')->capture_default_str();
  train->add_option("--depth", te.depths, "Tree depths")->delimiter(',')->capture_default_str()->check(CLI::Range(1, 64));
  train->add_option("--seeds", te.seeds, "Number of seeds")->capture_default_str()->check(CLI::Range(1, 1000));
  train->add_option("--seed", te.seed, "Master seed (required)")->required();
  train->add_option("--family", te.family, "Occurrence family for best-feature selection: all | raw | ngram")
      ->capture_default_str();
  train->add_option("--train-fraction", te.train_fraction, "Training fraction of the balanced split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train->add_flag("--log1p-counts", te.log1p_counts, "Apply log1p to raw-count features before standardizing");
  add_out_dir(train, te.out_dir);

  SplitOptions bo;
  std::size_t boot_runs = 200;
  auto* boot = app.add_subcommand("bootstrap", "Prediction consistency of trees fit on bootstrap resamples");
  add_split_options(boot, bo);
  boot->add_option("--runs", boot_runs, "Bootstrap runs")->capture_default_str()->check(CLI::Range(1, 100000));

  SparsityOptions so;
  auto* sparsity = app.add_subcommand("sparsity", "Percentage of zero-count question n-grams and key phrases (JSON)");
  sparsity->add_option("--manifest", so.manifest, "Index manifest (must name a vocabulary)")->capture_default_str();
  sparsity->add_option("--dataset", so.dataset, "QA JSON-lines")->required()->check(CLI::ExistingFile);
  sparsity->add_option("--n", so.n, "n values")->delimiter(',')->capture_default_str()->check(CLI::Range(1, 64));
  sparsity->add_option("--examples", so.examples, "Zero-count examples kept per row")->capture_default_str();
  sparsity->add_flag("--no-key-phrases", so.no_key_phrases, "Omit the key-phrase row");
  add_out_dir(sparsity, so.out_dir);

  SplitOptions to;
  auto* tree = app.add_subcommand("tree", "Decision tree inspection");
  tree->require_subcommand(1);
  auto* dump = tree->add_subcommand("dump", "Fit a tree on one protocol split and print it");
  add_split_options(dump, to);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (build->parsed()) return cmd_build_index(bi, out);
    if (count->parsed()) return cmd_count(co, out, err);
    if (ngram->parsed()) return cmd_ngram_stats(ns, out);
    if (features->parsed()) return cmd_features(fo, out);
    if (label->parsed()) return cmd_label(lo, out);
    if (train->parsed()) return cmd_train_eval(te, out);
    if (boot->parsed()) return cmd_bootstrap(bo, boot_runs, out);
    if (dump->parsed()) return cmd_tree_dump(to, out);
    if (sparsity->parsed()) return cmd_sparsity(so, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  err << "no subcommand ran\n";
  return kUsage;
}

}  // namespace ostd::cli
