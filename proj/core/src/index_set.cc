#include "ostd/index_set.h"

#include <fstream>
#include <nlohmann/json.hpp>

#include "ostd/error.h"
#include "ostd/ngram_stats.h"

namespace ostd {

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", std::string()) != "ostd-manifest-v1") {
      throw DataError("unsupported manifest format in " + path.string());
    }
    const auto version = j.at("index_format_version").get<std::uint32_t>();
    if (version != kIndexFormatVersion) {
      throw DataError("manifest " + path.string() + " targets index format version " +
                      std::to_string(version));
    }
    if (j.contains("vocab") && !j["vocab"].is_null()) m.vocab = j["vocab"].get<std::string>();
    for (const auto& s : j.at("subsets")) {
      m.subsets.push_back({s.at("name").get<std::string>(), s.at("path").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  if (!m.vocab.empty() && m.vocab.is_relative()) m.vocab = base / m.vocab;
  for (auto& s : m.subsets) {
    if (s.path.is_relative()) s.path = base / s.path;
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    return std::filesystem::relative(std::filesystem::absolute(p), std::filesystem::absolute(base))
        .generic_string();
  };
  nlohmann::ordered_json j;
  j["format"] = "ostd-manifest-v1";
  j["index_format_version"] = kIndexFormatVersion;
  j["vocab"] = vocab.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(rel(vocab));
  j["subsets"] = nlohmann::ordered_json::array();
  for (const auto& s : subsets) j["subsets"].push_back({{"name", s.name}, {"path", rel(s.path)}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

void Manifest::upsert(ManifestEntry entry) {
  for (auto& s : subsets) {
    if (s.name == entry.name) {
      s = std::move(entry);
      return;
    }
  }
  subsets.push_back(std::move(entry));
}

IndexSet::IndexSet(std::vector<SuffixIndex> indexes, std::shared_ptr<const Tokenizer> tokenizer)
    : indexes_(std::move(indexes)), tokenizer_(std::move(tokenizer)) {
  check_compatible(indexes_);
  if (tokenizer_ && tokenizer_->vocab_size() != indexes_.front().corpus().vocab_size()) {
    throw DataError("vocabulary has " + std::to_string(tokenizer_->vocab_size()) +
                    " entries but indexes were built with vocab_size " +
                    std::to_string(indexes_.front().corpus().vocab_size()));
  }
}

IndexSet IndexSet::open(const std::filesystem::path& manifest_path) {
  const auto manifest = Manifest::load(manifest_path);
  if (manifest.subsets.empty()) throw DataError("manifest lists no subsets: " + manifest_path.string());
  std::vector<SuffixIndex> indexes;
  for (const auto& s : manifest.subsets) {
    if (!std::filesystem::exists(s.path)) {
      throw IoError("index file for subset '" + s.name + "' not found: " + s.path.string());
    }
    try {
      indexes.push_back(SuffixIndex::load(s.path, s.name));
    } catch (const CorruptFileError& e) {
      throw CorruptFileError(e.kind(), "index for subset '" + s.name + "'", s.path.string());
    }
  }
  std::shared_ptr<const Tokenizer> tokenizer;
  if (!manifest.vocab.empty()) {
    tokenizer = std::make_shared<const WordTokenizer>(WordTokenizer::load(manifest.vocab));
  }
  return IndexSet(std::move(indexes), std::move(tokenizer));
}

std::vector<std::string> IndexSet::subset_names() const {
  std::vector<std::string> names;
  for (const auto& idx : indexes_) names.push_back(idx.subset_name());
  return names;
}

const Tokenizer& IndexSet::tokenizer() const {
  if (!tokenizer_) throw InvalidArgument("index set has no vocabulary");
  return *tokenizer_;
}

CountResult IndexSet::count(std::span<const TokenId> pattern) const {
  return count_across_subsets(indexes_, pattern);
}

std::vector<CountResult> IndexSet::count_batch(
    std::span<const std::vector<TokenId>> patterns) const {
  std::vector<CountResult> out;
  out.reserve(patterns.size());
  for (const auto& p : patterns) out.push_back(count(p));
  return out;
}

std::uint64_t IndexSet::total_count(std::span<const TokenId> pattern) const {
  std::uint64_t total = 0;
  for (const auto& idx : indexes_) total += idx.count(pattern);
  return total;
}

std::uint64_t IndexSet::count_text(std::string_view text, bool expand_variants) const {
  const auto& tok = tokenizer();
  if (split_surface(text).empty()) throw InvalidArgument("text tokenizes to an empty pattern");
  if (expand_variants) return phrase_total_count(text, *this, tok);
  auto ids = tok.try_encode(text);
  if (!ids) throw UnknownTokenError(std::string(text));
  return count(*ids).total;
}

}  // namespace ostd
