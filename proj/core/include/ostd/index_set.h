#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ostd/suffix_index.h"
#include "ostd/tokenizer.h"

namespace ostd {

// Source of total (cross-subset) n-gram counts. The index-backed
// implementation is IndexSet; tests substitute a linear-scan counter.
class NgramCounter {
 public:
  virtual ~NgramCounter() = default;
  virtual std::uint64_t total_count(std::span<const TokenId> pattern) const = 0;
};

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;  // relative paths resolve against the manifest
};

// JSON manifest listing one index file per subset:
//   {"format": "ostd-manifest-v1", "index_format_version": 1,
//    "vocab": "vocab.json", "subsets": [{"name": ..., "path": ...}, ...]}
struct Manifest {
  std::filesystem::path vocab;
  std::vector<ManifestEntry> subsets;

  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Adds or replaces the entry with the same name.
  void upsert(ManifestEntry entry);
};

// All subset indexes named by a manifest, plus the vocabulary used to build
// them when the manifest names one. Read-only after construction.
class IndexSet final : public NgramCounter {
 public:
  IndexSet(std::vector<SuffixIndex> indexes, std::shared_ptr<const Tokenizer> tokenizer = nullptr);

  // Loads every listed index. Missing files raise IoError naming the path;
  // corrupt ones raise CorruptFileError naming the subset.
  static IndexSet open(const std::filesystem::path& manifest_path);

  std::span<const SuffixIndex> indexes() const { return indexes_; }
  std::vector<std::string> subset_names() const;
  bool has_tokenizer() const { return tokenizer_ != nullptr; }
  // Throws InvalidArgument when no vocabulary was loaded.
  const Tokenizer& tokenizer() const;

  CountResult count(std::span<const TokenId> pattern) const;
  std::vector<CountResult> count_batch(std::span<const std::vector<TokenId>> patterns) const;
  std::uint64_t total_count(std::span<const TokenId> pattern) const override;

  // Total count of `text`; with variant expansion, summed over the phrase's
  // capitalization and spacing variants. Text that tokenizes to nothing
  // raises InvalidArgument.
  std::uint64_t count_text(std::string_view text, bool expand_variants) const;

 private:
  std::vector<SuffixIndex> indexes_;
  std::shared_ptr<const Tokenizer> tokenizer_;
};

}  // namespace ostd
