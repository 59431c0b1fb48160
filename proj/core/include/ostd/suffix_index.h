#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ostd/corpus.h"

namespace ostd {

// Suffix array of `text` over the integer alphabet [0, alphabet_size) using
// induced sorting (SA-IS), linear time. A proper prefix sorts before its
// extensions. Every symbol must be < alphabet_size.
std::vector<std::uint64_t> build_suffix_array(std::span<const TokenId> text,
                                              std::uint32_t alphabet_size);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
// FNV-1a over the little-endian byte image of the tokens.
std::uint64_t token_checksum(std::span<const TokenId> tokens);

// Index file layout, little-endian:
//   "OSTDIDX1" | u32 version | u32 token_width=4 | u32 position_width=8 |
//   u32 vocab_size | u32 eos_id | u64 m | u64 checksum | m x u32 tokens |
//   m x u64 suffix array
inline constexpr char kIndexMagic[8] = {'O', 'S', 'T', 'D', 'I', 'D', 'X', '1'};
inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr std::size_t kIndexHeaderBytes = 8 + 4 * 5 + 8 * 2;

// Suffix array over one subset's token stream. Immutable and cheap to copy;
// safe for concurrent queries.
class SuffixIndex {
 public:
  // Throws InvalidArgument on an empty corpus.
  static SuffixIndex build(TokenCorpus corpus);

  // Loads and verifies an index file: magic, version, widths, exact size,
  // checksum, corpus structure, and that the suffix array is a permutation.
  // Each failure raises CorruptFileError with a distinct kind.
  static SuffixIndex load(const std::filesystem::path& path, std::string subset_name = {});
  void save(const std::filesystem::path& path) const;

  const TokenCorpus& corpus() const { return *corpus_; }
  std::span<const std::uint64_t> sa() const { return *sa_; }
  std::uint64_t checksum() const { return checksum_; }
  const std::string& subset_name() const { return corpus_->subset_name(); }
  std::uint64_t size() const { return corpus_->size(); }

  // Half-open range [first, last) of suffix-array rows whose suffix starts
  // with `pattern`.
  std::pair<std::uint64_t, std::uint64_t> equal_range(std::span<const TokenId> pattern) const;

  // Exact number of occurrences of `pattern`; O(|pattern| log m).
  // Throws InvalidArgument for an empty pattern.
  std::uint64_t count(std::span<const TokenId> pattern) const;

 private:
  SuffixIndex(std::shared_ptr<const TokenCorpus> corpus,
              std::shared_ptr<const std::vector<std::uint64_t>> sa, std::uint64_t checksum)
      : corpus_(std::move(corpus)), sa_(std::move(sa)), checksum_(checksum) {}

  std::shared_ptr<const TokenCorpus> corpus_;
  std::shared_ptr<const std::vector<std::uint64_t>> sa_;
  std::uint64_t checksum_ = 0;
};

struct SubsetCount {
  std::string subset;
  std::uint64_t count = 0;

  bool operator==(const SubsetCount&) const = default;
};

// Per-subset counts in index order plus their sum.
struct CountResult {
  std::vector<SubsetCount> per_subset;
  std::uint64_t total = 0;

  // Throws std::out_of_range for an unknown subset.
  std::uint64_t at(std::string_view subset) const;
  bool operator==(const CountResult&) const = default;
};

// Indexes are compatible when they share eos_id and vocab_size; otherwise
// DataError. Empty `indexes` or an empty pattern raise InvalidArgument.
void check_compatible(std::span<const SuffixIndex> indexes);
CountResult count_across_subsets(std::span<const SuffixIndex> indexes,
                                 std::span<const TokenId> pattern);

}  // namespace ostd
