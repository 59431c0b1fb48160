#include "ostd/suffix_index.h"

#include <algorithm>
#include <stdexcept>

#include "binary_io.h"
#include "ostd/error.h"

namespace ostd {

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t token_checksum(std::span<const TokenId> tokens) {
  if constexpr (std::endian::native == std::endian::little) {
    return fnv1a64(std::span<const unsigned char>(
        reinterpret_cast<const unsigned char*>(tokens.data()), tokens.size_bytes()));
  } else {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (TokenId t : tokens) {
      unsigned char le[4] = {static_cast<unsigned char>(t), static_cast<unsigned char>(t >> 8),
                             static_cast<unsigned char>(t >> 16),
                             static_cast<unsigned char>(t >> 24)};
      h = fnv1a64(le, h);
    }
    return h;
  }
}

SuffixIndex SuffixIndex::build(TokenCorpus corpus) {
  if (corpus.size() == 0) throw InvalidArgument("cannot index an empty corpus");
  auto sa = build_suffix_array(corpus.tokens(), corpus.vocab_size());
  const auto checksum = token_checksum(corpus.tokens());
  return SuffixIndex(std::make_shared<const TokenCorpus>(std::move(corpus)),
                     std::make_shared<const std::vector<std::uint64_t>>(std::move(sa)), checksum);
}

void SuffixIndex::save(const std::filesystem::path& path) const {
  auto out = internal::open_for_write(path.string());
  internal::LittleEndianWriter w(out);
  w.bytes(kIndexMagic, sizeof(kIndexMagic));
  w.scalar<std::uint32_t>(kIndexFormatVersion);
  w.scalar<std::uint32_t>(sizeof(TokenId));
  w.scalar<std::uint32_t>(sizeof(std::uint64_t));
  w.scalar<std::uint32_t>(corpus_->vocab_size());
  w.scalar<std::uint32_t>(corpus_->eos_id());
  w.scalar<std::uint64_t>(corpus_->size());
  w.scalar<std::uint64_t>(checksum_);
  w.array(corpus_->tokens());
  w.array(sa());
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

SuffixIndex SuffixIndex::load(const std::filesystem::path& path, std::string subset_name) {
  const auto bytes = internal::read_file_bytes(path.string());
  internal::LittleEndianReader r(bytes, "index");

  auto magic = r.take(sizeof(kIndexMagic));
  if (!std::equal(magic.begin(), magic.end(), kIndexMagic)) {
    throw CorruptFileError(CorruptKind::kBadMagic, "index", path.string());
  }
  const auto version = r.scalar<std::uint32_t>();
  if (version != kIndexFormatVersion) {
    throw CorruptFileError(CorruptKind::kVersionMismatch, "index",
                           path.string() + ": version " + std::to_string(version) +
                               ", expected " + std::to_string(kIndexFormatVersion));
  }
  const auto token_width = r.scalar<std::uint32_t>();
  const auto position_width = r.scalar<std::uint32_t>();
  if (token_width != sizeof(TokenId) || position_width != sizeof(std::uint64_t)) {
    throw CorruptFileError(CorruptKind::kMalformed, "index",
                           path.string() + ": unsupported token/position width");
  }
  const auto vocab_size = r.scalar<std::uint32_t>();
  const auto eos_id = r.scalar<std::uint32_t>();
  const auto m = r.scalar<std::uint64_t>();
  const auto stored_checksum = r.scalar<std::uint64_t>();

  if (m == 0 || m > r.remaining() / (sizeof(TokenId) + sizeof(std::uint64_t))) {
    throw CorruptFileError(CorruptKind::kTruncated, "index",
                           path.string() + ": header declares " + std::to_string(m) +
                               " tokens but only " + std::to_string(r.remaining()) +
                               " payload bytes follow");
  }
  if (r.remaining() != m * (sizeof(TokenId) + sizeof(std::uint64_t))) {
    throw CorruptFileError(CorruptKind::kMalformed, "index", path.string() + ": trailing bytes");
  }

  const auto token_bytes = bytes.size() - r.remaining();
  const auto actual = fnv1a64(std::span<const unsigned char>(bytes).subspan(token_bytes, m * 4));
  if (actual != stored_checksum) {
    throw CorruptFileError(CorruptKind::kChecksumMismatch, "index",
                           path.string() + ": token section checksum does not match header");
  }
  auto tokens = r.array<TokenId>(m);
  auto sa = r.array<std::uint64_t>(m);

  std::vector<bool> seen(m, false);
  for (std::uint64_t p : sa) {
    if (p >= m || seen[p]) {
      throw CorruptFileError(CorruptKind::kMalformed, "index",
                             path.string() + ": suffix array is not a permutation");
    }
    seen[p] = true;
  }

  try {
    auto corpus = TokenCorpus::from_stream(std::move(tokens), std::move(subset_name), vocab_size,
                                           eos_id);
    return SuffixIndex(std::make_shared<const TokenCorpus>(std::move(corpus)),
                       std::make_shared<const std::vector<std::uint64_t>>(std::move(sa)),
                       stored_checksum);
  } catch (const CorruptFileError&) {
    throw;
  } catch (const DataError& e) {
    throw CorruptFileError(CorruptKind::kMalformed, "index", path.string() + ": " + e.what());
  }
}

std::pair<std::uint64_t, std::uint64_t> SuffixIndex::equal_range(
    std::span<const TokenId> pattern) const {
  const auto text = corpus_->tokens();
  const auto suffixes = sa();
  const std::uint64_t m = text.size();

  // Compares the suffix's first |pattern| symbols with the pattern: <0, 0, >0.
  auto compare = [&](std::uint64_t pos) {
    const std::uint64_t avail = m - pos;
    const std::uint64_t len = std::min<std::uint64_t>(avail, pattern.size());
    for (std::uint64_t k = 0; k < len; ++k) {
      if (text[pos + k] != pattern[k]) return text[pos + k] < pattern[k] ? -1 : 1;
    }
    return len < pattern.size() ? -1 : 0;
  };

  auto lo = std::partition_point(suffixes.begin(), suffixes.end(),
                                 [&](std::uint64_t pos) { return compare(pos) < 0; });
  auto hi = std::partition_point(lo, suffixes.end(),
                                 [&](std::uint64_t pos) { return compare(pos) == 0; });
  return {static_cast<std::uint64_t>(lo - suffixes.begin()),
          static_cast<std::uint64_t>(hi - suffixes.begin())};
}

std::uint64_t SuffixIndex::count(std::span<const TokenId> pattern) const {
  if (pattern.empty()) throw InvalidArgument("count of the empty pattern is undefined");
  if (pattern.size() > size()) return 0;
  auto [first, last] = equal_range(pattern);
  return last - first;
}

std::uint64_t CountResult::at(std::string_view subset) const {
  for (const auto& e : per_subset) {
    if (e.subset == subset) return e.count;
  }
  throw std::out_of_range("no subset named " + std::string(subset));
}

void check_compatible(std::span<const SuffixIndex> indexes) {
  if (indexes.empty()) throw InvalidArgument("at least one index is required");
  const auto& first = indexes.front().corpus();
  for (const auto& idx : indexes) {
    if (idx.corpus().vocab_size() != first.vocab_size() ||
        idx.corpus().eos_id() != first.eos_id()) {
      throw DataError("vocabulary mismatch between subsets '" + first.subset_name() + "' and '" +
                      idx.subset_name() + "'");
    }
  }
}

CountResult count_across_subsets(std::span<const SuffixIndex> indexes,
                                 std::span<const TokenId> pattern) {
  check_compatible(indexes);
  if (pattern.empty()) throw InvalidArgument("count of the empty pattern is undefined");
  CountResult result;
  result.per_subset.reserve(indexes.size());
  for (const auto& idx : indexes) {
    const auto c = idx.count(pattern);
    result.per_subset.push_back({idx.subset_name(), c});
    result.total += c;
  }
  return result;
}

}  // namespace ostd
