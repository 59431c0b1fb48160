#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "fixtures.h"
#include "oracles.h"
#include "ostd/error.h"
#include "ostd/rng.h"
#include "ostd/suffix_index.h"

namespace ostd {
namespace {

std::vector<std::uint64_t> sa_of(std::vector<TokenId> text, std::uint32_t alphabet) {
  return build_suffix_array(text, alphabet);
}

std::vector<unsigned char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

SuffixIndex index_of(std::vector<std::vector<TokenId>> docs, std::uint32_t vocab, std::string name = "s") {
  return SuffixIndex::build(flatten_corpus(docs, 0, std::move(name), vocab));
}

TEST(SuffixArray, SingleSymbol) { EXPECT_EQ(sa_of({7}, 8), (std::vector<std::uint64_t>{0})); }

TEST(SuffixArray, WorkedExample) {
  EXPECT_EQ(sa_of({1, 0, 2, 0, 2, 0}, 3), (std::vector<std::uint64_t>{5, 3, 1, 0, 4, 2}));
}

TEST(SuffixArray, ProperPrefixSortsFirst) {
  EXPECT_EQ(sa_of({1, 1, 1, 1}, 2), (std::vector<std::uint64_t>{3, 2, 1, 0}));
}

TEST(SuffixArray, MatchesNaiveSortOnRandomInputs) {
  Rng rng(11);
  for (std::uint32_t alphabet : {2u, 3u, 256u, 50000u}) {
    for (std::size_t n : {1u, 2u, 15u, 16u, 17u, 100u, 1000u, 10000u}) {
      const auto text = fixtures::random_tokens(rng, n, alphabet);
      ASSERT_EQ(build_suffix_array(text, alphabet), oracle::naive_suffix_array(text))
          << "alphabet " << alphabet << " n " << n;
    }
  }
}

TEST(SuffixArray, RepetitiveInputs) {
  std::vector<TokenId> text;
  for (int i = 0; i < 3000; ++i) text.push_back(i % 3 == 0 ? 1 : 2);
  EXPECT_EQ(build_suffix_array(text, 3), oracle::naive_suffix_array(text));
  std::vector<TokenId> fib = {1};
  std::vector<TokenId> prev = {2};
  while (fib.size() < 4000) {
    auto next = fib;
    next.insert(next.end(), prev.begin(), prev.end());
    prev = fib;
    fib = next;
  }
  EXPECT_EQ(build_suffix_array(fib, 3), oracle::naive_suffix_array(fib));
}

TEST(SuffixArray, RejectsSymbolsOutsideAlphabet) {
  const std::vector<TokenId> text = {1, 5};
  EXPECT_THROW(build_suffix_array(text, 5), InvalidArgument);
}

TEST(SuffixArray, BuildTimeIsNearLinear) {
  Rng rng(3);
  auto time_build = [&](std::size_t m) {
    const auto text = fixtures::random_tokens(rng, m, 50000);
    double best = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto sa = build_suffix_array(text, 50000);
      const auto t1 = std::chrono::steady_clock::now();
      EXPECT_EQ(sa.size(), m);
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double small = time_build(400000);
  const double large = time_build(800000);
  EXPECT_LE(large / small, 2.5) << small << " s vs " << large << " s";
}

TEST(Count, WorkedExample) {
  const auto idx = SuffixIndex::build(TokenCorpus({1, 0, 2, 0, 2, 0}, {0, 2, 4}, "s", 3, 0));
  const std::vector<TokenId> p = {0, 2, 0};
  EXPECT_EQ(idx.count(p), 2u);
}

TEST(Count, EmptyPatternIsRejectedAndLongPatternIsZero) {
  const auto idx = index_of({{1, 2}}, 3);
  EXPECT_THROW(idx.count(std::vector<TokenId>{}), InvalidArgument);
  EXPECT_EQ(idx.count(std::vector<TokenId>{1, 2, 0, 1}), 0u);
}

TEST(Count, RandomPatternsMatchScan) {
  Rng rng(5);
  const auto doc = fixtures::random_tokens(rng, 100000, 8, 1);
  const auto idx = index_of({doc}, 8);
  const auto text = idx.corpus().tokens();
  for (int i = 0; i < 1000; ++i) {
    const auto len = 1 + rng.uniform_below(6);
    std::vector<TokenId> p;
    if (i % 2 == 0) {
      const auto at = rng.uniform_below(text.size() - len);
      p.assign(text.begin() + at, text.begin() + at + len);
    } else {
      p = fixtures::random_tokens(rng, len, 8);
    }
    ASSERT_EQ(idx.count(p), oracle::scan_count(text, p));
  }
}

TEST(Count, NeverMatchesAcrossDocumentBoundaries) {
  Rng rng(9);
  std::vector<std::vector<TokenId>> docs(50);
  for (auto& d : docs) d = fixtures::random_tokens(rng, 1 + rng.uniform_below(8), 4, 1);
  const auto idx = index_of(docs, 4);
  const auto& c = idx.corpus();
  for (int i = 0; i < 300; ++i) {
    const auto p = fixtures::random_tokens(rng, 1 + rng.uniform_below(5), 4, 1);
    std::uint64_t within = 0;
    for (std::size_t d = 0; d < c.num_documents(); ++d) within += oracle::scan_count(c.document(d), p);
    ASSERT_EQ(idx.count(p), within);
  }
}

TEST(Count, EqualRangeRowsAllStartWithPattern) {
  const auto idx = index_of({{1, 2, 1, 2, 3}}, 4);
  const std::vector<TokenId> p = {1, 2};
  const auto [lo, hi] = idx.equal_range(p);
  EXPECT_EQ(hi - lo, 2u);
  for (auto r = lo; r < hi; ++r) EXPECT_EQ(idx.corpus().tokens()[idx.sa()[r]], 1u);
}

TEST(IndexFile, RoundTripIsByteIdentical) {
  const auto dir = fixtures::temp_dir("idx");
  Rng rng(1);
  const auto idx = index_of({fixtures::random_tokens(rng, 500, 30, 1), {4, 5}}, 30, "wiki");
  idx.save(dir / "a.idx");
  const auto back = SuffixIndex::load(dir / "a.idx", "wiki");
  back.save(dir / "b.idx");
  EXPECT_EQ(file_bytes(dir / "a.idx"), file_bytes(dir / "b.idx"));
  EXPECT_EQ(std::filesystem::file_size(dir / "a.idx"), kIndexHeaderBytes + 12 * idx.size());
  EXPECT_EQ(back.checksum(), idx.checksum());
  EXPECT_EQ(back.checksum(), token_checksum(idx.corpus().tokens()));
  EXPECT_TRUE(std::equal(back.sa().begin(), back.sa().end(), idx.sa().begin(), idx.sa().end()));
  EXPECT_EQ(back.subset_name(), "wiki");
}

TEST(IndexFile, HeaderLayout) {
  const auto dir = fixtures::temp_dir("idxhdr");
  index_of({{1, 2}}, 3).save(dir / "a.idx");
  const auto b = file_bytes(dir / "a.idx");
  ASSERT_GE(b.size(), kIndexHeaderBytes);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 8), "OSTDIDX1");
  auto u32 = [&](std::size_t at) { return b[at] | b[at + 1] << 8 | b[at + 2] << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24; };
  EXPECT_EQ(u32(8), 1u);   // version
  EXPECT_EQ(u32(12), 4u);  // token width
  EXPECT_EQ(u32(16), 8u);  // position width
  EXPECT_EQ(u32(20), 3u);  // vocab size
  EXPECT_EQ(u32(24), 0u);  // eos
  EXPECT_EQ(u32(28), 3u);  // m, low half
}

CorruptKind kind_after(const std::filesystem::path& p) {
  try {
    SuffixIndex::load(p);
  } catch (const CorruptFileError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "corruption not detected";
  return CorruptKind::kMalformed;
}

TEST(IndexFile, CorruptionKinds) {
  const auto dir = fixtures::temp_dir("idxbad");
  index_of({{1, 2, 3}, {2}}, 4).save(dir / "good.idx");
  const auto good = file_bytes(dir / "good.idx");
  const auto p = dir / "bad.idx";

  auto flip = [&](std::size_t at) {
    auto b = good;
    b[at] ^= 0x01;
    put_bytes(p, b);
  };
  flip(0);
  EXPECT_EQ(kind_after(p), CorruptKind::kBadMagic);
  flip(8);
  EXPECT_EQ(kind_after(p), CorruptKind::kVersionMismatch);
  flip(12);
  EXPECT_EQ(kind_after(p), CorruptKind::kMalformed);
  flip(36);
  EXPECT_EQ(kind_after(p), CorruptKind::kChecksumMismatch);
  flip(kIndexHeaderBytes);
  EXPECT_EQ(kind_after(p), CorruptKind::kChecksumMismatch);
  flip(good.size() - 8);  // suffix array entry
  EXPECT_EQ(kind_after(p), CorruptKind::kMalformed);

  auto b = good;
  b.resize(b.size() - 3);
  put_bytes(p, b);
  EXPECT_EQ(kind_after(p), CorruptKind::kTruncated);
  b = good;
  b.push_back(0);
  put_bytes(p, b);
  EXPECT_EQ(kind_after(p), CorruptKind::kMalformed);
  put_bytes(p, {'O', 'S'});
  EXPECT_EQ(kind_after(p), CorruptKind::kTruncated);

  EXPECT_THROW(SuffixIndex::load(dir / "none.idx"), IoError);
}

TEST(IndexFile, EveryTokenSectionByteFlipIsDetected) {
  const auto dir = fixtures::temp_dir("idxflip");
  Rng rng(2);
  index_of({fixtures::random_tokens(rng, 40, 10, 1)}, 10).save(dir / "good.idx");
  const auto good = file_bytes(dir / "good.idx");
  const auto m = (good.size() - kIndexHeaderBytes) / 12;
  for (std::size_t at = kIndexHeaderBytes; at < kIndexHeaderBytes + 4 * m; ++at) {
    for (unsigned char mask : {0x01, 0x80, 0xff}) {
      auto b = good;
      b[at] ^= mask;
      put_bytes(dir / "bad.idx", b);
      ASSERT_EQ(kind_after(dir / "bad.idx"), CorruptKind::kChecksumMismatch) << "byte " << at;
    }
  }
}

TEST(Checksum, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  const unsigned char a[] = {'a'};
  EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cULL);
  const unsigned char foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  EXPECT_EQ(fnv1a64(foobar), 0x85944171f73967e8ULL);
  const std::vector<TokenId> t = {1};
  const unsigned char le[] = {1, 0, 0, 0};
  EXPECT_EQ(token_checksum(t), fnv1a64(le));
}

TEST(CountAcrossSubsets, SumsPerSubset) {
  const std::vector<SuffixIndex> idx = {index_of({{1, 2, 1}}, 4, "wiki"), index_of({{1, 3}, {1}}, 4, "arxiv")};
  const std::vector<TokenId> p = {1};
  const auto r = count_across_subsets(idx, p);
  ASSERT_EQ(r.per_subset.size(), 2u);
  EXPECT_EQ(r.at("wiki"), 2u);
  EXPECT_EQ(r.at("arxiv"), 2u);
  EXPECT_EQ(r.total, 4u);
  EXPECT_THROW(r.at("c4"), std::out_of_range);
}

TEST(CountAcrossSubsets, RejectsIncompatibleVocabularies) {
  const std::vector<SuffixIndex> idx = {index_of({{1}}, 4, "a"), index_of({{1}}, 5, "b")};
  EXPECT_THROW(count_across_subsets(idx, std::vector<TokenId>{1}), DataError);
  EXPECT_THROW(count_across_subsets({}, std::vector<TokenId>{1}), InvalidArgument);
}

TEST(SuffixIndex, BuildRejectsEmptyCorpus) {
  EXPECT_THROW(SuffixIndex::build(flatten_corpus({}, 0, "s", 3)), InvalidArgument);
}

}  // namespace
}  // namespace ostd
