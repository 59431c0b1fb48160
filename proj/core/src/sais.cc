#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ostd/error.h"
#include "ostd/suffix_index.h"

namespace ostd {
namespace {

using Index = std::int64_t;

template <class Char>
std::vector<Index> sort_naive(std::span<const Char> s) {
  const Index n = static_cast<Index>(s.size());
  std::vector<Index> sa(n);
  std::iota(sa.begin(), sa.end(), Index{0});
  std::sort(sa.begin(), sa.end(), [&](Index a, Index b) {
    return std::lexicographical_compare(s.begin() + a, s.end(), s.begin() + b, s.end());
  });
  return sa;
}

// Induced sorting over s[0..n) with symbols in [0, upper]. The end of the
// string acts as a virtual sentinel smaller than every symbol, so s[n-1] is
// always L-type.
template <class Char>
std::vector<Index> sais(std::span<const Char> s, Index upper) {
  const Index n = static_cast<Index>(s.size());
  if (n == 0) return {};
  if (n == 1) return {0};
  if (n < 16) return sort_naive(s);

  std::vector<Index> sa(n);
  std::vector<bool> is_s(n, false);
  for (Index i = n - 2; i >= 0; --i) {
    is_s[i] = s[i] == s[i + 1] ? is_s[i + 1] : s[i] < s[i + 1];
  }

  // Bucket boundaries. For symbol c: L-type suffixes fill from start_l[c],
  // S-type suffixes fill backwards from the bucket end.
  std::vector<Index> start_l(upper + 2, 0), start_s(upper + 2, 0);
  for (Index i = 0; i < n; ++i) {
    if (!is_s[i]) {
      ++start_s[s[i]];
    } else {
      ++start_l[s[i] + 1];
    }
  }
  for (Index c = 0; c <= upper; ++c) {
    start_s[c] += start_l[c];
    start_l[c + 1] += start_s[c];
  }
  // Now start_l[c] is the first row of bucket c, and start_s[c] is the first
  // row of the S-part of bucket c.

  auto is_lms = [&](Index i) { return i > 0 && is_s[i] && !is_s[i - 1]; };

  std::vector<Index> buf(upper + 2);
  auto induce = [&](std::span<const Index> lms) {
    std::fill(sa.begin(), sa.end(), Index{-1});
    std::copy(start_s.begin(), start_s.end(), buf.begin());
    for (Index d : lms) sa[buf[s[d]]++] = d;
    std::copy(start_l.begin(), start_l.end(), buf.begin());
    sa[buf[s[n - 1]]++] = n - 1;
    for (Index i = 0; i < n; ++i) {
      const Index v = sa[i];
      if (v >= 1 && !is_s[v - 1]) sa[buf[s[v - 1]]++] = v - 1;
    }
    std::copy(start_l.begin(), start_l.end(), buf.begin());
    for (Index i = n - 1; i >= 0; --i) {
      const Index v = sa[i];
      if (v >= 1 && is_s[v - 1]) sa[--buf[s[v - 1] + 1]] = v - 1;
    }
  };

  std::vector<Index> lms_rank(n, -1);
  std::vector<Index> lms;
  for (Index i = 1; i < n; ++i) {
    if (is_lms(i)) {
      lms_rank[i] = static_cast<Index>(lms.size());
      lms.push_back(i);
    }
  }
  const Index m = static_cast<Index>(lms.size());

  induce(lms);

  if (m > 0) {
    std::vector<Index> sorted_lms;
    sorted_lms.reserve(m);
    for (Index v : sa) {
      if (lms_rank[v] != -1) sorted_lms.push_back(v);
    }

    // Name LMS substrings; equal substrings share a name.
    std::vector<Index> reduced(m);
    Index name = 0;
    reduced[lms_rank[sorted_lms[0]]] = 0;
    for (Index k = 1; k < m; ++k) {
      Index l = sorted_lms[k - 1];
      Index r = sorted_lms[k];
      const Index end_l = lms_rank[l] + 1 < m ? lms[lms_rank[l] + 1] : n;
      const Index end_r = lms_rank[r] + 1 < m ? lms[lms_rank[r] + 1] : n;
      bool same = true;
      if (end_l - l != end_r - r) {
        same = false;
      } else {
        while (l < end_l && s[l] == s[r]) {
          ++l;
          ++r;
        }
        if (l == n || s[l] != s[r]) same = false;
      }
      if (!same) ++name;
      reduced[lms_rank[sorted_lms[k]]] = name;
    }

    const auto reduced_sa = sais<Index>(std::span<const Index>(reduced), name);
    for (Index k = 0; k < m; ++k) sorted_lms[k] = lms[reduced_sa[k]];
    induce(sorted_lms);
  }
  return sa;
}

}  // namespace

std::vector<std::uint64_t> build_suffix_array(std::span<const TokenId> text,
                                              std::uint32_t alphabet_size) {
  if (alphabet_size == 0) throw InvalidArgument("alphabet_size must be positive");
  for (TokenId t : text) {
    if (t >= alphabet_size) throw InvalidArgument("symbol outside alphabet");
  }
  const auto sa = sais<TokenId>(text, static_cast<Index>(alphabet_size) - 1);
  return std::vector<std::uint64_t>(sa.begin(), sa.end());
}

}  // namespace ostd
