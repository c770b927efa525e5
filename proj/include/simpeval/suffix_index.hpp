#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simpeval/textcore.hpp"

namespace simpeval {

/// Maps normalized tokens to dense integer ids in order of first occurrence.
inline std::vector<uint32_t> intern_tokens(const TokenSequence& seq, uint32_t* alphabet_size = nullptr) {
  std::unordered_map<std::string_view, uint32_t> ids;
  ids.reserve(seq.size());
  std::vector<uint32_t> out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    auto [it, inserted] = ids.try_emplace(t.normalized, static_cast<uint32_t>(ids.size()));
    out.push_back(it->second);
  }
  if (alphabet_size) *alphabet_size = static_cast<uint32_t>(ids.size());
  return out;
}

/// Suffix array by prefix doubling with counting sorts, O(n log n).
/// Symbols must lie in [0, alphabet_size).
inline std::vector<int32_t> suffix_array(std::span<const uint32_t> text, uint32_t alphabet_size) {
  const int32_t n = static_cast<int32_t>(text.size());
  std::vector<int32_t> sa(n), rank(n), tmp(n), second(n);
  if (n == 0) return sa;
  std::vector<int32_t> count(std::max<int32_t>(static_cast<int32_t>(alphabet_size), n) + 1, 0);

  for (int32_t i = 0; i < n; ++i) rank[i] = static_cast<int32_t>(text[i]);
  {
    std::fill(count.begin(), count.end(), 0);
    for (int32_t i = 0; i < n; ++i) ++count[rank[i]];
    for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
    for (int32_t i = n - 1; i >= 0; --i) sa[--count[rank[i]]] = i;
  }
  // Dense ranks for the first pass.
  tmp[sa[0]] = 0;
  for (int32_t r = 1; r < n; ++r) tmp[sa[r]] = tmp[sa[r - 1]] + (rank[sa[r]] != rank[sa[r - 1]]);
  rank.swap(tmp);
  int32_t classes = rank[sa[n - 1]] + 1;

  for (int32_t k = 1; classes < n; k <<= 1) {
    // Order by the second key: suffixes without a partner come first.
    int32_t p = 0;
    for (int32_t i = n - k; i < n; ++i) second[p++] = i;
    for (int32_t r = 0; r < n; ++r) {
      if (sa[r] >= k) second[p++] = sa[r] - k;
    }
    std::fill(count.begin(), count.begin() + classes + 1, 0);
    for (int32_t i = 0; i < n; ++i) ++count[rank[i]];
    for (int32_t c = 1; c <= classes; ++c) count[c] += count[c - 1];
    for (int32_t r = n - 1; r >= 0; --r) sa[--count[rank[second[r]]]] = second[r];

    tmp[sa[0]] = 0;
    for (int32_t r = 1; r < n; ++r) {
      const int32_t a = sa[r - 1], b = sa[r];
      const int32_t ra = a + k < n ? rank[a + k] : -1;
      const int32_t rb = b + k < n ? rank[b + k] : -1;
      tmp[b] = tmp[a] + (rank[a] != rank[b] || ra != rb);
    }
    rank.swap(tmp);
    classes = rank[sa[n - 1]] + 1;
  }
  return sa;
}

/// Kasai et al.: lcp[r] = longest common prefix of suffixes sa[r-1] and sa[r]; lcp[0] = 0.
inline std::vector<int32_t> lcp_array(std::span<const uint32_t> text, std::span<const int32_t> sa) {
  const int32_t n = static_cast<int32_t>(text.size());
  std::vector<int32_t> rank(n), lcp(n, 0);
  for (int32_t r = 0; r < n; ++r) rank[sa[r]] = r;
  int32_t h = 0;
  for (int32_t i = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const int32_t j = sa[rank[i] - 1];
    while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
    lcp[rank[i]] = h;
    if (h > 0) --h;
  }
  return lcp;
}

/// Longest previous factor: lpf[i] is the longest k such that text[i, i+k)
/// also starts at some j < i (the occurrence may overlap position i).
///
/// One left-to-right pass over the suffix array with a stack of ranks whose
/// text positions increase; each popped suffix has just met the nearest
/// lexicographic neighbours that start earlier in the text on both sides.
inline std::vector<int32_t> longest_previous_factor(std::span<const uint32_t> text,
                                                    uint32_t alphabet_size) {
  const int32_t n = static_cast<int32_t>(text.size());
  std::vector<int32_t> lpf(n, 0);
  if (n == 0) return lpf;
  const auto sa = suffix_array(text, alphabet_size);
  const auto lcp = lcp_array(text, sa);

  struct Entry {
    int32_t rank;
    int32_t lcp_below;  // lcp with the entry beneath it on the stack
  };
  std::vector<Entry> stack;
  stack.reserve(64);
  for (int32_t r = 0; r <= n; ++r) {
    int32_t cur = r < n ? lcp[r] : 0;
    while (!stack.empty() && (r == n || sa[r] < sa[stack.back().rank])) {
      const Entry top = stack.back();
      stack.pop_back();
      lpf[sa[top.rank]] = std::max(top.lcp_below, cur);
      cur = std::min(top.lcp_below, cur);
    }
    if (r < n) stack.push_back({r, stack.empty() ? 0 : cur});
  }
  return lpf;
}

inline std::vector<int32_t> longest_previous_factor(const TokenSequence& seq) {
  uint32_t sigma = 0;
  const auto ids = intern_tokens(seq, &sigma);
  return longest_previous_factor(ids, sigma);
}

}  // namespace simpeval
