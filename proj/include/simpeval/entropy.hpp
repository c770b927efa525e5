#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "simpeval/error.hpp"
#include "simpeval/suffix_index.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

enum class LogBase { base2, natural };

inline double log_in(LogBase base, double x) {
  return base == LogBase::base2 ? std::log2(x) : std::log(x);
}

/// Token frequencies over normalized tokens, in order of first occurrence.
struct BowDistribution {
  std::vector<std::pair<std::string, std::size_t>> counts;
  std::size_t n = 0;
};

inline BowDistribution bow_distribution(const TokenSequence& seq) {
  BowDistribution dist;
  std::unordered_map<std::string_view, std::size_t> index;
  for (const auto& t : seq) {
    auto [it, inserted] = index.try_emplace(t.normalized, dist.counts.size());
    if (inserted) dist.counts.emplace_back(t.normalized, 0);
    ++dist.counts[it->second].second;
  }
  dist.n = seq.size();
  return dist;
}

/// Shannon entropy of the token distribution in bits per token.
inline double bow_entropy(const BowDistribution& dist) {
  if (dist.counts.size() <= 1) return 0.0;
  const double n = static_cast<double>(dist.n);
  double h = 0.0;
  for (const auto& [word, count] : dist.counts) {
    const double p = static_cast<double>(count) / n;
    h += p * -std::log2(p);
  }
  return h;
}

inline double bow_entropy(const TokenSequence& seq) { return bow_entropy(bow_distribution(seq)); }

/// Match lengths l_1..l_N for positions 1..N of a sequence of length M - 1.
struct MatchLengthProfile {
  std::vector<std::size_t> match_lengths;
  std::size_t M = 0;
  std::size_t N = 0;

  friend bool operator==(const MatchLengthProfile&, const MatchLengthProfile&) = default;
};

namespace detail {

inline void require_sup_length(std::size_t length) {
  if (length < 2) {
    throw Error(ErrorCode::SequenceTooShort,
                "match-length estimation needs at least 2 tokens, got " + std::to_string(length));
  }
}

}  // namespace detail

/// Exhaustive O(M^2) scan: for each i, the longest match against any earlier
/// start j < i, plus one. Serves as the reference for the indexed variant.
inline MatchLengthProfile sup_match_lengths_naive(const TokenSequence& seq) {
  detail::require_sup_length(seq.size());
  const auto& tokens = seq.tokens();
  const std::size_t len = tokens.size();
  MatchLengthProfile profile;
  profile.M = len + 1;
  profile.N = profile.M / 2;
  profile.match_lengths.reserve(profile.N);
  for (std::size_t i = 1; i <= profile.N; ++i) {
    const std::size_t limit = len - i;
    std::size_t best = 0;
    for (std::size_t j = 0; j < i && best < limit; ++j) {
      std::size_t k = 0;
      while (k < limit && tokens[j + k].normalized == tokens[i + k].normalized) ++k;
      best = std::max(best, k);
    }
    profile.match_lengths.push_back(best + 1);
  }
  return profile;
}

/// Same profile as the naive scan, from a suffix array over the whole
/// sequence (O(M log M) construction, linear extraction).
inline MatchLengthProfile sup_match_lengths_indexed(const TokenSequence& seq) {
  detail::require_sup_length(seq.size());
  const auto lpf = longest_previous_factor(seq);
  MatchLengthProfile profile;
  profile.M = seq.size() + 1;
  profile.N = profile.M / 2;
  profile.match_lengths.reserve(profile.N);
  for (std::size_t i = 1; i <= profile.N; ++i) {
    profile.match_lengths.push_back(static_cast<std::size_t>(lpf[i]) + 1);
  }
  return profile;
}

/// Inverse of the mean of l_i / log(i + 1) over i = 1..N.
inline double sup_entropy(const MatchLengthProfile& profile, LogBase base = LogBase::base2) {
  if (profile.N == 0 || profile.match_lengths.size() < profile.N) {
    throw Error(ErrorCode::DegenerateHorizon, "evaluation horizon N is zero");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i <= profile.N; ++i) {
    sum += static_cast<double>(profile.match_lengths[i - 1]) /
           log_in(base, static_cast<double>(i + 1));
  }
  return static_cast<double>(profile.N) / sum;
}

struct EntropyResult {
  double bow_bits = 0.0;
  double sup_value = 0.0;
  LogBase log_base = LogBase::base2;
};

inline EntropyResult entropy(const TokenSequence& seq, LogBase base = LogBase::base2) {
  return {bow_entropy(seq), sup_entropy(sup_match_lengths_indexed(seq), base), base};
}

}  // namespace simpeval
