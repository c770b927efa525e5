#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpeval/error.hpp"
#include "simpeval/suffix_index.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

enum class BleuScale { percent, unit };

struct BleuConfig {
  int max_order = 4;
  // 0 disables smoothing; otherwise zero-match orders use epsilon / total.
  double epsilon = 0.0;
  BleuScale scale = BleuScale::percent;
};

struct OverlapResult {
  double score = 0.0;
  std::vector<double> precisions;
  double brevity_penalty = 1.0;
  std::size_t lcs_length = 0;
  double precision = 0.0;  // ROUGE-L only
  double recall = 0.0;     // ROUGE-L only
  bool degenerate = false;
};

namespace detail {

using NgramCounts = std::map<std::vector<uint32_t>, std::size_t>;

inline NgramCounts count_ngrams(std::span<const uint32_t> ids, std::size_t order) {
  NgramCounts counts;
  if (ids.size() < order) return counts;
  for (std::size_t i = 0; i + order <= ids.size(); ++i) {
    ++counts[std::vector<uint32_t>(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                   ids.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return counts;
}

// Shared id space for a hypothesis/reference pair.
inline std::pair<std::vector<uint32_t>, std::vector<uint32_t>> intern_pair(const TokenSequence& a,
                                                                           const TokenSequence& b) {
  std::vector<Token> joined(a.tokens());
  joined.insert(joined.end(), b.begin(), b.end());
  auto ids = intern_tokens(TokenSequence(std::move(joined)));
  std::vector<uint32_t> second(ids.begin() + static_cast<std::ptrdiff_t>(a.size()), ids.end());
  ids.resize(a.size());
  return {std::move(ids), std::move(second)};
}

}  // namespace detail

/// Document-level BLEU against a single reference.
///
/// Orders the reference is too short to contain are left out of the geometric
/// mean, so any non-empty hypothesis identical to its reference scores the
/// maximum. An order the reference has but the hypothesis lacks counts as a
/// zero precision.
inline OverlapResult bleu(const TokenSequence& hypothesis, const TokenSequence& reference,
                          const BleuConfig& config = {}) {
  if (config.max_order < 1) throw Error(ErrorCode::InvalidArgument, "max_order must be >= 1");
  if (config.epsilon < 0.0) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
  if (reference.empty()) throw Error(ErrorCode::EmptyReference, "reference has no tokens");

  OverlapResult result;
  if (hypothesis.empty()) {
    result.degenerate = true;
    result.brevity_penalty = 0.0;
    result.precisions.assign(static_cast<std::size_t>(config.max_order), 0.0);
    return result;
  }

  const auto [hyp, ref] = detail::intern_pair(hypothesis, reference);
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(config.max_order), ref.size());

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto hyp_counts = detail::count_ngrams(hyp, n);
    const auto ref_counts = detail::count_ngrams(ref, n);
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double p = total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
    result.precisions.push_back(p);
    if (matched == 0 && config.epsilon > 0.0) {
      p = config.epsilon / static_cast<double>(std::max<std::size_t>(total, 1));
    }
    if (p <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }

  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  result.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
  const double unit = zero ? 0.0 : result.brevity_penalty * std::exp(log_sum / static_cast<double>(orders));
  result.score = config.scale == BleuScale::percent ? 100.0 * unit : unit;
  return result;
}

/// Longest common subsequence length with two rolling rows over the shorter side.
template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  const auto [x, y] = detail::intern_pair(a, b);
  return lcs_length<uint32_t>(x, y);
}

/// ROUGE-L F1 over normalized tokens; 0 when either side is empty.
inline OverlapResult rouge_l(const TokenSequence& hypothesis, const TokenSequence& reference) {
  OverlapResult result;
  if (hypothesis.empty() || reference.empty()) {
    result.degenerate = true;
    return result;
  }
  result.lcs_length = lcs_length(hypothesis, reference);
  result.precision = static_cast<double>(result.lcs_length) / static_cast<double>(hypothesis.size());
  result.recall = static_cast<double>(result.lcs_length) / static_cast<double>(reference.size());
  const double sum = result.precision + result.recall;
  result.score = sum > 0.0 ? 2.0 * result.precision * result.recall / sum : 0.0;
  return result;
}

}  // namespace simpeval
