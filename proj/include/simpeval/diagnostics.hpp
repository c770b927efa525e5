#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpeval/error.hpp"
#include "simpeval/ngram.hpp"
#include "simpeval/suffix_index.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

/// Fraction of the output that is an in-order copy of the source:
/// LCS(output, source) / |output|.
inline double copy_rate(const TokenSequence& output, const TokenSequence& source) {
  if (source.empty()) throw Error(ErrorCode::EmptySource, "source has no tokens");
  if (output.empty()) return 0.0;
  return static_cast<double>(lcs_length(output, source)) / static_cast<double>(output.size());
}

inline double compression_ratio(const TokenSequence& output, const TokenSequence& source) {
  if (source.empty()) throw Error(ErrorCode::EmptySource, "source has no tokens");
  return static_cast<double>(output.size()) / static_cast<double>(source.size());
}

namespace detail {

inline double repeated_ngram_rate(std::span<const int32_t> lpf, std::size_t length, std::size_t n) {
  if (length < n) return 0.0;
  const std::size_t positions = length - n + 1;
  std::size_t repeated = 0;
  for (std::size_t p = 0; p < positions; ++p) repeated += static_cast<std::size_t>(lpf[p]) >= n;
  return static_cast<double>(repeated) / static_cast<double>(positions);
}

}  // namespace detail

/// Fraction of n-gram positions whose n-gram already started at an earlier
/// position.
inline double repeated_ngram_rate(const TokenSequence& output, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidOrder, "n-gram order must be >= 1, got " + std::to_string(n));
  const auto lpf = longest_previous_factor(output);
  return detail::repeated_ngram_rate(lpf, output.size(), static_cast<std::size_t>(n));
}

/// Length in tokens of the longest span that occurs at least twice
/// (occurrences may overlap).
inline std::size_t longest_repeated_span(const TokenSequence& output) {
  const auto lpf = longest_previous_factor(output);
  return lpf.empty() ? 0 : static_cast<std::size_t>(*std::max_element(lpf.begin(), lpf.end()));
}

struct RepeatedSentence {
  std::string sentence;  // normalized tokens joined by spaces
  std::size_t multiplicity = 0;
  std::size_t first_index = 0;
};

struct RepeatedSentenceReport {
  std::size_t count = 0;  // distinct sentences occurring at least twice
  std::vector<RepeatedSentence> repeated;
};

/// Groups sentences by their normalized token sequence.
inline RepeatedSentenceReport repeated_sentence_report(std::span<const TokenSequence> sentences) {
  std::map<std::vector<std::string>, std::size_t> index;
  std::vector<RepeatedSentence> groups;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto key = sentences[i].normalized();
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) {
      std::string joined;
      for (const auto& t : key) joined += (joined.empty() ? "" : " ") + t;
      groups.push_back({std::move(joined), 0, i});
    }
    ++groups[it->second].multiplicity;
  }
  RepeatedSentenceReport report;
  for (auto& g : groups) {
    if (g.multiplicity >= 2) report.repeated.push_back(std::move(g));
  }
  std::stable_sort(report.repeated.begin(), report.repeated.end(),
                   [](const RepeatedSentence& a, const RepeatedSentence& b) {
                     return a.multiplicity > b.multiplicity;
                   });
  report.count = report.repeated.size();
  return report;
}

inline constexpr std::size_t kMaxDiagnosticOrder = 8;

struct DiagnosticsReport {
  double copy_rate = 0.0;
  double compression_ratio = 0.0;
  std::size_t repeated_sentence_count = 0;
  std::size_t max_sentence_multiplicity = 0;
  std::array<double, kMaxDiagnosticOrder> repeated_ngram_rate{};  // index n - 1
  std::size_t longest_repeated_span = 0;
};

inline DiagnosticsReport diagnose(const TokenSequence& output, std::span<const TokenSequence> output_sentences,
                                  const TokenSequence& source) {
  DiagnosticsReport r;
  r.copy_rate = copy_rate(output, source);
  r.compression_ratio = compression_ratio(output, source);
  const auto sentences = repeated_sentence_report(output_sentences);
  r.repeated_sentence_count = sentences.count;
  r.max_sentence_multiplicity = sentences.repeated.empty() ? 0 : sentences.repeated.front().multiplicity;
  const auto lpf = longest_previous_factor(output);
  for (std::size_t n = 1; n <= kMaxDiagnosticOrder; ++n) {
    r.repeated_ngram_rate[n - 1] = detail::repeated_ngram_rate(lpf, output.size(), n);
  }
  r.longest_repeated_span = lpf.empty() ? 0 : static_cast<std::size_t>(*std::max_element(lpf.begin(), lpf.end()));
  return r;
}

inline DiagnosticsReport diagnose(std::string_view output_text, std::string_view source_text) {
  const auto output = tokenize(output_text);
  std::vector<TokenSequence> sentences;
  for (auto& s : split_sentences(output_text)) sentences.push_back(std::move(s.tokens));
  return diagnose(output, sentences, tokenize(source_text));
}

}  // namespace simpeval
