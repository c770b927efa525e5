#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "simpeval/error.hpp"

namespace simpeval {

/// Reserved token used by the masking pipeline; the tokenizer never splits it.
inline constexpr std::string_view kMaskToken = "<mask>";

namespace unicode {

/// Full, locale-independent Unicode case folding (so "Straße" -> "strasse").
inline std::string fold_case(std::string_view utf8) {
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())))
      .foldCase(U_FOLD_CASE_DEFAULT)
      .toUTF8String(out);
  return out;
}

inline bool is_punctuation(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

inline bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019; }

inline bool is_upper(UChar32 c) { return u_isupper(c) || u_istitle(c); }

/// Decodes the code point starting at byte `pos`; returns it and advances pos.
inline UChar32 next(std::string_view s, std::size_t& pos) {
  UChar32 c = 0;
  int32_t i = static_cast<int32_t>(pos);
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? 0xFFFD : c;
}

/// Decodes the code point ending at byte `end`; returns it and moves end back.
inline UChar32 prev(std::string_view s, std::size_t& end) {
  UChar32 c = 0;
  int32_t i = static_cast<int32_t>(end);
  U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), 0, i, c);
  end = static_cast<std::size_t>(i);
  return c < 0 ? 0xFFFD : c;
}

inline std::size_t code_point_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) next(s, pos);
  return n;
}

inline bool all_punctuation(std::string_view s) {
  if (s.empty()) return false;
  for (std::size_t pos = 0; pos < s.size();) {
    if (!is_punctuation(next(s, pos))) return false;
  }
  return true;
}

}  // namespace unicode

struct Token {
  std::string surface;
  std::string normalized;
  bool is_punctuation = false;
  // Byte range of the surface in the tokenized text.
  std::size_t begin = 0;
  std::size_t end = 0;

  static Token make(std::string_view surface, std::size_t begin = 0) {
    Token t;
    t.surface = std::string(surface);
    t.normalized = unicode::fold_case(surface);
    t.is_punctuation = surface != kMaskToken && unicode::all_punctuation(surface);
    t.begin = begin;
    t.end = begin + surface.size();
    return t;
  }

  friend bool operator==(const Token& a, const Token& b) {
    return a.surface == b.surface && a.normalized == b.normalized &&
           a.is_punctuation == b.is_punctuation;
  }
};

/// Ordered token stream; every metric in the toolkit consumes one of these.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  /// Builds a sequence from pre-split words (offsets are synthetic).
  static TokenSequence from_words(std::span<const std::string> words) {
    std::vector<Token> tokens;
    tokens.reserve(words.size());
    std::size_t offset = 0;
    for (const auto& w : words) {
      tokens.push_back(Token::make(w, offset));
      offset += w.size() + 1;
    }
    return TokenSequence(std::move(tokens));
  }
  static TokenSequence from_words(std::initializer_list<std::string> words) {
    return from_words(std::span<const std::string>(words.begin(), words.size()));
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  Token& operator[](std::size_t i) { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  std::vector<std::string> normalized() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const auto& t : tokens_) out.push_back(t.normalized);
    return out;
  }

  std::size_t word_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tokens_) n += t.is_punctuation ? 0 : 1;
    return n;
  }

  /// Surfaces joined with single spaces.
  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i) out += ' ';
      out += tokens_[i].surface;
    }
    return out;
  }

  TokenSequence slice(std::size_t first, std::size_t last) const {
    return TokenSequence(std::vector<Token>(tokens_.begin() + static_cast<std::ptrdiff_t>(first),
                                            tokens_.begin() + static_cast<std::ptrdiff_t>(last)));
  }

  friend bool operator==(const TokenSequence& a, const TokenSequence& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<Token> tokens_;
};

namespace detail {

inline void tokenize_piece(std::string_view text, std::size_t first, std::size_t last,
                           std::vector<Token>& out) {
  std::vector<Token> tail;
  while (first < last) {
    std::string_view rest = text.substr(first, last - first);
    if (rest.starts_with(kMaskToken)) {
      out.push_back(Token::make(kMaskToken, first));
      first += kMaskToken.size();
      continue;
    }
    std::size_t pos = first;
    if (!unicode::is_punctuation(unicode::next(text, pos))) break;
    out.push_back(Token::make(text.substr(first, pos - first), first));
    first = pos;
  }
  while (last > first) {
    std::string_view rest = text.substr(first, last - first);
    if (rest.ends_with(kMaskToken)) {
      last -= kMaskToken.size();
      tail.push_back(Token::make(kMaskToken, last));
      continue;
    }
    std::size_t pos = last;
    if (!unicode::is_punctuation(unicode::prev(text, pos))) break;
    tail.push_back(Token::make(text.substr(pos, last - pos), pos));
    last = pos;
  }
  if (first < last) out.push_back(Token::make(text.substr(first, last - first), first));
  out.insert(out.end(), tail.rbegin(), tail.rend());
}

// A whitespace-free chunk: apostrophes separate, then edge punctuation detaches.
inline void tokenize_chunk(std::string_view text, std::size_t first, std::size_t last,
                           std::vector<Token>& out) {
  std::size_t piece = first;
  for (std::size_t pos = first; pos < last;) {
    std::size_t at = pos;
    if (unicode::is_apostrophe(unicode::next(text, pos))) {
      tokenize_piece(text, piece, at, out);
      out.push_back(Token::make(text.substr(at, pos - at), at));
      piece = pos;
    }
  }
  tokenize_piece(text, piece, last, out);
}

}  // namespace detail

/// Rule-based tokenizer: split on whitespace, treat apostrophes as separators,
/// detach each leading/trailing punctuation character as its own token.
/// Word-internal punctuation (hyphens, "z.B", "3,5") stays attached.
inline TokenSequence tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    if (unicode::is_space(unicode::next(text, pos))) continue;
    std::size_t end = pos;
    while (end < text.size()) {
      std::size_t look = end;
      if (unicode::is_space(unicode::next(text, look))) break;
      end = look;
    }
    detail::tokenize_chunk(text, start, end, tokens);
    pos = end;
  }
  return TokenSequence(std::move(tokens));
}

struct SentenceSpan {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive token index

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct Sentence {
  SentenceSpan span;
  TokenSequence tokens;
};

/// Abbreviations (with trailing period) after which a period never ends a sentence.
inline std::set<std::string> default_abbreviations() {
  return {"Dr.", "Nr.", "z.B.", "usw.", "bzw.", "ca.", "vgl.", "d.h.", "u.a.", "Hr.", "Fr.", "St."};
}

/// One abbreviation per line; blank lines and lines starting with '#' are skipped.
inline std::set<std::string> load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open abbreviation list " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.insert(line);
  }
  return out;
}

namespace detail {

inline bool is_terminal(const Token& t) {
  return t.surface == "." || t.surface == "!" || t.surface == "?" || t.surface == "\xE2\x80\xA6";
}

inline bool is_closing(const Token& t) {
  static const std::set<std::string, std::less<>> closers = {
      "\"", "'", ")", "]", "\xC2\xBB", "\xC2\xAB", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98",
      "\xE2\x80\x99"};
  return closers.contains(t.surface);
}

inline bool starts_upper(const Token& t) {
  std::size_t pos = 0;
  return !t.surface.empty() && unicode::is_upper(unicode::next(t.surface, pos));
}

}  // namespace detail

/// Splits after sentence-final punctuation (". ! ? …", optionally followed by
/// closing quotes) when whitespace follows and the next word starts uppercase,
/// or at end of text. Leading dashes/quotes of the next sentence are skipped
/// when looking for that word.
inline std::vector<Sentence> split_sentences(std::string_view text,
                                             const std::set<std::string>& abbreviations) {
  const TokenSequence seq = tokenize(text);
  std::vector<Sentence> out;
  const std::size_t n = seq.size();
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    out.push_back({{start, end}, seq.slice(start, end)});
    start = end;
  };
  for (std::size_t k = 0; k < n; ++k) {
    if (!detail::is_terminal(seq[k])) continue;
    if (seq[k].surface == "." && k > start && seq[k - 1].end == seq[k].begin &&
        !seq[k - 1].is_punctuation && abbreviations.contains(seq[k - 1].surface + ".")) {
      continue;
    }
    std::size_t e = k;
    while (e + 1 < n && seq[e + 1].begin == seq[e].end &&
           (detail::is_terminal(seq[e + 1]) || detail::is_closing(seq[e + 1]))) {
      ++e;
    }
    if (e + 1 == n) break;
    if (seq[e + 1].begin == seq[e].end) {
      k = e;
      continue;
    }
    std::size_t w = e + 1;
    while (w < n && seq[w].is_punctuation) ++w;
    if (w < n && detail::starts_upper(seq[w])) close(e + 1);
    k = e;
  }
  if (start < n) close(n);
  return out;
}

inline std::vector<Sentence> split_sentences(std::string_view text) {
  return split_sentences(text, default_abbreviations());
}

}  // namespace simpeval
