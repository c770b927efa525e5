#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "simpeval/error.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

// ---------------------------------------------------------------------------
// Manifest

struct DocumentPair {
  std::string source_id;
  std::string title;
  std::string origin;  // original language and year, e.g. "German (1816)"
  std::string standard_url;
  std::string simple_url;
  std::string standard_path;  // local text files, relative to the manifest
  std::string simple_path;
  // The Standard version is cut after this many code points to match the
  // extent of the Simple excerpt.
  std::optional<std::size_t> standard_cutoff_chars;
};

inline constexpr std::array<std::string_view, 4> kSourcePrefixes = {"eb", "kv", "pv", "mils"};

inline bool has_known_prefix(std::string_view source_id) {
  const auto dash = source_id.find('-');
  if (dash == std::string_view::npos || dash + 1 == source_id.size()) return false;
  const auto prefix = source_id.substr(0, dash);
  return std::find(kSourcePrefixes.begin(), kSourcePrefixes.end(), prefix) != kSourcePrefixes.end();
}

namespace detail {

inline std::string optional_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) return {};
  if (!obj[key].is_string()) throw Error(ErrorCode::ParseError, where + ": field " + key + " must be a string");
  return obj[key].get<std::string>();
}

}  // namespace detail

inline DocumentPair parse_manifest_record(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected a JSON object");
  DocumentPair doc;
  doc.source_id = detail::optional_string(obj, "source_id", where);
  doc.title = detail::optional_string(obj, "title", where);
  if (doc.source_id.empty()) throw Error(ErrorCode::ParseError, where + ": missing source_id");
  if (!has_known_prefix(doc.source_id)) {
    throw Error(ErrorCode::ParseError,
                where + ": source_id '" + doc.source_id + "' must start with eb-, kv-, pv- or mils-");
  }
  doc.origin = detail::optional_string(obj, "origin", where);
  doc.standard_url = detail::optional_string(obj, "standard_url", where);
  doc.simple_url = detail::optional_string(obj, "simple_url", where);
  doc.standard_path = detail::optional_string(obj, "standard_path", where);
  doc.simple_path = detail::optional_string(obj, "simple_path", where);
  if (obj.contains("standard_cutoff_chars") && !obj["standard_cutoff_chars"].is_null()) {
    if (!obj["standard_cutoff_chars"].is_number_unsigned()) {
      throw Error(ErrorCode::ParseError, where + ": standard_cutoff_chars must be a non-negative integer");
    }
    doc.standard_cutoff_chars = obj["standard_cutoff_chars"].get<std::size_t>();
  }
  return doc;
}

inline nlohmann::json to_json(const DocumentPair& doc) {
  nlohmann::json obj = {{"source_id", doc.source_id},       {"title", doc.title},
                        {"origin", doc.origin},             {"standard_url", doc.standard_url},
                        {"simple_url", doc.simple_url},     {"standard_path", doc.standard_path},
                        {"simple_path", doc.simple_path},   {"standard_cutoff_chars", nullptr}};
  if (doc.standard_cutoff_chars) obj["standard_cutoff_chars"] = *doc.standard_cutoff_chars;
  return obj;
}

/// JSON-lines manifest, one DocumentPair per non-blank line.
inline std::vector<DocumentPair> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path);
  std::vector<DocumentPair> docs;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded()) throw Error(ErrorCode::ParseError, where + ": invalid JSON");
    auto doc = parse_manifest_record(obj, where);
    if (!seen.insert(doc.source_id).second) {
      throw Error(ErrorCode::DuplicateSourceId, where + ": " + doc.source_id);
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw Error(ErrorCode::ParseError, path + ": manifest has no records");
  return docs;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// First `chars` code points of `text`.
inline std::string truncate_code_points(std::string_view text, std::size_t chars) {
  std::size_t pos = 0;
  for (std::size_t n = 0; n < chars && pos < text.size(); ++n) unicode::next(text, pos);
  return std::string(text.substr(0, pos));
}

struct DocumentTexts {
  std::string standard;
  std::string simple;
};

/// Reads both sides of a pair from local files; relative paths resolve
/// against `base_dir` (normally the manifest's directory).
inline DocumentTexts load_document_texts(const DocumentPair& doc, const std::filesystem::path& base_dir) {
  if (doc.standard_path.empty() || doc.simple_path.empty()) {
    throw Error(ErrorCode::IoError, doc.source_id + ": no local text paths in manifest");
  }
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base_dir / fp).string();
  };
  DocumentTexts texts{read_text_file(resolve(doc.standard_path)), read_text_file(resolve(doc.simple_path))};
  if (doc.standard_cutoff_chars) texts.standard = truncate_code_points(texts.standard, *doc.standard_cutoff_chars);
  return texts;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitAssignment {
  std::set<std::string> dev_ids;
  std::set<std::string> test_ids;
  std::set<std::string> train_ids;
};

/// Ids to move into a split; each id is removed from whatever split it had.
struct SplitOverride {
  std::set<std::string> to_dev;
  std::set<std::string> to_test;
  std::set<std::string> to_train;
};

inline const std::set<std::string>& default_dev_ids() {
  static const std::set<std::string> ids = {"mils-stadtmusikanten", "eb-hyde", "pv-schimmelreiter"};
  return ids;
}

inline const std::set<std::string>& default_test_ids() {
  static const std::set<std::string> ids = {"mils-bruder", "eb-christo", "pv-sandmann"};
  return ids;
}

/// Default dev/test documents (those present in the manifest), everything
/// else train, then the override moves applied.
inline SplitAssignment assign_splits(std::span<const DocumentPair> manifest,
                                     const std::optional<SplitOverride>& overrides = std::nullopt) {
  std::set<std::string> ids;
  for (const auto& d : manifest) ids.insert(d.source_id);

  if (overrides) {
    std::set<std::string> moved;
    for (const auto* group : {&overrides->to_dev, &overrides->to_test, &overrides->to_train}) {
      for (const auto& id : *group) {
        if (!ids.contains(id)) throw Error(ErrorCode::UnknownSourceId, id);
        if (!moved.insert(id).second) {
          throw Error(ErrorCode::InvalidArgument, id + " is assigned to more than one split");
        }
      }
    }
  }

  SplitAssignment out;
  for (const auto& id : ids) {
    auto* target = &out.train_ids;
    if (default_dev_ids().contains(id)) target = &out.dev_ids;
    if (default_test_ids().contains(id)) target = &out.test_ids;
    if (overrides) {
      if (overrides->to_dev.contains(id)) target = &out.dev_ids;
      if (overrides->to_test.contains(id)) target = &out.test_ids;
      if (overrides->to_train.contains(id)) target = &out.train_ids;
    }
    target->insert(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Language tags and tagged pairs

enum class LanguageTag { de_DE, de_OR, de_SI };

constexpr std::string_view to_string(LanguageTag tag) noexcept {
  switch (tag) {
    case LanguageTag::de_DE: return "de_DE";
    case LanguageTag::de_OR: return "de_OR";
    case LanguageTag::de_SI: return "de_SI";
  }
  return "de_DE";
}

inline LanguageTag parse_language_tag(std::string_view s) {
  if (s == "de_DE") return LanguageTag::de_DE;
  if (s == "de_OR") return LanguageTag::de_OR;
  if (s == "de_SI") return LanguageTag::de_SI;
  throw Error(ErrorCode::ParseError, "unknown language tag '" + std::string(s) + "'");
}

/// One exported training record.
struct TaggedPair {
  LanguageTag src_tag = LanguageTag::de_DE;
  LanguageTag tgt_tag = LanguageTag::de_DE;
  std::string src;
  std::string tgt;

  friend bool operator==(const TaggedPair&, const TaggedPair&) = default;
};

/// Standard side tagged de_OR, Simple side tagged de_SI.
inline TaggedPair fine_tuning_pair(const DocumentTexts& texts) {
  return {LanguageTag::de_OR, LanguageTag::de_SI, texts.standard, texts.simple};
}

// ---------------------------------------------------------------------------
// Masking

struct MaskedPair {
  TokenSequence masked;
  TokenSequence original;
  LanguageTag tag = LanguageTag::de_DE;
  uint64_t seed = 0;
  std::size_t source_index = 0;        // position in the input list
  std::vector<std::size_t> positions;  // masked token indices, ascending

  TaggedPair to_tagged() const { return {tag, tag, masked.joined(), original.joined()}; }
};

namespace detail {

/// Unbiased draw from [0, bound) for bound >= 1.
inline uint64_t uniform_below(std::mt19937_64& gen, uint64_t bound) {
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

/// Portable Fisher-Yates (std::shuffle is not reproducible across libraries).
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_below(gen, i)]);
  }
}

inline uint64_t sentence_seed(uint64_t seed, std::size_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// floor(rate * n), snapping products that sit within rounding error of an
// integer (0.15 * 100 is 15.000000000000002 in binary).
inline std::size_t mask_count_floor(double rate, std::size_t n) {
  const double product = rate * static_cast<double>(n);
  const double nearest = std::round(product);
  if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, product)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(product));
}

inline MaskedPair mask_sentence(const TokenSequence& sentence, double rate, uint64_t seed,
                                std::size_t index) {
  std::vector<std::size_t> words;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (!sentence[i].is_punctuation) words.push_back(i);
  }
  const std::size_t count = std::max<std::size_t>(1, mask_count_floor(rate, words.size()));

  std::mt19937_64 gen(sentence_seed(seed, index));
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(words[i], words[i + uniform_below(gen, words.size() - i)]);
  }
  std::vector<std::size_t> chosen(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  std::vector<Token> masked(sentence.tokens());
  for (auto p : chosen) {
    const auto begin = masked[p].begin;
    masked[p] = Token::make(kMaskToken, begin);
  }
  return {TokenSequence(std::move(masked)), sentence, LanguageTag::de_DE, seed, index, std::move(chosen)};
}

}  // namespace detail

/// Shuffles the sentences and masks max(1, floor(rate * words)) word tokens in
/// each. Sentences without word tokens are skipped. Output depends only on
/// (sentences, rate, seed), never on `threads`.
inline std::vector<MaskedPair> generate_masked_pairs(std::span<const TokenSequence> sentences, double rate,
                                                     uint64_t seed, unsigned threads = 1) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::RateOutOfRange, "rate must lie in (0, 1), got " + std::to_string(rate));
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].word_count() > 0) order.push_back(i);
  }
  if (order.empty()) throw Error(ErrorCode::EmptyInput, "no sentence contains a word token");

  std::mt19937_64 gen(seed);
  detail::shuffle(order, gen);

  std::vector<MaskedPair> out(order.size());
  auto work = [&](std::size_t first, std::size_t last) {
    for (std::size_t k = first; k < last; ++k) {
      out[k] = detail::mask_sentence(sentences[order[k]], rate, seed, order[k]);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(order.size())));
  if (threads == 1) {
    work(0, order.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (order.size() + threads - 1) / threads;
    for (std::size_t first = 0; first < order.size(); first += chunk) {
      pool.emplace_back(work, first, std::min(order.size(), first + chunk));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export / import

enum class PairFormat { jsonl };

inline void export_pairs(std::span<const TaggedPair> pairs, const std::string& path,
                         PairFormat format = PairFormat::jsonl) {
  (void)format;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& p : pairs) {
    const nlohmann::ordered_json obj = {{"src_tag", to_string(p.src_tag)},
                                {"tgt_tag", to_string(p.tgt_tag)},
                                {"src", p.src},
                                {"tgt", p.tgt}};
    out << obj.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline void export_pairs(std::span<const MaskedPair> pairs, const std::string& path,
                         PairFormat format = PairFormat::jsonl) {
  std::vector<TaggedPair> tagged;
  tagged.reserve(pairs.size());
  for (const auto& p : pairs) tagged.push_back(p.to_tagged());
  export_pairs(std::span<const TaggedPair>(tagged), path, format);
}

inline std::vector<TaggedPair> import_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<TaggedPair> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto obj = nlohmann::json::parse(line, nullptr, false);
    if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected a JSON object");
    for (const char* key : {"src_tag", "tgt_tag", "src", "tgt"}) {
      if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorCode::ParseError, where + ": missing string field " + key);
      }
    }
    out.push_back({parse_language_tag(obj["src_tag"].get<std::string>()),
                   parse_language_tag(obj["tgt_tag"].get<std::string>()), obj["src"].get<std::string>(),
                   obj["tgt"].get<std::string>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fetching public-domain sources

/// Hosts serving public-domain Standard texts. Simple-language publishers are
/// deliberately absent: their texts are copyrighted and are never downloaded.
inline std::set<std::string> default_fetch_whitelist() {
  return {"www.gutenberg.org", "gutenberg.org", "www.projekt-gutenberg.org", "projekt-gutenberg.org",
          "textgridrep.org"};
}

inline std::string url_host(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  const auto start = scheme + 3;
  const auto end = url.find_first_of(":/?#", start);
  return std::string(url.substr(start, end == std::string_view::npos ? url.size() - start : end - start));
}

inline bool fetch_allowed(std::string_view url, const std::set<std::string>& whitelist) {
  return whitelist.contains(url_host(url));
}

/// Downloads a whitelisted http URL to `dest`. https needs a build with
/// CPPHTTPLIB_OPENSSL_SUPPORT.
inline void fetch_public_text(const std::string& url, const std::string& dest,
                              const std::set<std::string>& whitelist = default_fetch_whitelist()) {
  if (!fetch_allowed(url, whitelist)) {
    throw Error(ErrorCode::InvalidArgument, "host of " + url + " is not whitelisted for download");
  }
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.starts_with("https://")) throw Error(ErrorCode::IoError, "https is not supported by this build");
#endif
  httplib::Client client(origin);
  client.set_follow_location(true);
  auto res = client.Get(path);
  if (!res) throw Error(ErrorCode::IoError, url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorCode::IoError, url + ": HTTP " + std::to_string(res->status));
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + dest);
  out << res->body;
}

}  // namespace simpeval
