#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/diagnostics.hpp"
#include "simpeval/embed.hpp"
#include "simpeval/entropy.hpp"
#include "simpeval/error.hpp"
#include "simpeval/ngram.hpp"
#include "simpeval/provider.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

// ---------------------------------------------------------------------------
// Corpus evaluation

struct EvalRecord {
  std::string source_id;
  std::string source_text;
  std::string hypothesis_text;
  std::string reference_text;
};

/// JSON-lines records {"source_id","source","hypothesis","reference"}.
inline std::vector<EvalRecord> load_eval_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<EvalRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto obj = nlohmann::json::parse(line, nullptr, false);
    if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected a JSON object");
    for (const char* key : {"source_id", "source", "hypothesis", "reference"}) {
      if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorCode::ParseError, where + ": missing string field " + key);
      }
    }
    out.push_back({obj["source_id"].get<std::string>(), obj["source"].get<std::string>(),
                   obj["hypothesis"].get<std::string>(), obj["reference"].get<std::string>()});
  }
  return out;
}

struct EvalConfig {
  BleuConfig bleu;
  LogBase log_base = LogBase::base2;
  unsigned threads = 1;
  // When set, records whose source_id is not listed fail with UnknownSourceId.
  std::optional<std::set<std::string>> known_ids;
};

/// Full metric vector for one document.
struct DocumentMetrics {
  std::string source_id;
  bool ok = false;
  std::string error;
  BertScoreResult bertscore;
  double rouge_l_f1 = 0.0;
  double bleu = 0.0;
  double sup = 0.0;
  double bow = 0.0;
  DiagnosticsReport diagnostics;
};

/// One row of the results table.
struct ReportRow {
  std::string label;
  double bertscore_f1 = 0.0;
  double rouge_l_f1 = 0.0;
  double bleu = 0.0;
  double sup = 0.0;
  double bow = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct CorpusEvaluation {
  std::vector<DocumentMetrics> documents;  // input order
  ReportRow average;                       // over successful documents only
  std::size_t failed = 0;
};

inline DocumentMetrics evaluate_record(const EvalRecord& record, const EmbeddingProvider& provider,
                                       const EvalConfig& config) {
  DocumentMetrics m;
  m.source_id = record.source_id;
  try {
    if (config.known_ids && !config.known_ids->contains(record.source_id)) {
      throw Error(ErrorCode::UnknownSourceId, record.source_id + " is not in the manifest");
    }
    const auto hyp = tokenize(record.hypothesis_text);
    const auto ref = tokenize(record.reference_text);
    const auto src = tokenize(record.source_text);

    m.rouge_l_f1 = rouge_l(hyp, ref).score;
    m.bleu = bleu(hyp, ref, config.bleu).score;
    m.bow = bow_entropy(hyp);
    m.sup = sup_entropy(sup_match_lengths_indexed(hyp), config.log_base);

    std::vector<TokenSequence> sentences;
    for (auto& s : split_sentences(record.hypothesis_text)) sentences.push_back(std::move(s.tokens));
    m.diagnostics = diagnose(hyp, sentences, src);

    const auto hyp_emb = provider.embed(record.source_id + ".hypothesis", hyp);
    const auto ref_emb = provider.embed(record.source_id + ".reference", ref);
    m.bertscore = greedy_match_score(hyp_emb, ref_emb);
    m.ok = true;
  } catch (const std::exception& e) {
    m.ok = false;
    m.error = e.what();
  }
  return m;
}

/// Scores every record; failures are recorded per document and excluded from
/// the average, which is the plain arithmetic mean in input order.
inline CorpusEvaluation evaluate_corpus(std::span<const EvalRecord> records, const EmbeddingProvider& provider,
                                        const EvalConfig& config = {}, std::string label = "average") {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no evaluation records");
  CorpusEvaluation out;
  out.documents.resize(records.size());

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(records.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      out.documents[i] = evaluate_record(records[i], provider, config);
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  out.average.label = std::move(label);
  std::size_t ok = 0;
  for (const auto& d : out.documents) {
    if (!d.ok) {
      ++out.failed;
      continue;
    }
    ++ok;
    out.average.bertscore_f1 += d.bertscore.f1;
    out.average.rouge_l_f1 += d.rouge_l_f1;
    out.average.bleu += d.bleu;
    out.average.sup += d.sup;
    out.average.bow += d.bow;
  }
  const double n = ok == 0 ? NAN : static_cast<double>(ok);
  out.average.bertscore_f1 /= n;
  out.average.rouge_l_f1 /= n;
  out.average.bleu /= n;
  out.average.sup /= n;
  out.average.bow /= n;
  return out;
}

inline nlohmann::json to_json(const DocumentMetrics& m) {
  nlohmann::json obj = {{"source_id", m.source_id}, {"ok", m.ok}};
  if (!m.ok) {
    obj["error"] = m.error;
    return obj;
  }
  obj["bertscore"] = {{"precision", m.bertscore.precision}, {"recall", m.bertscore.recall}, {"f1", m.bertscore.f1}};
  obj["rouge_l_f1"] = m.rouge_l_f1;
  obj["bleu"] = m.bleu;
  obj["sup"] = m.sup;
  obj["bow"] = m.bow;
  const auto& d = m.diagnostics;
  obj["diagnostics"] = {{"copy_rate", d.copy_rate},
                        {"compression_ratio", d.compression_ratio},
                        {"repeated_sentence_count", d.repeated_sentence_count},
                        {"max_sentence_multiplicity", d.max_sentence_multiplicity},
                        {"repeated_ngram_rate", d.repeated_ngram_rate},
                        {"longest_repeated_span", d.longest_repeated_span}};
  return obj;
}

// ---------------------------------------------------------------------------
// Early stopping

struct EarlyStopPolicy {
  int max_epochs = 100;
  std::optional<int> patience;
};

struct EarlyStopResult {
  int best_epoch = 0;
  int stop_epoch = 0;

  friend bool operator==(const EarlyStopResult&, const EarlyStopResult&) = default;
};

/// Replays a per-epoch validation series (higher is better). Stops at the
/// first epoch `patience` epochs past the best so far; otherwise after
/// min(len, max_epochs) epochs. Ties keep the earliest epoch.
inline EarlyStopResult early_stop_select(std::span<const double> scores, const EarlyStopPolicy& policy) {
  if (scores.empty()) throw Error(ErrorCode::EmptyScores, "no per-epoch scores");
  if (policy.max_epochs < 1) throw Error(ErrorCode::InvalidArgument, "max_epochs must be >= 1");
  if (policy.patience && *policy.patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
  const int limit = static_cast<int>(std::min<std::size_t>(scores.size(), static_cast<std::size_t>(policy.max_epochs)));
  int best = 0;
  for (int e = 0; e < limit; ++e) {
    if (scores[static_cast<std::size_t>(e)] > scores[static_cast<std::size_t>(best)]) best = e;
    if (policy.patience && e - best >= *policy.patience) return {best, e};
  }
  return {best, limit};
}

/// "best (max;patience)" or "best (max)", the notation used in results tables.
inline std::string format_epochs(const EarlyStopResult& r, const EarlyStopPolicy& policy) {
  std::string out = std::to_string(r.best_epoch) + " (" + std::to_string(policy.max_epochs);
  if (policy.patience) out += ";" + std::to_string(*policy.patience);
  return out + ")";
}

// ---------------------------------------------------------------------------
// Report rendering

enum class ReportFormat { csv, markdown, json };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "json") return ReportFormat::json;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + std::string(s) + "'");
}

inline constexpr std::array<std::string_view, 6> kReportColumns = {"label", "BERTscore_F1", "ROUGE-L_F1",
                                                                   "BLEU",  "SUP",          "BOW"};
inline constexpr std::array<int, 5> kReportDecimals = {3, 3, 3, 3, 4};

namespace detail {

inline std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::array<double, 5> values(const ReportRow& r) {
  return {r.bertscore_f1, r.rouge_l_f1, r.bleu, r.sup, r.bow};
}

inline ReportRow row_from(std::string label, const std::vector<std::string>& cells, const std::string& where) {
  if (cells.size() != 5) throw Error(ErrorCode::ParseError, where + ": expected 6 columns");
  std::array<double, 5> v{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (cells[i] == "nan") {
      v[i] = NAN;
      continue;
    }
    try {
      std::size_t used = 0;
      v[i] = std::stod(cells[i], &used);
      if (used != cells[i].size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, where + ": bad number '" + cells[i] + "'");
    }
  }
  return {std::move(label), v[0], v[1], v[2], v[3], v[4]};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && (s.empty() || (s.front() != ' ' && s.back() != ' '))) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line, const std::string& where) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, where + ": unterminated quote");
  return out;
}

inline std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::vector<std::string> md_split(const std::string& line, const std::string& where) {
  std::string body = line;
  while (!body.empty() && (body.back() == ' ' || body.back() == '\r')) body.pop_back();
  if (body.size() < 2 || body.front() != '|' || body.back() != '|') {
    throw Error(ErrorCode::ParseError, where + ": not a table row");
  }
  std::vector<std::string> cells;
  std::string cur;
  for (std::size_t i = 1; i + 1 < body.size(); ++i) {
    if (body[i] == '\\' && i + 2 < body.size()) {
      cur += body[++i];
    } else if (body[i] == '|') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += body[i];
    }
  }
  cells.push_back(cur);
  for (auto& c : cells) {
    const auto a = c.find_first_not_of(' ');
    const auto b = c.find_last_not_of(' ');
    c = a == std::string::npos ? "" : c.substr(a, b - a + 1);
  }
  return cells;
}

}  // namespace detail

/// Renders rows with a fixed column order. Numbers use 3 decimals (4 for BOW).
inline std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::csv: {
      for (std::size_t c = 0; c < kReportColumns.size(); ++c) out << (c ? "," : "") << kReportColumns[c];
      out << '\n';
      for (const auto& r : rows) {
        out << detail::csv_field(r.label);
        const auto v = detail::values(r);
        for (std::size_t c = 0; c < v.size(); ++c) out << ',' << detail::fixed(v[c], kReportDecimals[c]);
        out << '\n';
      }
      break;
    }
    case ReportFormat::markdown: {
      out << '|';
      for (auto c : kReportColumns) out << ' ' << c << " |";
      out << "\n|---|";
      for (std::size_t c = 1; c < kReportColumns.size(); ++c) out << "---:|";
      out << '\n';
      for (const auto& r : rows) {
        out << "| " << detail::md_escape(r.label) << " |";
        const auto v = detail::values(r);
        for (std::size_t c = 0; c < v.size(); ++c) out << ' ' << detail::fixed(v[c], kReportDecimals[c]) << " |";
        out << '\n';
      }
      break;
    }
    case ReportFormat::json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        nlohmann::json obj = {{"label", r.label}};
        const auto v = detail::values(r);
        for (std::size_t c = 0; c < v.size(); ++c) {
          obj[std::string(kReportColumns[c + 1])] = std::stod(detail::fixed(v[c], kReportDecimals[c]));
        }
        arr.push_back(obj);
      }
      out << arr.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

/// Inverse of render_report (values come back at the printed precision).
inline std::vector<ReportRow> parse_report(const std::string& text, ReportFormat format) {
  std::vector<ReportRow> rows;
  if (format == ReportFormat::json) {
    const auto arr = nlohmann::json::parse(text, nullptr, false);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "report: expected a JSON array");
    for (const auto& obj : arr) {
      if (!obj.is_object() || !obj.contains("label")) throw Error(ErrorCode::ParseError, "report: bad row");
      ReportRow r;
      r.label = obj["label"].get<std::string>();
      auto num = [&](std::string_view key) {
        const auto& v = obj.at(std::string(key));
        return v.is_number() ? v.get<double>() : NAN;
      };
      r.bertscore_f1 = num(kReportColumns[1]);
      r.rouge_l_f1 = num(kReportColumns[2]);
      r.bleu = num(kReportColumns[3]);
      r.sup = num(kReportColumns[4]);
      r.bow = num(kReportColumns[5]);
      rows.push_back(std::move(r));
    }
    return rows;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false, rule_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::string where = "report:" + std::to_string(lineno);
    auto cells = format == ReportFormat::csv ? detail::csv_split(line, where) : detail::md_split(line, where);
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    if (format == ReportFormat::markdown && !rule_seen) {
      rule_seen = true;
      continue;
    }
    std::string label = cells.front();
    cells.erase(cells.begin());
    rows.push_back(detail::row_from(std::move(label), cells, where));
  }
  return rows;
}

}  // namespace simpeval
