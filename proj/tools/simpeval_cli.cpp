// simpeval: command-line front end for the evaluation toolkit.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "simpeval/simpeval.hpp"

namespace {

using namespace simpeval;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  return read_text_file(path);
}

LogBase parse_log_base(const std::string& s) {
  if (s == "2") return LogBase::base2;
  if (s == "e") return LogBase::natural;
  throw Error(ErrorCode::InvalidArgument, "--log-base must be 2 or e");
}

std::set<std::string> split_ids(const std::string& csv) {
  std::set<std::string> out;
  std::stringstream in(csv);
  std::string id;
  while (std::getline(in, id, ',')) {
    if (!id.empty()) out.insert(id);
  }
  return out;
}

std::string fmt(double v, int decimals = 6) { return detail::fixed(v, decimals); }

void print_kv(const std::string& format, const std::vector<std::pair<std::string, double>>& values) {
  if (format == "json") {
    json obj = json::object();
    for (const auto& [k, v] : values) obj[k] = v;
    std::cout << obj.dump(2) << '\n';
  } else if (format == "csv") {
    for (std::size_t i = 0; i < values.size(); ++i) std::cout << (i ? "," : "") << values[i].first;
    std::cout << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) std::cout << (i ? "," : "") << fmt(values[i].second);
    std::cout << '\n';
  } else {
    std::cout << "| metric | value |\n|---|---:|\n";
    for (const auto& [k, v] : values) std::cout << "| " << k << " | " << fmt(v) << " |\n";
  }
}

struct Common {
  std::string format = "markdown";
  std::string log_base = "2";
  std::string provider;
  std::string manifest;
  uint64_t seed = 0;
};

void add_format(CLI::App* cmd, Common& c) {
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "markdown", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation toolkit for document-level text simplification output"};
  app.require_subcommand(1);
  Common common;

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "Tokenize (and optionally sentence-split) a text file");
  std::string tok_input = "-";
  bool tok_sentences = false;
  std::string abbrev_path;
  tok->add_option("input", tok_input, "Text file, or - for stdin");
  tok->add_flag("--sentences", tok_sentences, "Print one sentence per line");
  tok->add_option("--abbreviations", abbrev_path, "Abbreviation list, one per line");
  add_format(tok, common);

  // entropy
  auto* ent = app.add_subcommand("entropy", "BOW and SUP entropy of a text");
  std::string ent_input = "-";
  bool ent_naive = false;
  ent->add_option("input", ent_input, "Text file, or - for stdin");
  ent->add_option("--log-base", common.log_base, "Logarithm base of the SUP denominator (2 or e)");
  ent->add_flag("--naive", ent_naive, "Use the quadratic reference scan for match lengths");
  add_format(ent, common);

  // bleu / rouge / bertscore / diagnose share --hyp/--ref style inputs
  std::string hyp_path, ref_path;
  auto* bl = app.add_subcommand("bleu", "Document-level BLEU");
  BleuConfig bleu_cfg;
  bool bleu_unit = false;
  bl->add_option("--hyp", hyp_path, "Hypothesis text file")->required();
  bl->add_option("--ref", ref_path, "Reference text file")->required();
  bl->add_option("--max-order", bleu_cfg.max_order, "Maximum n-gram order")->check(CLI::PositiveNumber);
  bl->add_option("--epsilon", bleu_cfg.epsilon, "Epsilon smoothing for zero-match orders");
  bl->add_flag("--unit", bleu_unit, "Report on the 0-1 scale instead of 0-100");
  add_format(bl, common);

  auto* rg = app.add_subcommand("rouge", "Document-level ROUGE-L F1");
  rg->add_option("--hyp", hyp_path, "Hypothesis text file")->required();
  rg->add_option("--ref", ref_path, "Reference text file")->required();
  add_format(rg, common);

  auto* bs = app.add_subcommand("bertscore", "Greedy-matching embedding similarity");
  bs->add_option("--hyp", hyp_path, "Hypothesis text file")->required();
  bs->add_option("--ref", ref_path, "Reference text file")->required();
  bs->add_option("--provider", common.provider, "file:DIR | http:URL | det:SEED,DIM")
      ->envname("SIMPEVAL_PROVIDER")
      ->required();
  add_format(bs, common);

  auto* dg = app.add_subcommand("diagnose", "Copying and repetition diagnostics");
  std::string src_path;
  dg->add_option("--output", hyp_path, "Generated text file")->required();
  dg->add_option("--source", src_path, "Source text file")->required();
  add_format(dg, common);

  // mask
  auto* mk = app.add_subcommand("mask", "Sentence-split, shuffle and mask texts into tagged pairs");
  std::vector<std::string> mask_inputs;
  std::string mask_out;
  double mask_rate = 0.15;
  unsigned mask_threads = 1;
  mk->add_option("inputs", mask_inputs, "Text files")->required();
  mk->add_option("--out", mask_out, "Output JSON-lines file")->required();
  mk->add_option("--rate", mask_rate, "Fraction of words to mask per sentence");
  mk->add_option("--seed", common.seed, "Random seed");
  mk->add_option("--threads", mask_threads, "Worker threads");
  mk->add_option("--abbreviations", abbrev_path, "Abbreviation list, one per line");

  // splits
  auto* sp = app.add_subcommand("splits", "Assign manifest documents to train/dev/test");
  std::string to_dev, to_test, to_train;
  sp->add_option("--manifest", common.manifest, "Manifest (JSON lines)")->required();
  sp->add_option("--dev", to_dev, "Comma-separated ids to move to dev");
  sp->add_option("--test", to_test, "Comma-separated ids to move to test");
  sp->add_option("--train", to_train, "Comma-separated ids to move to train");
  add_format(sp, common);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a batch of records and print per-document and average rows");
  std::string records_path, label = "average";
  unsigned ev_threads = 1;
  ev->add_option("--records", records_path, "Records (JSON lines: source_id, source, hypothesis, reference)")
      ->required();
  ev->add_option("--provider", common.provider, "file:DIR | http:URL | det:SEED,DIM")
      ->envname("SIMPEVAL_PROVIDER")
      ->required();
  ev->add_option("--manifest", common.manifest, "Reject records whose source_id is not in this manifest");
  ev->add_option("--log-base", common.log_base, "Logarithm base of the SUP denominator (2 or e)");
  ev->add_option("--label", label, "Label of the average row");
  ev->add_option("--threads", ev_threads, "Worker threads");
  ev->add_option("--max-order", bleu_cfg.max_order, "BLEU maximum n-gram order")->check(CLI::PositiveNumber);
  ev->add_option("--epsilon", bleu_cfg.epsilon, "BLEU epsilon smoothing");
  add_format(ev, common);

  // earlystop
  auto* es = app.add_subcommand("earlystop", "Pick the best and stopping epoch from a score series");
  std::string scores_path = "-";
  EarlyStopPolicy policy;
  int patience = 0;
  es->add_option("scores", scores_path, "One score per line (or a JSON array), - for stdin");
  es->add_option("--max-epochs", policy.max_epochs, "Maximum number of epochs")->check(CLI::PositiveNumber);
  auto* patience_opt = es->add_option("--patience", patience, "Early-stopping patience")->check(CLI::PositiveNumber);
  add_format(es, common);

  // report
  auto* rp = app.add_subcommand("report", "Re-render a results table");
  std::string report_input = "-", report_from = "csv";
  rp->add_option("input", report_input, "Table file, or - for stdin");
  rp->add_option("--from", report_from, "Input format")->check(CLI::IsMember({"csv", "markdown", "json"}));
  add_format(rp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto abbreviations = [&] { return abbrev_path.empty() ? default_abbreviations() : load_abbreviations(abbrev_path); };

    if (*tok) {
      const auto text = read_input(tok_input);
      if (tok_sentences) {
        json arr = json::array();
        for (const auto& s : split_sentences(text, abbreviations())) {
          if (common.format == "json") arr.push_back(s.tokens.joined());
          else std::cout << s.tokens.joined() << '\n';
        }
        if (common.format == "json") std::cout << arr.dump(2) << '\n';
      } else {
        const auto seq = tokenize(text);
        if (common.format == "json") {
          json arr = json::array();
          for (const auto& t : seq) {
            arr.push_back({{"surface", t.surface}, {"normalized", t.normalized}, {"punctuation", t.is_punctuation}});
          }
          std::cout << arr.dump(2) << '\n';
        } else {
          for (const auto& t : seq) std::cout << t.surface << '\t' << t.normalized << '\n';
        }
      }
    } else if (*ent) {
      const auto seq = tokenize(read_input(ent_input));
      const auto profile = ent_naive ? sup_match_lengths_naive(seq) : sup_match_lengths_indexed(seq);
      print_kv(common.format, {{"tokens", static_cast<double>(seq.size())},
                               {"N", static_cast<double>(profile.N)},
                               {"BOW", bow_entropy(seq)},
                               {"SUP", sup_entropy(profile, parse_log_base(common.log_base))}});
    } else if (*bl) {
      if (bleu_unit) bleu_cfg.scale = BleuScale::unit;
      const auto r = bleu(tokenize(read_input(hyp_path)), tokenize(read_input(ref_path)), bleu_cfg);
      std::vector<std::pair<std::string, double>> values = {{"BLEU", r.score}, {"BP", r.brevity_penalty}};
      for (std::size_t n = 0; n < r.precisions.size(); ++n) values.emplace_back("p" + std::to_string(n + 1), r.precisions[n]);
      print_kv(common.format, values);
    } else if (*rg) {
      const auto r = rouge_l(tokenize(read_input(hyp_path)), tokenize(read_input(ref_path)));
      print_kv(common.format, {{"ROUGE-L_P", r.precision},
                               {"ROUGE-L_R", r.recall},
                               {"ROUGE-L_F1", r.score},
                               {"LCS", static_cast<double>(r.lcs_length)}});
    } else if (*bs) {
      const auto provider = make_provider(parse_provider_spec(common.provider));
      const auto hyp = tokenize(read_input(hyp_path));
      const auto ref = tokenize(read_input(ref_path));
      const auto r = greedy_match_score(provider->embed("hypothesis", hyp), provider->embed("reference", ref));
      print_kv(common.format, {{"BERTscore_P", r.precision}, {"BERTscore_R", r.recall}, {"BERTscore_F1", r.f1}});
    } else if (*dg) {
      const auto r = diagnose(read_input(hyp_path), read_input(src_path));
      std::vector<std::pair<std::string, double>> values = {
          {"copy_rate", r.copy_rate},
          {"compression_ratio", r.compression_ratio},
          {"repeated_sentence_count", static_cast<double>(r.repeated_sentence_count)},
          {"max_sentence_multiplicity", static_cast<double>(r.max_sentence_multiplicity)},
          {"longest_repeated_span", static_cast<double>(r.longest_repeated_span)}};
      for (std::size_t n = 0; n < r.repeated_ngram_rate.size(); ++n) {
        values.emplace_back("repeated_" + std::to_string(n + 1) + "gram_rate", r.repeated_ngram_rate[n]);
      }
      print_kv(common.format, values);
    } else if (*mk) {
      const auto abbrevs = abbreviations();
      std::vector<TokenSequence> sentences;
      for (const auto& path : mask_inputs) {
        for (auto& s : split_sentences(read_text_file(path), abbrevs)) sentences.push_back(std::move(s.tokens));
      }
      const auto pairs = generate_masked_pairs(sentences, mask_rate, common.seed, mask_threads);
      export_pairs(std::span<const MaskedPair>(pairs), mask_out);
      std::cerr << "wrote " << pairs.size() << " pairs to " << mask_out << '\n';
    } else if (*sp) {
      const auto docs = load_manifest(common.manifest);
      std::optional<SplitOverride> overrides;
      if (!to_dev.empty() || !to_test.empty() || !to_train.empty()) {
        overrides = SplitOverride{split_ids(to_dev), split_ids(to_test), split_ids(to_train)};
      }
      const auto s = assign_splits(docs, overrides);
      if (common.format == "json") {
        std::cout << json{{"train", s.train_ids}, {"dev", s.dev_ids}, {"test", s.test_ids}}.dump(2) << '\n';
      } else {
        const bool csv = common.format == "csv";
        std::cout << (csv ? "source_id,split\n" : "| source_id | split |\n|---|---|\n");
        for (const auto& d : docs) {
          const char* split = s.dev_ids.contains(d.source_id) ? "dev" : s.test_ids.contains(d.source_id) ? "test" : "train";
          if (csv) std::cout << d.source_id << ',' << split << '\n';
          else std::cout << "| " << d.source_id << " | " << split << " |\n";
        }
      }
    } else if (*ev) {
      const auto records = load_eval_records(records_path);
      const auto provider = make_provider(parse_provider_spec(common.provider));
      EvalConfig cfg;
      cfg.bleu = bleu_cfg;
      cfg.log_base = parse_log_base(common.log_base);
      cfg.threads = ev_threads;
      if (!common.manifest.empty()) {
        std::set<std::string> ids;
        for (const auto& d : load_manifest(common.manifest)) ids.insert(d.source_id);
        cfg.known_ids = std::move(ids);
      }
      const auto result = evaluate_corpus(records, *provider, cfg, label);
      if (common.format == "json") {
        json docs = json::array();
        for (const auto& d : result.documents) docs.push_back(to_json(d));
        const auto avg = json::parse(render_report(std::vector<ReportRow>{result.average}, ReportFormat::json));
        std::cout << json{{"documents", docs}, {"average", avg.at(0)}, {"failed", result.failed}}.dump(2) << '\n';
      } else {
        std::vector<ReportRow> rows;
        for (const auto& d : result.documents) {
          if (d.ok) rows.push_back({d.source_id, d.bertscore.f1, d.rouge_l_f1, d.bleu, d.sup, d.bow});
        }
        rows.push_back(result.average);
        std::cout << render_report(rows, parse_report_format(common.format));
      }
      for (const auto& d : result.documents) {
        if (!d.ok) std::cerr << "failed: " << d.source_id << ": " << d.error << '\n';
      }
      return result.failed == 0 ? kExitOk : kExitPartial;
    } else if (*es) {
      const auto text = read_input(scores_path);
      std::vector<double> scores;
      const auto arr = json::parse(text, nullptr, false);
      if (arr.is_array()) {
        for (const auto& v : arr) scores.push_back(v.get<double>());
      } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          try {
            scores.push_back(std::stod(line));
          } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "bad score '" + line + "'");
          }
        }
      }
      if (patience_opt->count() > 0) policy.patience = patience;
      const auto r = early_stop_select(scores, policy);
      if (common.format == "json") {
        std::cout << json{{"best_epoch", r.best_epoch}, {"stop_epoch", r.stop_epoch}, {"notation", format_epochs(r, policy)}}.dump(2)
                  << '\n';
      } else if (common.format == "csv") {
        std::cout << "best_epoch,stop_epoch,notation\n" << r.best_epoch << ',' << r.stop_epoch << ',' << format_epochs(r, policy) << '\n';
      } else {
        std::cout << "| best_epoch | stop_epoch | notation |\n|---:|---:|---|\n| " << r.best_epoch << " | " << r.stop_epoch
                  << " | " << format_epochs(r, policy) << " |\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (*rp) {
    try {
      const auto rows = parse_report(read_input(report_input), parse_report_format(report_from));
      std::cout << render_report(rows, parse_report_format(common.format));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  return kExitOk;
}
