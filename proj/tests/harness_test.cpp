#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "simpeval/harness.hpp"

namespace simpeval {
namespace {

std::vector<EvalRecord> perfect_batch() {
  return {
      {"mils-bruder", "Es war einmal ein Soldat.", "Ein Soldat kam heim.", "Ein Soldat kam heim."},
      {"eb-christo", "Edmond Dantès segelte.", "Dantès kam nach Marseille.", "Dantès kam nach Marseille."},
      {"pv-sandmann", "Nathanael an Lothar.", "Nathanael schreibt an Lothar.", "Nathanael schreibt an Lothar."},
  };
}

// Fails for one document id, delegates otherwise.
class FailingFor final : public EmbeddingProvider {
 public:
  FailingFor(std::string id, const EmbeddingProvider& inner, const EmbeddingProvider& broken)
      : id_(std::move(id)), inner_(inner), broken_(broken) {}
  EmbeddingMatrix embed(std::string_view key, const TokenSequence& tokens) const override {
    return key.starts_with(id_) ? broken_.embed(key, tokens) : inner_.embed(key, tokens);
  }

 private:
  std::string id_;
  const EmbeddingProvider& inner_;
  const EmbeddingProvider& broken_;
};

TEST(EvaluateCorpus, PerfectBatch) {
  const DeterministicProvider provider(7, 16);
  const auto records = perfect_batch();
  const auto result = evaluate_corpus(records, provider);
  EXPECT_EQ(result.failed, 0u);
  EXPECT_EQ(result.documents.size(), 3u);
  EXPECT_EQ(result.average.rouge_l_f1, 1.0);
  EXPECT_EQ(result.average.bleu, 100.0);
  EXPECT_NEAR(result.average.bertscore_f1, 1.0, 1e-12);
}

TEST(EvaluateCorpus, DegenerateBatch) {
  const DeterministicProvider provider(7, 16);
  std::vector<EvalRecord> records;
  for (const auto& r : perfect_batch()) {
    std::string constant;
    for (int i = 0; i < 40; ++i) constant += "Tat ";
    records.push_back({r.source_id, r.source_text, constant, r.reference_text});
  }
  const auto result = evaluate_corpus(records, provider);
  EXPECT_EQ(result.failed, 0u);
  EXPECT_EQ(result.average.bow, 0.0);
  EXPECT_EQ(result.average.bleu, 0.0);
  for (const auto& d : result.documents) EXPECT_DOUBLE_EQ(d.diagnostics.repeated_ngram_rate[0], 39.0 / 40.0);
}

TEST(EvaluateCorpus, FailedRecordIsIsolated) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto spec = parse_provider_spec("http:127.0.0.1:" + std::to_string(port));
  spec.timeout = std::chrono::milliseconds(200);
  const HttpProvider unreachable(spec);
  const DeterministicProvider good(7, 16);
  const FailingFor provider("eb-christo", good, unreachable);

  const auto records = perfect_batch();
  const auto result = evaluate_corpus(records, provider);
  EXPECT_EQ(result.failed, 1u);
  EXPECT_FALSE(result.documents[1].ok);
  EXPECT_NE(result.documents[1].error.find("Timeout"), std::string::npos);
  EXPECT_TRUE(result.documents[0].ok);
  EXPECT_TRUE(result.documents[2].ok);
  EXPECT_EQ(result.average.bleu, 100.0);
}

TEST(EvaluateCorpus, UnknownIdAndShortHypothesisFail) {
  const DeterministicProvider provider(1, 4);
  EvalConfig config;
  config.known_ids = std::set<std::string>{"mils-bruder", "eb-christo"};
  auto records = perfect_batch();
  records[0].hypothesis_text = "Ja";
  const auto result = evaluate_corpus(records, provider, config);
  EXPECT_EQ(result.failed, 2u);
  EXPECT_NE(result.documents[0].error.find("SequenceTooShort"), std::string::npos);
  EXPECT_NE(result.documents[2].error.find("UnknownSourceId"), std::string::npos);
  EXPECT_THROW(evaluate_corpus(std::vector<EvalRecord>{}, provider), Error);
}

TEST(EvaluateCorpusProperty, AverageIsExactMeanAndThreadIndependent) {
  const DeterministicProvider provider(3, 12);
  std::mt19937 gen(71);
  const std::vector<std::string> vocab = {"Er", "mochte", "Dienst", "Tat", ".", "Nach", "dem", "Abendessen", ","};
  std::vector<EvalRecord> records;
  for (int i = 0; i < 24; ++i) {
    auto text = [&] {
      std::string s;
      for (unsigned k = 2 + gen() % 30; k > 0; --k) s += vocab[gen() % vocab.size()] + " ";
      return s;
    };
    records.push_back({"eb-doc" + std::to_string(i), text(), text(), text()});
  }
  const auto serial = evaluate_corpus(records, provider);
  EvalConfig parallel_cfg;
  parallel_cfg.threads = 4;
  const auto parallel = evaluate_corpus(records, provider, parallel_cfg);
  EXPECT_EQ(serial.average, parallel.average);

  double bert = 0, rouge = 0, bleu_sum = 0, sup = 0, bow = 0;
  for (const auto& d : serial.documents) {
    ASSERT_TRUE(d.ok) << d.error;
    bert += d.bertscore.f1;
    rouge += d.rouge_l_f1;
    bleu_sum += d.bleu;
    sup += d.sup;
    bow += d.bow;
  }
  EXPECT_EQ(serial.average.bertscore_f1, bert / 24);
  EXPECT_EQ(serial.average.rouge_l_f1, rouge / 24);
  EXPECT_EQ(serial.average.bleu, bleu_sum / 24);
  EXPECT_EQ(serial.average.sup, sup / 24);
  EXPECT_EQ(serial.average.bow, bow / 24);
}

TEST(EvalRecords, JsonSerialization) {
  const DeterministicProvider provider(7, 16);
  const auto records = perfect_batch();
  const auto result = evaluate_corpus(records, provider);
  const auto obj = to_json(result.documents[0]);
  EXPECT_EQ(obj["source_id"], "mils-bruder");
  EXPECT_EQ(obj["rouge_l_f1"], 1.0);
  EXPECT_EQ(obj["diagnostics"]["repeated_ngram_rate"].size(), 8u);
}

TEST(EarlyStop, Examples) {
  std::vector<double> decreasing;
  for (int i = 0; i < 30; ++i) decreasing.push_back(1.0 - 0.01 * i);
  EXPECT_EQ(early_stop_select(decreasing, {100, 10}), (EarlyStopResult{0, 10}));

  std::vector<double> peak;
  for (int i = 0; i < 40; ++i) peak.push_back(i <= 11 ? 0.1 + 0.01 * i : 0.2 - 0.001 * i);
  const EarlyStopPolicy policy{100, 10};
  const auto r = early_stop_select(peak, policy);
  EXPECT_EQ(r, (EarlyStopResult{11, 21}));
  EXPECT_EQ(format_epochs(r, policy), "11 (100;10)");

  EXPECT_EQ(early_stop_select(std::vector<double>{0.5}, {100, 10}), (EarlyStopResult{0, 1}));
}

TEST(EarlyStop, WithoutPatienceAndTies) {
  const std::vector<double> s = {0.1, 0.3, 0.3, 0.2, 0.1};
  EXPECT_EQ(early_stop_select(s, {100, std::nullopt}), (EarlyStopResult{1, 5}));
  EXPECT_EQ(early_stop_select(s, {3, std::nullopt}), (EarlyStopResult{1, 3}));
  EXPECT_EQ(early_stop_select(s, {100, 2}), (EarlyStopResult{1, 3}));
}

TEST(EarlyStop, Errors) {
  try {
    early_stop_select(std::vector<double>{}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScores);
  }
  EXPECT_THROW(early_stop_select(std::vector<double>{1.0}, {0, std::nullopt}), Error);
  EXPECT_THROW(early_stop_select(std::vector<double>{1.0}, {10, 0}), Error);
}

TEST(EarlyStopProperty, AppendingAfterStopChangesNothing) {
  std::mt19937 gen(72);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(1 + gen() % 60);
    for (auto& x : s) x = u(gen);
    const EarlyStopPolicy policy{1 + static_cast<int>(gen() % 50), 1 + static_cast<int>(gen() % 8)};
    const auto r = early_stop_select(s, policy);
    const bool triggered = r.stop_epoch < static_cast<int>(std::min<std::size_t>(s.size(), policy.max_epochs));
    if (!triggered && r.stop_epoch != policy.max_epochs) continue;
    auto longer = s;
    for (int k = 0; k < 10; ++k) longer.push_back(u(gen) * 2.0);
    EXPECT_EQ(early_stop_select(longer, policy), r);
  }
}

std::vector<ReportRow> table_rows() {
  return {{"- / 0", 0.682, 0.127, 1.43, 1.0, 6.685},
          {"- / 11 (100;10)", 0.318, 0.0, 0.0, 340.0, 0.003},
          {"100 texts, lr auto | fallback \"3e-10\"", 0.298, 0.0, 0.0, 49.666, 0.0441}};
}

TEST(Report, HeaderAndRows) {
  const auto csv = render_report(std::vector<ReportRow>{table_rows()[0]}, ReportFormat::csv);
  EXPECT_EQ(csv, "label,BERTscore_F1,ROUGE-L_F1,BLEU,SUP,BOW\n- / 0,0.682,0.127,1.430,1.000,6.6850\n");
  EXPECT_EQ(render_report(std::vector<ReportRow>{}, ReportFormat::csv), "label,BERTscore_F1,ROUGE-L_F1,BLEU,SUP,BOW\n");
  const auto md = render_report(std::vector<ReportRow>{}, ReportFormat::markdown);
  EXPECT_EQ(md, "| label | BERTscore_F1 | ROUGE-L_F1 | BLEU | SUP | BOW |\n|---|---:|---:|---:|---:|---:|\n");
}

TEST(Report, RoundTripsAtPrintedPrecision) {
  const auto rows = table_rows();
  for (auto format : {ReportFormat::csv, ReportFormat::markdown, ReportFormat::json}) {
    const auto text = render_report(rows, format);
    const auto back = parse_report(text, format);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(back[i].label, rows[i].label);
      EXPECT_NEAR(back[i].bertscore_f1, rows[i].bertscore_f1, 5e-4);
      EXPECT_NEAR(back[i].bow, rows[i].bow, 5e-5);
      EXPECT_NEAR(back[i].sup, rows[i].sup, 5e-4);
    }
    EXPECT_EQ(render_report(back, format), text);
  }
}

TEST(Report, RandomRowsRoundTrip) {
  std::mt19937 gen(73);
  std::uniform_real_distribution<double> u(0.0, 400.0);
  std::vector<ReportRow> rows;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({"row, " + std::to_string(i) + (i % 3 ? "|x" : "\""), u(gen), u(gen), u(gen), u(gen), u(gen)});
  }
  for (auto format : {ReportFormat::csv, ReportFormat::markdown, ReportFormat::json}) {
    const auto text = render_report(rows, format);
    EXPECT_EQ(render_report(parse_report(text, format), format), text);
  }
}

TEST(Report, ParseErrors) {
  EXPECT_THROW(parse_report("label,a\nx,1,2\n", ReportFormat::csv), Error);
  EXPECT_THROW(parse_report("h\nx,1,2,3,4,zz\n", ReportFormat::csv), Error);
  EXPECT_THROW(parse_report("{}", ReportFormat::json), Error);
  EXPECT_THROW(parse_report("| h |\n|---|\nnot a row\n", ReportFormat::markdown), Error);
  EXPECT_THROW(parse_report_format("xml"), Error);
}

}  // namespace
}  // namespace simpeval
