#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <unicode/uchar.h>

#include "simpeval/textcore.hpp"

namespace simpeval {
namespace {

std::vector<std::string> surfaces(const TokenSequence& seq) {
  std::vector<std::string> out;
  for (const auto& t : seq) out.push_back(t.surface);
  return out;
}

TEST(Tokenize, EmptyText) {
  EXPECT_EQ(tokenize("").size(), 0u);
  EXPECT_EQ(tokenize(" \n\t ").size(), 0u);
}

TEST(Tokenize, GermanSentence) {
  const auto seq = tokenize("So ist es in der Tat.");
  ASSERT_EQ(seq.size(), 7u);
  EXPECT_EQ(seq[6].surface, ".");
  EXPECT_TRUE(seq[6].is_punctuation);
  EXPECT_EQ(seq[0].normalized, "so");
  EXPECT_EQ(seq.word_count(), 6u);
}

TEST(Tokenize, AbbreviationPeriodIsDetached) {
  EXPECT_EQ(surfaces(tokenize("Dr. Jekyll")), (std::vector<std::string>{"Dr", ".", "Jekyll"}));
}

TEST(Tokenize, EdgePunctuationDetachesEachCharacter) {
  EXPECT_EQ(surfaces(tokenize("\xE2\x80\x9E" "Ach!?\xE2\x80\x9C")),
            (std::vector<std::string>{"\xE2\x80\x9E", "Ach", "!", "?", "\xE2\x80\x9C"}));
  EXPECT_EQ(surfaces(tokenize("lange - lange")), (std::vector<std::string>{"lange", "-", "lange"}));
}

TEST(Tokenize, HyphenatedWordsStayIntact) {
  EXPECT_EQ(surfaces(tokenize("Mittags-Essen, z.B. 3,5")),
            (std::vector<std::string>{"Mittags-Essen", ",", "z.B", ".", "3,5"}));
}

TEST(Tokenize, ApostropheSeparates) {
  EXPECT_EQ(surfaces(tokenize("geht's")), (std::vector<std::string>{"geht", "'", "s"}));
  EXPECT_EQ(surfaces(tokenize("geht\xE2\x80\x99s")), (std::vector<std::string>{"geht", "\xE2\x80\x99", "s"}));
}

TEST(Tokenize, MaskTokenIsReserved) {
  const auto seq = tokenize("Er <mask> sehr <mask>.");
  EXPECT_EQ(surfaces(seq), (std::vector<std::string>{"Er", "<mask>", "sehr", "<mask>", "."}));
  EXPECT_FALSE(seq[1].is_punctuation);
}

TEST(Tokenize, FullCaseFolding) {
  const auto seq = tokenize("STRASSE Straße \xC3\x84RGER \xE1\xBA\x9E");
  EXPECT_EQ(seq[0].normalized, "strasse");
  EXPECT_EQ(seq[1].normalized, "strasse");
  EXPECT_EQ(seq[2].normalized, "\xC3\xA4rger");
  EXPECT_EQ(seq[3].normalized, "ss");
}

TEST(Tokenize, OffsetsPointIntoSource) {
  const std::string text = "  Mutter zürnt wohl.";
  for (const auto& t : tokenize(text)) {
    EXPECT_EQ(text.substr(t.begin, t.end - t.begin), t.surface);
  }
}

std::string random_text(std::mt19937& gen) {
  static const std::vector<std::string> pieces = {
      "Clara", "mag", "glauben", "\xC3\x84rger", "Stra\xC3\x9F" "e", "ENGEL", "z.B", "-", ".", ",", "!", "?",
      "\xE2\x80\xA6", "'", "\xE2\x80\x99", "\xE2\x80\x9E", "\xE2\x80\x9C", "(", ")", " ", " ", "  ", "\n",
      "<mask>", "3,5", "Mit-Arbeiter", "\xC3\x89t\xC3\xA9", "\xCE\xA3\xCE\xBF\xCF\x86\xCE\xAF\xCE\xB1"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 40);
  std::string out;
  for (int i = len(gen); i > 0; --i) out += pieces[pick(gen)];
  return out;
}

TEST(TokenizeProperty, IdempotentOnNormalizedJoin) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto text = random_text(gen);
    const auto first = tokenize(text).normalized();
    std::string joined;
    for (const auto& t : first) joined += t + " ";
    EXPECT_EQ(tokenize(joined).normalized(), first) << text;
  }
}

TEST(TokenizeProperty, NormalizedHasNoUppercase) {
  std::mt19937 gen(12);
  for (int trial = 0; trial < 1000; ++trial) {
    for (const auto& t : tokenize(random_text(gen))) {
      for (std::size_t pos = 0; pos < t.normalized.size();) {
        EXPECT_FALSE(u_isupper(unicode::next(t.normalized, pos))) << t.normalized;
      }
      EXPECT_FALSE(t.surface.empty());
    }
  }
}

TEST(TokenizeProperty, NoAlphanumericContentLost) {
  std::mt19937 gen(13);
  auto alnum = [](std::string_view s) {
    std::string out;
    for (std::size_t pos = 0; pos < s.size();) {
      const std::size_t at = pos;
      if (u_isalnum(unicode::next(s, pos))) out += s.substr(at, pos - at);
    }
    return out;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto text = random_text(gen);
    EXPECT_EQ(alnum(tokenize(text).joined()), alnum(text));
  }
}

std::vector<std::string> sentence_texts(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.push_back(s.tokens.joined());
  return out;
}

TEST(SplitSentences, TwoTerminalPeriods) {
  const auto s = split_sentences("A. B.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].span, (SentenceSpan{0, 2}));
  EXPECT_EQ(s[1].span, (SentenceSpan{2, 4}));
}

TEST(SplitSentences, EmptyText) { EXPECT_TRUE(split_sentences("").empty()); }

TEST(SplitSentences, SplitsBeforeDashIntroducedSentence) {
  const auto s = split_sentences("Etwas Entsetzliches ist in mein Leben getreten! - Dunkle Ahnungen\xE2\x80\xA6");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].tokens.joined(), "Etwas Entsetzliches ist in mein Leben getreten !");
  EXPECT_EQ(s[1].tokens.joined(), "- Dunkle Ahnungen \xE2\x80\xA6");
}

TEST(SplitSentences, RepeatedSentencesFromGeneratedOutput) {
  const auto s = split_sentences("So ist in der Tat. So ist es in der Tat. - Nun fort zur Sache!Au\xC3\x9F" "er dem Mit");
  EXPECT_EQ(sentence_texts(s), (std::vector<std::string>{"So ist in der Tat .", "So ist es in der Tat .",
                                                         "- Nun fort zur Sache!Au\xC3\x9F" "er dem Mit"}));
}

TEST(SplitSentences, NoSplitBeforeLowercase) {
  EXPECT_EQ(split_sentences("Es war 3. sie kam.").size(), 1u);
}

TEST(SplitSentences, AbbreviationsDoNotSplit) {
  EXPECT_EQ(split_sentences("Dr. Jekyll kam z.B. Nachts. Er ging.").size(), 2u);
  EXPECT_EQ(split_sentences("Dr. Jekyll kam.", std::set<std::string>{}).size(), 2u);
}

TEST(SplitSentences, ClosingQuoteStaysWithSentence) {
  const auto s = split_sentences("Er rief: \xE2\x80\x9EHilfe!\xE2\x80\x9C Dann schwieg er.");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].tokens[s[0].tokens.size() - 1].surface, "\xE2\x80\x9C");
}

TEST(SplitSentencesProperty, SpansPartitionTokenRange) {
  std::mt19937 gen(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto text = random_text(gen);
    const auto seq = tokenize(text);
    const auto sentences = split_sentences(text);
    std::size_t expect_start = 0;
    for (const auto& s : sentences) {
      EXPECT_EQ(s.span.start, expect_start);
      EXPECT_LT(s.span.start, s.span.end);
      EXPECT_EQ(s.tokens, seq.slice(s.span.start, s.span.end));
      expect_start = s.span.end;
    }
    EXPECT_EQ(expect_start, seq.size());
  }
}

TEST(Abbreviations, LoadsShippedList) {
  const auto list = load_abbreviations(std::string(SIMPEVAL_DATA_DIR) + "/abbreviations_de.txt");
  EXPECT_TRUE(list.contains("z.B."));
  EXPECT_TRUE(list.contains("usw."));
  EXPECT_FALSE(list.contains("# One abbreviation per line, including the trailing period."));
  EXPECT_THROW(load_abbreviations("/nonexistent/abbrev.txt"), Error);
}

}  // namespace
}  // namespace simpeval
