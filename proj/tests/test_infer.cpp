#include <gtest/gtest.h>

#include <cctype>
#include <random>

#include "oracles.hpp"
#include "rephrasecal/infer.hpp"
#include "rephrasecal/metrics.hpp"

using namespace rephrasecal;

namespace {

AnswerRecord rec(std::string id, int draw, std::optional<char> label) {
  AnswerRecord r;
  r.question_id = std::move(id);
  r.draw_index = draw;
  if (label) r.extracted = ChoiceLabel(*label - 'A');
  return r;
}

}  // namespace

TEST(Extract, FirstStandaloneLabel) {
  EXPECT_EQ(extract_answer("The answer is B. Saliva in the mouth.", 4), ChoiceLabel(1));
  EXPECT_EQ(extract_answer("BANANA is not an option; choose C", 4), ChoiceLabel(2));
  EXPECT_FALSE(extract_answer("no letters here", 4));
}

TEST(Extract, RespectsChoiceCount) {
  EXPECT_FALSE(extract_answer("E", 4));
  EXPECT_EQ(extract_answer("E", 5), ChoiceLabel(4));
  EXPECT_EQ(extract_answer("(D)", 4), ChoiceLabel(3));
  EXPECT_EQ(extract_answer("Answer:C", 4), ChoiceLabel(2));
  EXPECT_FALSE(extract_answer("", 4));
  EXPECT_THROW(extract_answer("A", 1), std::invalid_argument);
  EXPECT_THROW(extract_answer("A", 9), std::invalid_argument);
}

TEST(Extract, LowercaseIsIgnored) { EXPECT_EQ(extract_answer("a or b? B", 2), ChoiceLabel(1)); }

// Property: once a prefix ending in a non-letter yields a label, whatever
// follows cannot change it.
TEST(Extract, PrefixMonotonicity) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ABCDEabcde .,:;()\n";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    for (std::size_t cut = 1; cut <= text.size(); ++cut) {
      const auto prefix = text.substr(0, cut);
      if (std::isalpha(static_cast<unsigned char>(prefix.back()))) continue;
      const auto found = extract_answer(prefix, 4);
      if (found) EXPECT_EQ(extract_answer(text, 4), found) << text;
    }
  }
}

TEST(Aggregate, MajorityWithPartialAgreement) {
  // Athens = A, Paris = B.
  const std::vector<AnswerRecord> recs = {rec("q", 0, 'A'), rec("q", 1, 'B'), rec("q", 2, 'A')};
  const auto s = aggregate(recs, 4);
  EXPECT_EQ(s.predicted, ChoiceLabel(0));
  EXPECT_DOUBLE_EQ(s.confidence, 2.0 / 3.0);
  EXPECT_EQ(s.valid_draws, 3);
}

TEST(Aggregate, UnanimousDraws) {
  std::vector<AnswerRecord> recs;
  for (int d = 0; d < 10; ++d) recs.push_back(rec("q", d, 'C'));
  const auto s = aggregate(recs, 4);
  EXPECT_EQ(s.predicted, ChoiceLabel(2));
  EXPECT_DOUBLE_EQ(s.confidence, 1.0);
}

TEST(Aggregate, TieBreaksToLowestLabel) {
  std::vector<AnswerRecord> recs;
  for (int d = 0; d < 10; ++d) recs.push_back(rec("q", d, d % 2 ? 'A' : 'B'));
  const auto s = aggregate(recs, 2);
  EXPECT_EQ(s.predicted, ChoiceLabel(0));
  EXPECT_DOUBLE_EQ(s.confidence, 0.5);
}

TEST(Aggregate, ParseFailuresExcluded) {
  const std::vector<AnswerRecord> recs = {rec("q", 0, 'B'), rec("q", 1, std::nullopt), rec("q", 2, 'B'),
                                          rec("q", 3, 'A')};
  const auto s = aggregate(recs, 4);
  EXPECT_EQ(s.valid_draws, 3);
  EXPECT_DOUBLE_EQ(s.confidence, 2.0 / 3.0);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate(std::span<const AnswerRecord>{}, 4), std::invalid_argument);
  const std::vector<AnswerRecord> mixed = {rec("q1", 0, 'A'), rec("q2", 0, 'A')};
  EXPECT_THROW(aggregate(mixed, 4), std::invalid_argument);
}

TEST(Naive, FullConfidenceOnSingleAnswer) {
  Question q;
  q.id = "q";
  q.choices = {{ChoiceLabel(0), "x"}, {ChoiceLabel(1), "y"}, {ChoiceLabel(2), "z"}, {ChoiceLabel(3), "w"}};
  const auto s = naive_summary(q, rec("q", 0, 'B'));
  EXPECT_EQ(s.predicted, ChoiceLabel(1));
  EXPECT_DOUBLE_EQ(s.confidence, 1.0);
  EXPECT_EQ(s.distribution, (std::vector<double>{0.0, 1.0, 0.0, 0.0}));
}

// A naive dataset at accuracy 0.742: ECE 0.258, Brier 2(1 - acc) = 0.516, AUROC 0.5.
TEST(Naive, DatasetIdentities) {
  std::vector<ScoredItem> items;
  for (int i = 0; i < 1000; ++i) {
    auto s = summarize_counts("q", {0, 0, 0, 0});
    const bool correct = i < 742;
    s.counts[correct ? 0 : 1] = 1;
    s = summarize_counts("q", s.counts);
    items.push_back(score(s, ChoiceLabel(0)));
  }
  EXPECT_NEAR(accuracy(items), 0.742, 1e-12);
  EXPECT_NEAR(ece(items), 0.258, 1e-12);
  EXPECT_NEAR(brier(items), 0.516, 1e-12);
  ASSERT_TRUE(auroc(items));
  EXPECT_DOUBLE_EQ(*auroc(items), 0.5);
}
