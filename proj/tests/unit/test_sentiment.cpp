#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "microevent/sentiment.hpp"

using namespace microevent;

namespace {

SentimentLexicon toy() { return SentimentLexicon({{"good", 1.9}, {"great", 3.1}, {"bad", -2.5}, {"nice", 2.0}}); }

}  // namespace

TEST(Sentiment, EmptyTextIsAllZero) {
  const auto s = score_sentiment("", toy());
  EXPECT_EQ(s.negative, 0.0);
  EXPECT_EQ(s.neutral, 0.0);
  EXPECT_EQ(s.positive, 0.0);
  EXPECT_EQ(s.compound, 0.0);
}

TEST(Sentiment, SingleTokenCompound) {
  const auto s = score_sentiment("nice", toy());
  EXPECT_NEAR(s.compound, 0.4588, 1e-4);
  EXPECT_NEAR(s.compound, 2.0 / std::sqrt(19.0), 1e-12);
  EXPECT_DOUBLE_EQ(s.positive, 1.0);
}

TEST(Sentiment, NegationFlipsAndScales) {
  const auto s = score_sentiment("not good", toy());
  const double v = -1.9 * 0.74;
  EXPECT_NEAR(s.compound, v / std::sqrt(v * v + 15.0), 1e-12);
  EXPECT_NEAR(s.compound, -0.341, 1e-3);
  // shares: "not" counts 1 neutral, negated "good" counts |v - 1|
  const double neg = std::abs(v - 1.0);
  EXPECT_NEAR(s.negative, neg / (neg + 1.0), 1e-12);
  EXPECT_NEAR(s.neutral, 1.0 / (neg + 1.0), 1e-12);
  EXPECT_EQ(s.positive, 0.0);
}

TEST(Sentiment, NegationWindowIsThreeTokens) {
  const auto near = score_sentiment("don't really think good", toy());
  const auto far = score_sentiment("not a b c good", toy());
  EXPECT_LT(near.compound, 0.0);
  EXPECT_GT(far.compound, 0.0);
  EXPECT_TRUE(is_negator("never"));
  EXPECT_FALSE(is_negator("good"));
}

TEST(Sentiment, SharesSumToOneAndCompoundBounded) {
  const auto s = score_sentiment("great bad nice thing BAD", toy());
  EXPECT_NEAR(s.negative + s.neutral + s.positive, 1.0, 1e-12);
  const double sum = 3.1 - 2.5 + 2.0 - 2.5;
  EXPECT_NEAR(s.compound, sum / std::sqrt(sum * sum + 15.0), 1e-12);
  EXPECT_LE(std::abs(score_sentiment("great great great great great great", toy()).compound), 1.0);
}

TEST(Sentiment, TokensKeepInnerApostrophes) {
  EXPECT_EQ(sentiment_tokens("Don't STOP, it's 'quoted'"),
            (std::vector<std::string>{"don't", "stop", "it's", "quoted"}));
}

TEST(SentimentLexicon, TsvAndBuiltin) {
  std::istringstream in("# comment\ngood\t1.9\t0.5\t[1,2]\n\nbad\t-2.5\n");
  const auto lex = SentimentLexicon::read_tsv(in);
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_DOUBLE_EQ(lex.valence("bad"), -2.5);
  EXPECT_DOUBLE_EQ(lex.valence("missing"), 0.0);
  EXPECT_GT(SentimentLexicon::builtin().size(), 100u);
  EXPECT_GT(SentimentLexicon::builtin().valence("good"), 0.0);
}
