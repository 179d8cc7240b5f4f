#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "microevent/error.hpp"
#include "microevent/porter_stemmer.hpp"
#include "microevent/textprep.hpp"

using namespace microevent;

namespace {

using Streams = std::vector<std::vector<std::string>>;

}  // namespace

TEST(StripMarkup, DropsCodeBlocksAndTags) {
  EXPECT_EQ(strip_markup("<p>Use <b>this</b> call</p><pre><code>x = 1\ny()</code></pre> now"), "Use this call now");
  EXPECT_EQ(strip_markup("a &amp; b"), "a & b");
  EXPECT_EQ(strip_markup("x &lt;y&gt; z"), "x y z");
  EXPECT_EQ(strip_markup("keep <code>unclosed block"), "keep");
  EXPECT_EQ(strip_markup("   "), "");
}

TEST(StripMarkup, Idempotent) {
  for (const char* s : {"<p>Hi &amp;amp; there</p>", "x<br/>y", "<pre>a</pre>b<code>c", "&lt;p&gt;text&lt;/p&gt;"}) {
    const auto once = strip_markup(s);
    EXPECT_EQ(strip_markup(once), once) << s;
  }
}

TEST(Tokenize, StemsAndDropsShortAndNumeric) {
  const Stopwords none;
  EXPECT_EQ(tokenize_normalize("Testing tests!", none), (std::vector<std::string>{"test", "test"}));
  EXPECT_TRUE(tokenize_normalize("x2 42", none).empty());
  EXPECT_EQ(tokenize_normalize("ab abc 1234 v2x", none), (std::vector<std::string>{"abc", "v2x"}));
}

TEST(Tokenize, StopwordsCheckedBeforeStemming) {
  const Stopwords sw{"testing", "the"};
  EXPECT_EQ(tokenize_normalize("The testing tests", sw), (std::vector<std::string>{"test"}));
  EXPECT_TRUE(default_stopwords().count("the"));
}

TEST(Stopwords, ReaderSkipsCommentsAndBlanks) {
  std::istringstream in("# header\nfoo\n\n  bar  \n#baz\n");
  const auto sw = read_stopwords(in);
  EXPECT_EQ(sw.size(), 2u);
  EXPECT_TRUE(sw.count("foo"));
  EXPECT_TRUE(sw.count("bar"));
}

// Expected stems were produced by NLTK's PorterStemmer in ORIGINAL_ALGORITHM
// mode. Words of one or two letters are returned untouched by this stemmer,
// as in Porter's reference implementation, so none are listed.
TEST(PorterStemmer, MatchesReferenceStems) {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"},  {"ponies", "poni"},       {"ties", "ti"},
      {"caress", "caress"},    {"cats", "cat"},           {"feed", "feed"},
      {"agreed", "agre"},      {"plastered", "plaster"},  {"bled", "bled"},
      {"motoring", "motor"},   {"sing", "sing"},          {"conflated", "conflat"},
      {"troubled", "troubl"},  {"sized", "size"},         {"hopping", "hop"},
      {"tanned", "tan"},       {"falling", "fall"},       {"hissing", "hiss"},
      {"fizzed", "fizz"},      {"failing", "fail"},       {"filing", "file"},
      {"happy", "happi"},      {"sky", "sky"},            {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"}, {"valenci", "valenc"},
      {"digitizer", "digit"},  {"radicalli", "radic"},    {"differentli", "differ"},
      {"vileli", "vile"},      {"analogousli", "analog"}, {"vietnamization", "vietnam"},
      {"predication", "predic"}, {"operator", "oper"},    {"feudalism", "feudal"},
      {"decisiveness", "decis"}, {"hopefulness", "hope"}, {"callousness", "callous"},
      {"formaliti", "formal"}, {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"},
      {"triplicate", "triplic"}, {"formative", "form"},   {"formalize", "formal"},
      {"electriciti", "electr"}, {"electrical", "electr"}, {"hopeful", "hope"},
      {"goodness", "good"},    {"revival", "reviv"},      {"allowance", "allow"},
      {"inference", "infer"},  {"airliner", "airlin"},    {"gyroscopic", "gyroscop"},
      {"adjustable", "adjust"}, {"defensible", "defens"}, {"irritant", "irrit"},
      {"replacement", "replac"}, {"adjustment", "adjust"}, {"dependent", "depend"},
      {"adoption", "adopt"},   {"homologou", "homolog"},  {"communism", "commun"},
      {"activate", "activ"},   {"angulariti", "angular"}, {"effective", "effect"},
      {"bowdlerize", "bowdler"}, {"probate", "probat"},   {"rate", "rate"},
      {"cease", "ceas"},       {"controll", "control"},   {"roll", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"}, {"testing", "test"},
      {"tests", "test"},       {"upgraded", "upgrad"},    {"deprecated", "deprec"},
      {"migrations", "migrat"}, {"queryset", "queryset"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(porter_stem(word), stem) << word;
}

TEST(Collocations, ScoreMatchesHandComputation) {
  // types: unit, test, foo, bar -> N = 4. count(unit,test) = 3,
  // count(unit) = 3, count(test) = 4.
  const Streams s{{"unit", "test", "foo"}, {"unit", "test", "bar"}, {"unit", "test", "test"}};
  const auto m = PhraseModel::fit(s, 2, 0.0);
  EXPECT_NEAR(m.score("unit", "test"), (3.0 - 2.0) * 4.0 / (3.0 * 4.0), 1e-12);
  EXPECT_EQ(m.apply(s[0]), (std::vector<std::string>{"unit_test", "foo"}));
  // count 1 pairs never pass min_count = 2
  EXPECT_LE(m.score("test", "foo"), 0.0);
}

TEST(Collocations, InfiniteThresholdIsIdentity) {
  const Streams s{{"unit", "test", "foo"}, {"unit", "test", "bar"}, {"unit", "test", "test"}};
  const auto c = detect_collocations(s, 1, std::numeric_limits<double>::infinity());
  for (const auto& t : s) EXPECT_EQ(c.apply(t), t);
}

TEST(Collocations, SecondPassFormsTrigrams) {
  Streams s;
  for (int i = 0; i < 30; ++i) s.push_back({"new", "york", "city", "word" + std::to_string(i)});
  const auto c = detect_collocations(s, 5, 0.5);
  EXPECT_EQ(c.apply(s[0]).front(), "new_york_city");
}

TEST(Vocabulary, DocumentFrequencyBounds) {
  // D = 10. "common" in all 10 (over 0.5), "rare" in 1 (< min_df 2),
  // "mid" in 5 (= 0.5, kept), "two" in 2 (kept).
  Streams s(10);
  for (int i = 0; i < 10; ++i) {
    s[i].push_back("common");
    if (i < 5) s[i].push_back("mid");
    if (i < 2) s[i].insert(s[i].end(), {"two", "two"});
    if (i == 0) s[i].push_back("rare");
  }
  const auto v = build_vocabulary(s, 2, 0.5);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"mid", "two"}));
  EXPECT_EQ(v.df(*v.id("two")), 2u);
  EXPECT_FALSE(v.id("common"));
  EXPECT_THROW(build_vocabulary(Streams{{"a"}}, 5, 0.5), Error);
}

TEST(Vocabulary, EncodeAndTsvRoundTrip) {
  const Vocabulary v({"alpha", "beta", "gamma"}, {3, 2, 1});
  const std::vector<std::string> toks{"gamma", "alpha", "zzz", "gamma"};
  EXPECT_EQ(encode_bow(toks, v), (BowVector{{0, 1}, {2, 2}}));
  EXPECT_EQ(encode_ids(toks, v), (std::vector<std::uint32_t>{2, 0, 2}));
  std::stringstream io;
  v.write_tsv(io);
  const auto back = Vocabulary::read_tsv(io);
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.df(1), 2u);
}
