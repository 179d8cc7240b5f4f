#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "../common/lda_cases.hpp"
#include "microevent/error.hpp"

using namespace microevent;
using namespace lda_cases;

namespace {

Vocabulary letters(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back(std::string(1, static_cast<char>('a' + i)));
  return Vocabulary(t, std::vector<std::size_t>(n, 1));
}

LdaConfig small(int K, std::uint64_t seed = 3) {
  LdaConfig c;
  c.K = K;
  c.burn_in = 20;
  c.total_iterations = 60;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(LdaConfig, Validation) {
  LdaConfig c;
  EXPECT_DOUBLE_EQ(c.alpha_value(), 5.0);
  c.K = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LdaConfig{};
  c.burn_in = 500;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LdaConfig{};
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Lda, SingleTopicIsSmoothedUnigram) {
  const std::vector<Document> docs{{0, 0, 1}, {0, 2}, {0}};
  const auto m = train_lda(docs, letters(3), small(1));
  // counts a:4 b:1 c:1, beta 0.01
  EXPECT_NEAR(m.phi(0, 0), (4 + 0.01) / (6 + 0.03), 1e-12);
  EXPECT_NEAR(m.phi(0, 1), (1 + 0.01) / (6 + 0.03), 1e-12);
  EXPECT_EQ(top_words(m, 0, 1).front().first, "a");
  EXPECT_EQ(infer_theta(m, docs[0], 10, 1), std::vector<double>{1.0});
  EXPECT_THROW(train_lda(std::vector<Document>{}, letters(3), small(1)), Error);
}

TEST(Lda, CountConservationAfterEverySweep) {
  const auto c = recovery_corpus();
  GibbsSampler s(c.docs, 40, recovery_config(5));
  for (int it = 0; it < 5; ++it) {
    s.sweep();
    for (std::size_t d = 0; d < c.docs.size(); d += 17) {
      int n = 0;
      for (int k = 0; k < 2; ++k) n += s.doc_topic(d, k);
      EXPECT_EQ(n, static_cast<int>(c.docs[d].size()));
    }
    for (int k = 0; k < 2; ++k) {
      int n = 0;
      for (std::uint32_t w = 0; w < 40; ++w) n += s.topic_word(k, w);
      EXPECT_EQ(n, s.topic_total(k));
    }
  }
}

TEST(Lda, RecoversDisjointVocabularies) {
  const auto c = recovery_corpus();
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto m = train_lda(c.docs, c.vocab, recovery_config(seed));
    EXPECT_GE(recovery_rate(c, m, 1000 * seed), 0.95) << "seed " << seed;
    for (int k = 0; k < 2; ++k) {
      const auto row = m.phi_row(k);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    }
    // log-likelihood trend over the sampled sweeps
    const auto& tr = m.log_likelihood_trace;
    ASSERT_GE(tr.size(), 20u);
    const double first = std::accumulate(tr.begin(), tr.begin() + 10, 0.0);
    const double last = std::accumulate(tr.end() - 10, tr.end(), 0.0);
    EXPECT_GE(last, first - 1e-9 * std::abs(first));
  }
}

TEST(Lda, GibbsMatchesExhaustiveEnumeration) {
  const auto r = gibbs_enumeration();
  double s = 0.0;
  for (double p : r.exact) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_LE(r.max_abs_diff, 0.02);
}

TEST(Lda, DeterministicForSeed) {
  const auto c = recovery_corpus();
  auto cfg = small(3, 11);
  const auto a = train_lda(c.docs, c.vocab, cfg);
  const auto b = train_lda(c.docs, c.vocab, cfg);
  EXPECT_EQ(a.topic_word_counts, b.topic_word_counts);
  cfg.seed = 12;
  EXPECT_NE(train_lda(c.docs, c.vocab, cfg).topic_word_counts, a.topic_word_counts);
}

TEST(InferTheta, EmptyDocIsUniformAndThetaSumsToOne) {
  const auto c = recovery_corpus();
  const auto m = train_lda(c.docs, c.vocab, small(4));
  EXPECT_EQ(infer_theta(m, {}, 10, 1), std::vector<double>(4, 0.25));
  const auto th = infer_theta(m, c.docs[0], 20, 1);
  EXPECT_NEAR(std::accumulate(th.begin(), th.end(), 0.0), 1.0, 1e-9);
  EXPECT_EQ(th, infer_theta(m, c.docs[0], 20, 1));
}

TEST(TopWords, TiesAndBounds) {
  const std::vector<Document> docs{{1, 1, 0, 0, 2}};
  const auto m = train_lda(docs, letters(3), small(1));
  const auto tw = top_words(m, 0, 5);
  ASSERT_EQ(tw.size(), 3u);
  EXPECT_EQ(tw[0].first, "a");
  EXPECT_EQ(tw[1].first, "b");
  EXPECT_EQ(tw[2].first, "c");
  EXPECT_TRUE(top_words(m, 0, 0).empty());
}

TEST(Coherence, ToyCorpusMatchesHandComputation) {
  const auto ref = cv_toy_corpus();
  const auto r = coherence_cv_words({{0, 1}, {0, 4}, {1, 2, 4}, {0, 1, 2, 3}}, ref, 3);
  ASSERT_EQ(r.per_topic.size(), 4u);
  EXPECT_NEAR(r.per_topic[0], kCvAB, 1e-6);
  EXPECT_NEAR(r.per_topic[1], kCvAE, 1e-6);
  EXPECT_NEAR(r.per_topic[2], kCvBCE, 1e-6);
  EXPECT_NEAR(r.per_topic[3], kCvABCD, 1e-6);
  EXPECT_NEAR(r.mean, (kCvAB + kCvAE + kCvBCE + kCvABCD) / 4, 1e-6);
  EXPECT_GT(r.per_topic[0], r.per_topic[1]);
  EXPECT_LT(r.per_topic[1], 0.3);
}

TEST(Coherence, ShortCorpusIsOneWindowAndFlagsDegenerate) {
  const std::vector<Document> ref{{0, 1, 2}};
  const auto r = coherence_cv_words({{0, 1}, {0, 7}}, ref, 110);
  EXPECT_TRUE(r.degenerate_npmi);
  EXPECT_EQ(r.short_topics, std::vector<int>{1});
}

TEST(Elbow, ChordDistance) {
  const std::vector<double> x{5, 10, 15, 20}, y{0.30, 0.50, 0.52, 0.53};
  const auto e = elbow_select(x, y);
  EXPECT_EQ(e.index, 1u);
  EXPECT_FALSE(e.no_elbow);
  const std::vector<double> lin{0.1, 0.2, 0.3, 0.4};
  const auto l = elbow_select(x, lin);
  EXPECT_TRUE(l.no_elbow);
  EXPECT_EQ(l.index, 3u);
}

TEST(SelectK, DeterministicCurve) {
  const auto c = recovery_corpus();
  const std::vector<int> ks{2, 3, 4};
  auto cfg = small(2, 7);
  const auto a = select_k(c.docs, c.vocab, ks, cfg, 1, 10, 110, 1);
  const auto b = select_k(c.docs, c.vocab, ks, cfg, 1, 10, 110, 2);
  ASSERT_EQ(a.curve.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.curve[i].coherence, b.curve[i].coherence);
  EXPECT_EQ(a.chosen_k, b.chosen_k);
  EXPECT_THROW(select_k(c.docs, c.vocab, std::vector<int>{2, 3}, cfg), ConfigError);
}

TEST(TopicModelIo, RoundTrip) {
  const auto c = recovery_corpus();
  const auto m = train_lda(c.docs, c.vocab, small(3));
  std::stringstream h, counts;
  write_topic_model(m, h, counts);
  const auto back = read_topic_model(h, counts, c.vocab);
  EXPECT_EQ(back.topic_word_counts, m.topic_word_counts);
  EXPECT_EQ(back.K(), 3);
  EXPECT_EQ(back.phi(1, 5), m.phi(1, 5));
}
