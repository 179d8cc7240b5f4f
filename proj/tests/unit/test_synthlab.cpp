#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "microevent/error.hpp"
#include "microevent/rng.hpp"
#include "microevent/strings.hpp"
#include "microevent/synthlab.hpp"
#include "microevent/textprep.hpp"

using namespace microevent;

namespace {

SyntheticConfig small_config() {
  SyntheticConfig c;
  c.background_vocab_size = 300;
  c.n_background_topics = 5;
  c.n_steps = 40;
  c.messages_per_step = 10;
  c.positive_ratio = 0.25;
  c.f_grid = {0.1, 0.3, 0.5};
  c.n_instances = 3;
  c.seed = 5;
  return c;
}

bool contains_phrase(const std::string& text, const std::vector<std::pair<std::string, std::string>>& phrases) {
  for (const auto& [n, v] : phrases)
    if (text.find(n + " " + v) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Generator, BackgroundBasics) {
  const auto c = small_config();
  EXPECT_TRUE(generate_background(c, 0).empty());
  const auto a = generate_background(c, 50);
  const auto b = generate_background(c, 50);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].body_raw, b[i].body_raw);
  const auto verbs = SeedLexicon::builtin().all_verbs();
  for (const auto& m : a) {
    for (const auto& t : token_set(m.body_raw)) EXPECT_FALSE(verbs.count(t)) << t;
    const auto n = split(m.body_raw, ' ').size();
    EXPECT_GE(n, c.min_length);
    EXPECT_LE(n, c.max_length);
  }
}

TEST(Generator, EventMessagesCarryActivePhrases) {
  const auto c = small_config();
  const SyntheticGenerator gen(c, SeedLexicon::builtin());
  Rng r1(1), r2(2);
  const auto act1 = gen.draw_active_phrases(r1);
  const auto act2 = gen.draw_active_phrases(r2);
  EXPECT_EQ(act1.size(), c.active_phrases);
  EXPECT_NE(act1, act2);
  const auto msgs = gen.event_related(100, act1, r1, "e");
  for (const auto& m : msgs) EXPECT_TRUE(contains_phrase(m.body_raw, act1)) << m.body_raw;
  auto bad = c;
  bad.phrases_per_message = 0;
  try {
    bad.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("not event-related"), std::string::npos);
  }
  EXPECT_THROW(SyntheticGenerator(c, SeedLexicon::from_json(R"({"nouns":{},"verbs":{}})")), Error);
}

TEST(Bagging, Arithmetic) {
  EXPECT_EQ(round_half_down(83.75), 84u);
  EXPECT_EQ(round_half_down(2.5), 2u);
  EXPECT_EQ(round_half_down(3.5), 3u);
  EXPECT_EQ(event_messages_per_step(0.25, 100), 25u);
  EXPECT_EQ(event_messages_per_step(0.1, 60), 6u);
  EXPECT_EQ(event_messages_per_step(0.45, 60), 27u);
  EXPECT_EQ(event_messages_per_step(0.0, 60), 0u);
}

TEST(Bagging, DefaultShapedInstance) {
  auto c = small_config();
  c.n_steps = 335;
  c.messages_per_step = 4;
  const SyntheticGenerator gen(c, SeedLexicon::builtin());
  Rng rng(3);
  const auto bg = gen.background(335 * 4, rng, "b");
  const auto ev = gen.event_related(84 * 1, gen.draw_active_phrases(rng), rng, "e");
  const auto bag = bag_timesteps(bg, ev, 0.25, 335, 0.25, 4, 9);
  std::size_t pos = 0;
  std::set<std::string> used;
  for (const auto& s : bag.steps) {
    pos += s.is_event();
    EXPECT_EQ(s.message_ids.size(), 4u);
    std::size_t n_event = 0;
    for (const auto& id : s.message_ids) {
      EXPECT_TRUE(used.insert(id).second) << "message reused: " << id;
      n_event += id[id.rfind('-') + 1] == 'e';
    }
    EXPECT_EQ(n_event, s.is_event() ? 1u : 0u);
  }
  EXPECT_EQ(pos, 84u);
  EXPECT_EQ(bag.steps.size(), 335u);
  EXPECT_EQ(bag.dataset.train.size() + bag.dataset.test.size() + bag.dataset.dropped_straddling, 335u);
  for (std::size_t i = 1; i < bag.steps.size(); ++i) EXPECT_GT(bag.steps[i].start_day, bag.steps[i - 1].start_day);
  EXPECT_THROW(bag_timesteps(bg, {}, 0.25, 335, 0.25, 4, 9), Error);
}

TEST(Similarity, JaccardAndKl) {
  const std::set<std::string> a{"a", "b", "c"}, b{"b", "c", "d"}, e{};
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, {"x"}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard_similarity(a, b), 0.5);
  EXPECT_DOUBLE_EQ(jaccard_similarity(e, e), 1.0);
  EXPECT_NEAR(kl_divergence({1, 0}, {0.5, 0.5}), std::log(2.0), 1e-3);
  EXPECT_NEAR(kl_divergence({0.2, 0.8}, {0.2, 0.8}), 0.0, 1e-12);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(8), q(8);
    for (auto& v : p) v = u(gen) < 0.2 ? 0.0 : u(gen);
    for (auto& v : q) v = u(gen);
    EXPECT_GE(kl_divergence(p, q), 0.0);
  }
}

TEST(Similarity, NoveltyAndDiversity) {
  std::vector<std::set<std::string>> same(60, std::set<std::string>{"x", "y"});
  const auto r0 = novelty_diversity(same, same, 20, 3, 1);
  EXPECT_DOUBLE_EQ(r0.diversity_a_mean, 0.0);

  std::vector<std::set<std::string>> left, right;
  for (int i = 0; i < 60; ++i) {
    left.push_back({"l" + std::to_string(i % 7), "l" + std::to_string(i % 5)});
    right.push_back({"r" + std::to_string(i % 7)});
  }
  EXPECT_DOUBLE_EQ(novelty_diversity(left, right, 20, 3, 1).novelty_mean, 1.0);

  const auto c = small_config();
  std::vector<std::set<std::string>> corpus;
  for (const auto& m : generate_background(c, 400)) corpus.push_back(token_set(m.body_raw));
  const auto self = novelty_diversity(corpus, corpus, 100, 10, 2);
  const double pooled = std::sqrt(0.5 * (self.novelty_sd * self.novelty_sd + self.diversity_a_sd * self.diversity_a_sd));
  EXPECT_LE(std::abs(self.novelty_mean - self.diversity_a_mean), 2 * pooled + 1e-12);
  EXPECT_FALSE(self.with_replacement);
  EXPECT_TRUE(novelty_diversity(corpus, corpus, 300, 2, 2).with_replacement);
}

TEST(Sweep, AggregatesWorstCaseAndThreshold) {
  auto c = small_config();
  const CellEvaluator fake = [](const SyntheticBag& bag, std::uint64_t) {
    std::size_t pos_events = 0;
    for (const auto& s : bag.steps)
      if (s.is_event())
        for (const auto& id : s.message_ids) pos_events += id[id.rfind('-') + 1] == 'e';
    const double share = static_cast<double>(pos_events) / 100.0;
    return std::vector<CellOutcome>{{"A", 0.5 + share, share > 0.2 ? 0.01 : 0.4, false, ""},
                                    {"B", 0.5, 0.9, false, ""}};
  };
  const auto r = detectability_sweep(c, {"A", "B"}, fake);
  EXPECT_EQ(r.rows.size(), 3u * 3u * 2u);
  ASSERT_EQ(r.summary.size(), 6u);
  EXPECT_EQ(r.summary[0].estimator, "A");
  EXPECT_FALSE(r.threshold.at("B").has_value());
  EXPECT_GT(r.spearman.at("A"), 0.99);
  const auto again = detectability_sweep(c, {"A", "B"}, fake, 0.05, 2);
  for (std::size_t i = 0; i < r.rows.size(); ++i) EXPECT_EQ(r.rows[i].metric, again.rows[i].metric);
  std::stringstream csv;
  write_sweep_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "estimator,f,instance,metric,p_value");
}

TEST(Sweep, SpearmanRho) {
  EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman_rho({1, 2, 3}, {1, 1, 2}), std::sqrt(0.75), 1e-12);
}
