#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "microevent/corpus.hpp"
#include "microevent/rng.hpp"
#include "microevent/timegrid.hpp"

namespace microevent {

// Nouns grouped by compound (rules, people, products) and change verbs
// (addition, removal). A seed phrase is one noun followed by one verb.
struct SeedLexicon {
  std::map<std::string, std::vector<std::string>> nouns;
  std::map<std::string, std::vector<std::string>> verbs;

  static SeedLexicon from_json(std::string_view text);
  static const SeedLexicon& builtin();

  std::vector<std::pair<std::string, std::string>> phrases() const;
  std::set<std::string> all_nouns() const;
  std::set<std::string> all_verbs() const;
};

struct SyntheticConfig {
  std::size_t background_vocab_size = 1500;
  std::size_t n_background_topics = 20;
  double topic_word_concentration = 0.05;
  double doc_topic_concentration = 0.2;
  std::size_t min_length = 20;
  std::size_t max_length = 50;
  double sentiment_rate = 0.03;
  std::size_t active_phrases = 100;
  std::size_t phrases_per_message = 2;

  std::vector<double> f_grid{0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
  std::size_t n_steps = 335;
  std::size_t messages_per_step = 60;
  double positive_ratio = 0.25;
  std::size_t n_instances = 15;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Vocabulary and topic-word distributions are drawn once from the seed; the
// message generators then draw from any RNG the caller passes.
class SyntheticGenerator {
 public:
  SyntheticGenerator(const SyntheticConfig& config, const SeedLexicon& lexicon);

  std::vector<Message> background(std::size_t n, Rng& rng, const std::string& id_prefix) const;
  std::vector<Message> event_related(std::size_t n, const std::vector<std::pair<std::string, std::string>>& active,
                                     Rng& rng, const std::string& id_prefix) const;
  std::vector<std::pair<std::string, std::string>> draw_active_phrases(Rng& rng) const;

  const std::vector<std::string>& background_vocabulary() const { return vocab_; }
  const SyntheticConfig& config() const { return config_; }

 private:
  std::vector<std::string> background_tokens(Rng& rng) const;

  SyntheticConfig config_;
  SeedLexicon lexicon_;
  std::vector<std::string> vocab_;
  std::vector<std::vector<double>> topic_cdf_;
  std::vector<std::string> sentiment_words_;
};

std::vector<Message> generate_background(const SyntheticConfig& config, std::size_t n);
std::vector<Message> generate_event_related(const SyntheticConfig& config, std::size_t n);

// Nearest integer, ties rounded down (83.75 -> 84, 2.5 -> 2).
std::size_t round_half_down(double x);

// ceil(f * messages_per_step), guarded against floating noise.
std::size_t event_messages_per_step(double f, std::size_t messages_per_step);

struct SyntheticBag {
  std::vector<Message> messages;  // time order
  std::vector<TimeStep> steps;    // time order
  StepDataset dataset;            // 60/40 chronological split
};

inline constexpr double kSyntheticTrainFraction = 0.6;

// Positive steps hold event_messages_per_step(f) event-related messages and
// background for the rest; negative steps are background only. Messages are
// used at most once. Steps are consecutive weeks starting 2015-01-05 and
// positive positions are shuffled.
SyntheticBag bag_timesteps(std::span<const Message> background, std::span<const Message> event_related, double f,
                           std::size_t n_steps, double positive_ratio, std::size_t messages_per_step,
                           std::uint64_t seed);

// Builds the pools for one instance and bags them.
SyntheticBag make_instance(const SyntheticGenerator& generator, double f, std::uint64_t instance_seed);

std::set<std::string> token_set(std::string_view text);
double jaccard_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

// Sum p ln(p / q) after adding eps to every bin and renormalising.
double kl_divergence(std::vector<double> p, std::vector<double> q, double eps = 1e-10);

struct SimilarityReport {
  double novelty_mean = 0.0, novelty_sd = 0.0;
  double diversity_a_mean = 0.0, diversity_a_sd = 0.0;
  double diversity_b_mean = 0.0, diversity_b_sd = 0.0;
  double kl_divergence = 0.0;  // within-a vs within-b distance histograms
  std::size_t sample_size = 0;
  int repeats = 0;
  bool with_replacement = false;
};

inline constexpr int kDistanceBins = 64;

SimilarityReport novelty_diversity(const std::vector<std::set<std::string>>& corpus_a,
                                   const std::vector<std::set<std::string>>& corpus_b, std::size_t sample_size = 500,
                                   int repeats = 30, std::uint64_t seed = 1);

struct CellOutcome {
  std::string estimator;
  double metric = 0.0;
  double p_value = 1.0;
  bool failed = false;
  std::string error;
};

// Runs the evaluation pipeline on one synthetic dataset, one outcome per
// estimator.
using CellEvaluator = std::function<std::vector<CellOutcome>(const SyntheticBag& bag, std::uint64_t seed)>;

struct SweepRow {
  std::string estimator;
  double f = 0.0;
  std::size_t instance = 0;
  double metric = 0.0;
  double p_value = 1.0;
  bool failed = false;
  std::string error;
};

struct SweepSummary {
  std::string estimator;
  double f = 0.0;
  double worst_p = 1.0;
  double mean_metric = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;          // ordered by (f, instance, estimator)
  std::vector<SweepSummary> summary;   // ordered by (estimator, f)
  std::map<std::string, std::optional<double>> threshold;  // min f with worst_p <= alpha
  std::map<std::string, double> spearman;                  // rho(f, mean metric)
  double alpha = 0.05;
};

inline constexpr double kReferenceThreshold = 0.25;
inline constexpr double kReferenceBand = 0.10;

// Instance i of every f uses derive_seed(config.seed, "instance", i); all
// f values of one instance share its phrase subset and message pools.
SweepResult detectability_sweep(const SyntheticConfig& config, const std::vector<std::string>& estimators,
                                const CellEvaluator& evaluate, double alpha = 0.05, int jobs = 1);

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

// estimator,f,instance,metric,p_value
void write_sweep_csv(std::ostream& out, const SweepResult& result);
// estimator,f,worst_p,mean_metric,ci_low,ci_high,n_ok,n_failed
void write_sweep_summary_csv(std::ostream& out, const SweepResult& result);

}  // namespace microevent
