#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "microevent/rng.hpp"
#include "microevent/textprep.hpp"

namespace microevent {

// A document for the sampler: token ids in stream order.
using Document = std::vector<std::uint32_t>;

Document expand_bow(const BowVector& bow);

struct LdaConfig {
  int K = 10;
  std::optional<double> alpha;  // default 50 / K
  double beta = 0.01;
  int burn_in = 200;
  int total_iterations = 500;
  std::uint64_t seed = 1;

  double alpha_value() const { return alpha ? *alpha : 50.0 / K; }
  void validate() const;  // throws ConfigError
};

// Collapsed Gibbs sampler state. Each sweep resamples every token once from
//   P(z = k) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta).
class GibbsSampler {
 public:
  GibbsSampler(std::span<const Document> docs, std::size_t vocab_size, const LdaConfig& config);

  void sweep();

  // log p(w | z) + log p(z) of the current state (collapsed joint).
  double log_likelihood() const;

  const std::vector<std::vector<int>>& assignments() const { return z_; }
  int doc_topic(std::size_t d, int k) const { return ndk_[d * K_ + k]; }
  int topic_word(int k, std::uint32_t w) const { return nkw_[static_cast<std::size_t>(k) * V_ + w]; }
  int topic_total(int k) const { return nk_[k]; }
  const std::vector<int>& topic_word_counts() const { return nkw_; }
  const std::vector<int>& topic_totals() const { return nk_; }

 private:
  std::span<const Document> docs_;
  std::size_t V_;
  int K_;
  double alpha_;
  double beta_;
  Rng rng_;
  std::vector<std::vector<int>> z_;
  std::vector<int> ndk_;
  std::vector<int> nkw_;
  std::vector<int> nk_;
  std::vector<double> weights_;
};

struct TopicModel {
  LdaConfig config;
  std::size_t V = 0;
  std::vector<std::string> vocabulary;  // bound vocabulary, id order
  std::vector<int> topic_word_counts;   // K x V row-major
  std::vector<int> topic_totals;        // K
  std::vector<double> log_likelihood_trace;

  int K() const { return config.K; }
  double phi(int k, std::uint32_t w) const;
  std::vector<double> phi_row(int k) const;
};

TopicModel train_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaConfig& config);

// Fold-in Gibbs with the topic-word counts held fixed. The returned theta is
// the mean of (n_dk + alpha) / (n_d + K alpha) over the second half of the
// sweeps. Empty documents get the uniform prior.
std::vector<double> infer_theta(const TopicModel& model, const Document& doc, int fold_in_sweeps,
                                std::uint64_t seed);

// n tokens with the largest phi, ties broken by lower id.
std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k, std::size_t n);
std::vector<std::uint32_t> top_word_ids(const TopicModel& model, int k, std::size_t n);

struct CoherenceResult {
  std::vector<double> per_topic;
  double mean = 0.0;
  std::vector<int> short_topics;  // fewer than top_n words present in the reference corpus
  bool degenerate_npmi = false;   // some p(wi, wj) + eps reached 1
  bool zero_vector = false;       // some cosine had a zero-length vector
};

// C_V on explicit word lists (token ids into the reference streams): boolean
// sliding windows of `window` tokens (a shorter document is one window),
// NPMI with eps = 1e-12, one-set segmentation, cosine similarity.
CoherenceResult coherence_cv_words(const std::vector<std::vector<std::uint32_t>>& topics,
                                   std::span<const Document> reference, std::size_t window = 110);

CoherenceResult coherence_cv(const TopicModel& model, std::span<const Document> reference, std::size_t top_n = 10,
                             std::size_t window = 110);

struct ElbowResult {
  std::size_t index = 0;
  bool no_elbow = false;
};

// Point with the largest distance above the chord joining the first and last
// points. If no point lies above it, the argmax of y is returned and flagged.
ElbowResult elbow_select(std::span<const double> x, std::span<const double> y);

struct CoherencePoint {
  int k = 0;
  std::uint64_t seed = 0;
  double coherence = 0.0;
};

struct KSelection {
  int chosen_k = 0;
  bool no_elbow = false;
  std::vector<CoherencePoint> curve;  // ordered by (k, seed index)
  std::vector<int> ks;
  std::vector<double> mean_coherence;  // per k
};

// Trains n_seeds models per candidate K (seeds derived from base.seed) and
// picks K by elbow_select on the mean coherence curve.
KSelection select_k(std::span<const Document> docs, const Vocabulary& vocab, std::span<const int> candidate_ks,
                    const LdaConfig& base, int n_seeds = 3, std::size_t top_n = 10, std::size_t window = 110,
                    int jobs = 1);

void write_coherence_curve_csv(std::ostream& out, std::span<const CoherencePoint> curve);

// JSON header (config, K, V, vocabulary hash) and a CSV count matrix with one
// row per topic.
void write_topic_model(const TopicModel& model, std::ostream& header_json, std::ostream& counts_csv);
TopicModel read_topic_model(std::istream& header_json, std::istream& counts_csv, const Vocabulary& vocab);

}  // namespace microevent
