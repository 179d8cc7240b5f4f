#pragma once

// LDA recovery corpus and the exhaustive check of the collapsed Gibbs
// stationary distribution on a single two-token document.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "microevent/topics.hpp"

namespace lda_cases {

using namespace microevent;

struct RecoveryCorpus {
  std::vector<Document> docs;
  std::vector<int> truth;  // 0 or 1
  Vocabulary vocab;
};

// 200 documents, half drawn uniformly from words 0..19 and half from 20..39.
inline RecoveryCorpus recovery_corpus(std::uint64_t seed = 424242) {
  RecoveryCorpus c;
  std::vector<std::string> tokens;
  for (int i = 0; i < 40; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%c%02d", i < 20 ? 'a' : 'b', i % 20);
    tokens.emplace_back(buf);
  }
  c.vocab = Vocabulary(tokens, std::vector<std::size_t>(40, 100));
  std::mt19937_64 gen(seed);
  for (int d = 0; d < 200; ++d) {
    const int topic = d % 2;
    const int len = 30 + static_cast<int>(gen() % 31);
    Document doc;
    for (int i = 0; i < len; ++i) doc.push_back(static_cast<std::uint32_t>(topic * 20 + gen() % 20));
    c.docs.push_back(std::move(doc));
    c.truth.push_back(topic);
  }
  return c;
}

inline LdaConfig recovery_config(std::uint64_t seed) {
  LdaConfig cfg;
  cfg.K = 2;
  cfg.alpha = 0.1;
  cfg.beta = 0.01;
  cfg.burn_in = 200;
  cfg.total_iterations = 500;
  cfg.seed = seed;
  return cfg;
}

// Share of documents whose inferred theta puts >= 0.9 on their true topic,
// with model topics matched to true topics by majority.
inline double recovery_rate(const RecoveryCorpus& c, const TopicModel& model, std::uint64_t seed) {
  std::vector<std::vector<double>> theta;
  for (std::size_t d = 0; d < c.docs.size(); ++d) theta.push_back(infer_theta(model, c.docs[d], 50, seed + d));
  int agree = 0;
  for (std::size_t d = 0; d < c.docs.size(); ++d) agree += (theta[d][0] > theta[d][1]) == (c.truth[d] == 0);
  const bool swap = agree < static_cast<int>(c.docs.size()) / 2;
  int good = 0;
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    const int k = swap ? 1 - c.truth[d] : c.truth[d];
    if (theta[d][k] >= 0.9) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(c.docs.size());
}

// log p(w, z) of one document under the collapsed model, written out from
// the Dirichlet-multinomial marginals.
inline double log_joint(const Document& doc, const std::vector<int>& z, int K, std::size_t V, double alpha,
                        double beta) {
  std::vector<int> ndk(K, 0), nk(K, 0);
  std::map<std::pair<int, std::uint32_t>, int> nkw;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    ++ndk[z[i]];
    ++nk[z[i]];
    ++nkw[{z[i], doc[i]}];
  }
  double lp = std::lgamma(K * alpha) - std::lgamma(K * alpha + static_cast<double>(doc.size()));
  for (int k = 0; k < K; ++k) lp += std::lgamma(alpha + ndk[k]) - std::lgamma(alpha);
  for (int k = 0; k < K; ++k) lp += std::lgamma(V * beta) - std::lgamma(V * beta + nk[k]);
  for (const auto& [key, n] : nkw) lp += std::lgamma(beta + n) - std::lgamma(beta);
  return lp;
}

struct EnumerationCheck {
  std::array<double, 4> exact{};      // states (0,0) (0,1) (1,0) (1,1)
  std::array<double, 4> empirical{};
  double max_abs_diff = 0.0;
};

// Document {0, 1}, V = 3, K = 2, alpha = 0.3, beta = 0.2.
inline EnumerationCheck gibbs_enumeration(int sweeps = 40000, std::uint64_t seed = 99) {
  const std::vector<Document> docs{{0, 1}};
  const std::size_t V = 3;
  LdaConfig cfg;
  cfg.K = 2;
  cfg.alpha = 0.3;
  cfg.beta = 0.2;
  cfg.seed = seed;
  EnumerationCheck out;
  double total = 0.0;
  for (int s = 0; s < 4; ++s) {
    out.exact[s] = std::exp(log_joint(docs[0], {s >> 1, s & 1}, 2, V, 0.3, 0.2));
    total += out.exact[s];
  }
  for (auto& p : out.exact) p /= total;
  GibbsSampler sampler(docs, V, cfg);
  for (int i = 0; i < 100; ++i) sampler.sweep();
  std::array<long, 4> hits{};
  for (int i = 0; i < sweeps; ++i) {
    sampler.sweep();
    const auto& z = sampler.assignments()[0];
    ++hits[z[0] * 2 + z[1]];
  }
  for (int s = 0; s < 4; ++s) {
    out.empirical[s] = static_cast<double>(hits[s]) / sweeps;
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(out.empirical[s] - out.exact[s]));
  }
  return out;
}

// Toy reference corpus for C_V: three documents of three tokens, so each
// document is one window of size 3. Ids: a=0 b=1 c=2 d=3 e=4.
inline std::vector<Document> cv_toy_corpus() { return {{0, 1, 2}, {0, 1, 3}, {2, 3, 4}}; }

// Values from a direct evaluation of the C_V definition on the toy corpus
// (NPMI with eps 1e-12, one-set segmentation, cosine, mean over words).
inline constexpr double kCvAB = 1.0;                   // a, b always together
inline constexpr double kCvAE = 0.027967744794018687;  // a, e never together
inline constexpr double kCvBCE = 0.3549276246129936;
inline constexpr double kCvABCD = 0.3277472063732532;

}  // namespace lda_cases
