#include "microevent/topics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "microevent/error.hpp"
#include "microevent/parallel.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

constexpr double kNpmiEps = 1e-12;

std::string vocabulary_hash(const std::vector<std::string>& tokens) {
  std::string joined;
  for (const auto& t : tokens) {
    joined += t;
    joined += '\n';
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
  return buf;
}

}  // namespace

Document expand_bow(const BowVector& bow) {
  Document doc;
  for (auto [id, count] : bow) doc.insert(doc.end(), count, id);
  return doc;
}

void LdaConfig::validate() const {
  if (K < 1) throw ConfigError("lda: K must be >= 1");
  if (alpha && !(*alpha > 0)) throw ConfigError("lda: alpha must be > 0");
  if (!(beta > 0)) throw ConfigError("lda: beta must be > 0");
  if (burn_in < 0 || total_iterations <= burn_in) throw ConfigError("lda: need total_iterations > burn_in >= 0");
}

GibbsSampler::GibbsSampler(std::span<const Document> docs, std::size_t vocab_size, const LdaConfig& config)
    : docs_(docs),
      V_(vocab_size),
      K_(config.K),
      alpha_(config.alpha_value()),
      beta_(config.beta),
      rng_(config.seed),
      ndk_(docs.size() * config.K, 0),
      nkw_(static_cast<std::size_t>(config.K) * vocab_size, 0),
      nk_(config.K, 0),
      weights_(config.K) {
  config.validate();
  z_.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    z_[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const std::uint32_t w = docs[d][i];
      if (w >= V_) throw Error("lda: token id out of range");
      const int k = static_cast<int>(rng_.uniform_index(static_cast<std::size_t>(K_)));
      z_[d][i] = k;
      ++ndk_[d * K_ + k];
      ++nkw_[static_cast<std::size_t>(k) * V_ + w];
      ++nk_[k];
    }
  }
}

void GibbsSampler::sweep() {
  const double vbeta = static_cast<double>(V_) * beta_;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    int* nd = &ndk_[d * K_];
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const std::uint32_t w = docs_[d][i];
      int k = z_[d][i];
      --nd[k];
      --nkw_[static_cast<std::size_t>(k) * V_ + w];
      --nk_[k];
      double total = 0.0;
      for (int t = 0; t < K_; ++t) {
        total += (nd[t] + alpha_) * (nkw_[static_cast<std::size_t>(t) * V_ + w] + beta_) / (nk_[t] + vbeta);
        weights_[t] = total;
      }
      const double u = rng_.uniform() * total;
      k = 0;
      while (k < K_ - 1 && weights_[k] <= u) ++k;
      z_[d][i] = k;
      ++nd[k];
      ++nkw_[static_cast<std::size_t>(k) * V_ + w];
      ++nk_[k];
    }
  }
}

double GibbsSampler::log_likelihood() const {
  const double V = static_cast<double>(V_);
  double ll = K_ * (std::lgamma(V * beta_) - V * std::lgamma(beta_));
  for (int k = 0; k < K_; ++k) {
    for (std::size_t w = 0; w < V_; ++w) ll += std::lgamma(nkw_[static_cast<std::size_t>(k) * V_ + w] + beta_);
    ll -= std::lgamma(nk_[k] + V * beta_);
  }
  const double D = static_cast<double>(docs_.size());
  ll += D * (std::lgamma(K_ * alpha_) - K_ * std::lgamma(alpha_));
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    for (int k = 0; k < K_; ++k) ll += std::lgamma(ndk_[d * K_ + k] + alpha_);
    ll -= std::lgamma(static_cast<double>(docs_[d].size()) + K_ * alpha_);
  }
  return ll;
}

double TopicModel::phi(int k, std::uint32_t w) const {
  return (topic_word_counts[static_cast<std::size_t>(k) * V + w] + config.beta) /
         (topic_totals[k] + static_cast<double>(V) * config.beta);
}

std::vector<double> TopicModel::phi_row(int k) const {
  std::vector<double> row(V);
  for (std::uint32_t w = 0; w < V; ++w) row[w] = phi(k, w);
  return row;
}

TopicModel train_lda(std::span<const Document> docs, const Vocabulary& vocab, const LdaConfig& config) {
  config.validate();
  if (docs.empty()) throw Error("train_lda: empty corpus");
  const bool any_token = std::any_of(docs.begin(), docs.end(), [](const Document& d) { return !d.empty(); });
  if (!any_token) throw Error("train_lda: empty corpus");
  GibbsSampler sampler(docs, vocab.size(), config);
  TopicModel model;
  model.config = config;
  model.V = vocab.size();
  model.vocabulary = vocab.tokens();
  for (int it = 0; it < config.total_iterations; ++it) {
    sampler.sweep();
    if (it >= config.burn_in) model.log_likelihood_trace.push_back(sampler.log_likelihood());
  }
  model.topic_word_counts = sampler.topic_word_counts();
  model.topic_totals = sampler.topic_totals();
  return model;
}

std::vector<double> infer_theta(const TopicModel& model, const Document& doc, int fold_in_sweeps,
                                std::uint64_t seed) {
  const int K = model.K();
  const double alpha = model.config.alpha_value();
  std::vector<double> theta(K, 1.0 / K);
  if (doc.empty() || K == 1) return theta;
  fold_in_sweeps = std::max(fold_in_sweeps, 1);

  std::vector<double> phi(doc.size() * K);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc[i] >= model.V) throw Error("infer_theta: token id out of range");
    for (int k = 0; k < K; ++k) phi[i * K + k] = model.phi(k, doc[i]);
  }
  Rng rng(seed);
  std::vector<int> z(doc.size());
  std::vector<int> nd(K, 0);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    z[i] = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(K)));
    ++nd[z[i]];
  }
  std::vector<double> weights(K);
  std::fill(theta.begin(), theta.end(), 0.0);
  const int keep_from = fold_in_sweeps / 2;
  const double denom = static_cast<double>(doc.size()) + K * alpha;
  for (int s = 0; s < fold_in_sweeps; ++s) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      --nd[z[i]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        total += (nd[k] + alpha) * phi[i * K + k];
        weights[k] = total;
      }
      const double u = rng.uniform() * total;
      int k = 0;
      while (k < K - 1 && weights[k] <= u) ++k;
      z[i] = k;
      ++nd[k];
    }
    if (s >= keep_from) {
      for (int k = 0; k < K; ++k) theta[k] += (nd[k] + alpha) / denom;
    }
  }
  const double sum = std::accumulate(theta.begin(), theta.end(), 0.0);
  for (auto& t : theta) t /= sum;
  return theta;
}

std::vector<std::uint32_t> top_word_ids(const TopicModel& model, int k, std::size_t n) {
  std::vector<std::uint32_t> ids(model.V);
  std::iota(ids.begin(), ids.end(), 0u);
  n = std::min(n, ids.size());
  const int* row = &model.topic_word_counts[static_cast<std::size_t>(k) * model.V];
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [row](std::uint32_t a, std::uint32_t b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  ids.resize(n);
  return ids;
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k, std::size_t n) {
  std::vector<std::pair<std::string, double>> out;
  for (auto id : top_word_ids(model, k, n)) out.emplace_back(model.vocabulary.at(id), model.phi(k, id));
  return out;
}

CoherenceResult coherence_cv_words(const std::vector<std::vector<std::uint32_t>>& topics,
                                   std::span<const Document> reference, std::size_t window) {
  if (window == 0) throw Error("coherence: window must be positive");
  std::vector<std::uint32_t> words;
  for (const auto& t : topics) words.insert(words.end(), t.begin(), t.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  const std::size_t W = words.size();
  auto slot = [&](std::uint32_t id) -> std::ptrdiff_t {
    auto it = std::lower_bound(words.begin(), words.end(), id);
    return (it != words.end() && *it == id) ? it - words.begin() : -1;
  };

  std::vector<double> single(W, 0.0);
  std::vector<double> joint(W * W, 0.0);
  double n_windows = 0.0;
  std::vector<int> in_window(W, 0);
  std::vector<std::size_t> present;
  for (const auto& doc : reference) {
    if (doc.empty()) continue;
    std::vector<std::ptrdiff_t> slots(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) slots[i] = slot(doc[i]);
    const std::size_t len = std::min(window, doc.size());
    const std::size_t starts = doc.size() - len + 1;
    std::fill(in_window.begin(), in_window.end(), 0);
    for (std::size_t i = 0; i < len; ++i) {
      if (slots[i] >= 0) ++in_window[slots[i]];
    }
    for (std::size_t s = 0; s < starts; ++s) {
      if (s > 0) {
        if (slots[s - 1] >= 0) --in_window[slots[s - 1]];
        if (slots[s + len - 1] >= 0) ++in_window[slots[s + len - 1]];
      }
      n_windows += 1.0;
      present.clear();
      for (std::size_t j = 0; j < W; ++j) {
        if (in_window[j] > 0) present.push_back(j);
      }
      for (std::size_t a : present) {
        single[a] += 1.0;
        for (std::size_t b : present) joint[a * W + b] += 1.0;
      }
    }
  }

  CoherenceResult result;
  result.per_topic.reserve(topics.size());
  for (std::size_t t = 0; t < topics.size(); ++t) {
    std::vector<std::size_t> idx;
    for (auto id : topics[t]) {
      const auto s = slot(id);
      if (s >= 0 && single[s] > 0) idx.push_back(static_cast<std::size_t>(s));
    }
    if (idx.size() < topics[t].size()) result.short_topics.push_back(static_cast<int>(t));
    const std::size_t m = idx.size();
    if (m == 0 || n_windows == 0) {
      result.per_topic.push_back(0.0);
      continue;
    }
    std::vector<double> npmi(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double pi = single[idx[i]] / n_windows;
        const double pj = single[idx[j]] / n_windows;
        const double pij = joint[idx[i] * W + idx[j]] / n_windows + kNpmiEps;
        if (pij >= 1.0) {
          result.degenerate_npmi = true;
          continue;
        }
        npmi[i * m + j] = std::log(pij / (pi * pj)) / -std::log(pij);
      }
    }
    std::vector<double> total(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) total[j] += npmi[i * m + j];
    }
    const double total_norm = std::sqrt(std::inner_product(total.begin(), total.end(), total.begin(), 0.0));
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0, norm = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        dot += npmi[i * m + j] * total[j];
        norm += npmi[i * m + j] * npmi[i * m + j];
      }
      if (norm == 0.0 || total_norm == 0.0) {
        result.zero_vector = true;
        continue;
      }
      sum += dot / (std::sqrt(norm) * total_norm);
    }
    result.per_topic.push_back(sum / static_cast<double>(m));
  }
  if (!result.per_topic.empty()) {
    result.mean = std::accumulate(result.per_topic.begin(), result.per_topic.end(), 0.0) /
                  static_cast<double>(result.per_topic.size());
  }
  return result;
}

CoherenceResult coherence_cv(const TopicModel& model, std::span<const Document> reference, std::size_t top_n,
                             std::size_t window) {
  std::vector<std::vector<std::uint32_t>> topics;
  for (int k = 0; k < model.K(); ++k) topics.push_back(top_word_ids(model, k, top_n));
  return coherence_cv_words(topics, reference, window);
}

ElbowResult elbow_select(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw Error("elbow_select: bad curve");
  ElbowResult r;
  const std::size_t n = x.size();
  double best = 0.0;
  bool found = false;
  if (n >= 3 && x[n - 1] != x[0]) {
    const double slope = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);
    // Perpendicular distance is the vertical gap times a constant, so the
    // vertical gap is enough for the argmax.
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double gap = y[i] - (y[0] + slope * (x[i] - x[0]));
      if (gap > tol && gap > best) {
        best = gap;
        r.index = i;
        found = true;
      }
    }
  }
  if (!found) {
    r.no_elbow = true;
    r.index = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  }
  return r;
}

KSelection select_k(std::span<const Document> docs, const Vocabulary& vocab, std::span<const int> candidate_ks,
                    const LdaConfig& base, int n_seeds, std::size_t top_n, std::size_t window, int jobs) {
  if (candidate_ks.size() < 3) throw ConfigError("select_k: need at least 3 candidate K values");
  if (!std::is_sorted(candidate_ks.begin(), candidate_ks.end()) ||
      std::adjacent_find(candidate_ks.begin(), candidate_ks.end()) != candidate_ks.end()) {
    throw ConfigError("select_k: candidate K values must be strictly ascending");
  }
  if (n_seeds < 1) throw ConfigError("select_k: n_seeds must be >= 1");
  KSelection sel;
  sel.ks.assign(candidate_ks.begin(), candidate_ks.end());
  const std::size_t cells = candidate_ks.size() * static_cast<std::size_t>(n_seeds);
  sel.curve.resize(cells);
  parallel_for(cells, jobs, [&](std::size_t c) {
    LdaConfig cfg = base;
    cfg.K = candidate_ks[c / n_seeds];
    if (!base.alpha) cfg.alpha.reset();
    cfg.seed = derive_seed(base.seed, "select_k", c % n_seeds);
    const TopicModel model = train_lda(docs, vocab, cfg);
    sel.curve[c] = {cfg.K, cfg.seed, coherence_cv(model, docs, top_n, window).mean};
  });
  for (std::size_t i = 0; i < candidate_ks.size(); ++i) {
    double sum = 0.0;
    for (int s = 0; s < n_seeds; ++s) sum += sel.curve[i * n_seeds + s].coherence;
    sel.mean_coherence.push_back(sum / n_seeds);
  }
  std::vector<double> xs(sel.ks.begin(), sel.ks.end());
  const auto elbow = elbow_select(xs, sel.mean_coherence);
  sel.chosen_k = sel.ks[elbow.index];
  sel.no_elbow = elbow.no_elbow;
  return sel;
}

void write_coherence_curve_csv(std::ostream& out, std::span<const CoherencePoint> curve) {
  out << "k,seed,coherence\n";
  for (const auto& p : curve) out << p.k << ',' << p.seed << ',' << format_double(p.coherence) << '\n';
}

void write_topic_model(const TopicModel& model, std::ostream& header_json, std::ostream& counts_csv) {
  nlohmann::ordered_json h;
  h["schema_version"] = 1;
  h["K"] = model.K();
  h["V"] = model.V;
  h["alpha"] = model.config.alpha_value();
  h["beta"] = model.config.beta;
  h["burn_in"] = model.config.burn_in;
  h["total_iterations"] = model.config.total_iterations;
  h["seed"] = model.config.seed;
  h["vocabulary_hash"] = vocabulary_hash(model.vocabulary);
  h["log_likelihood_trace"] = model.log_likelihood_trace;
  header_json << h.dump(2) << '\n';
  for (int k = 0; k < model.K(); ++k) {
    for (std::size_t w = 0; w < model.V; ++w) {
      if (w) counts_csv << ',';
      counts_csv << model.topic_word_counts[static_cast<std::size_t>(k) * model.V + w];
    }
    counts_csv << '\n';
  }
}

TopicModel read_topic_model(std::istream& header_json, std::istream& counts_csv, const Vocabulary& vocab) {
  TopicModel m;
  try {
    const auto h = nlohmann::json::parse(header_json);
    m.config.K = h.at("K").get<int>();
    m.config.alpha = h.at("alpha").get<double>();
    m.config.beta = h.at("beta").get<double>();
    m.config.burn_in = h.at("burn_in").get<int>();
    m.config.total_iterations = h.at("total_iterations").get<int>();
    m.config.seed = h.at("seed").get<std::uint64_t>();
    m.V = h.at("V").get<std::size_t>();
    m.log_likelihood_trace = h.at("log_likelihood_trace").get<std::vector<double>>();
    if (m.V != vocab.size() || h.at("vocabulary_hash").get<std::string>() != vocabulary_hash(vocab.tokens())) {
      throw InputError("topic model: vocabulary does not match the model");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("topic model header: ") + e.what());
  }
  m.vocabulary = vocab.tokens();
  m.topic_word_counts.reserve(static_cast<std::size_t>(m.config.K) * m.V);
  m.topic_totals.assign(m.config.K, 0);
  std::string line;
  int k = 0;
  while (std::getline(counts_csv, line)) {
    if (line.empty()) continue;
    if (k >= m.config.K) throw InputError("topic model counts: too many rows");
    const auto f = split(line, ',');
    if (f.size() != m.V) throw InputError("topic model counts: wrong row width");
    for (const auto& v : f) {
      const int c = std::stoi(v);
      if (c < 0) throw InputError("topic model counts: negative count");
      m.topic_word_counts.push_back(c);
      m.topic_totals[k] += c;
    }
    ++k;
  }
  if (k != m.config.K) throw InputError("topic model counts: missing rows");
  return m;
}

}  // namespace microevent
