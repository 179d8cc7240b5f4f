#include "microevent/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"

#include "microevent/assets.hpp"
#include "microevent/error.hpp"
#include "microevent/parallel.hpp"
#include "microevent/porter_stemmer.hpp"
#include "microevent/sentiment.hpp"
#include "microevent/strings.hpp"
#include "microevent/textprep.hpp"

namespace microevent {
namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

Timestamp synthetic_origin() { return Timestamp{std::chrono::sys_days{std::chrono::year{2015} / 1 / 5}}; }

std::string make_id(const std::string& prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return prefix + buf;
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    i = j;
  }
  return r;
}

}  // namespace

SeedLexicon SeedLexicon::from_json(std::string_view text) {
  SeedLexicon lex;
  try {
    const auto j = nlohmann::json::parse(text);
    lex.nouns = j.at("nouns").get<std::map<std::string, std::vector<std::string>>>();
    lex.verbs = j.at("verbs").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("seed lexicon: ") + e.what());
  }
  return lex;
}

const SeedLexicon& SeedLexicon::builtin() {
  static const SeedLexicon lex = from_json(assets::load("seed_lexicon.json"));
  return lex;
}

std::vector<std::pair<std::string, std::string>> SeedLexicon::phrases() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [group, ns] : nouns) {
    for (const auto& n : ns) {
      for (const auto& [kind, vs] : verbs) {
        for (const auto& v : vs) out.emplace_back(n, v);
      }
    }
  }
  return out;
}

std::set<std::string> SeedLexicon::all_nouns() const {
  std::set<std::string> s;
  for (const auto& [g, ns] : nouns) s.insert(ns.begin(), ns.end());
  return s;
}

std::set<std::string> SeedLexicon::all_verbs() const {
  std::set<std::string> s;
  for (const auto& [g, vs] : verbs) s.insert(vs.begin(), vs.end());
  return s;
}

void SyntheticConfig::validate() const {
  if (background_vocab_size < 10) throw ConfigError("synthetic: background_vocab_size too small");
  if (n_background_topics < 1) throw ConfigError("synthetic: n_background_topics must be >= 1");
  if (!(topic_word_concentration > 0) || !(doc_topic_concentration > 0)) {
    throw ConfigError("synthetic: concentrations must be > 0");
  }
  if (min_length < 2 || max_length < min_length) throw ConfigError("synthetic: bad message length range");
  if (!(sentiment_rate >= 0 && sentiment_rate < 1)) throw ConfigError("synthetic: sentiment_rate must be in [0, 1)");
  if (active_phrases < 1) throw ConfigError("synthetic: active_phrases must be >= 1");
  if (phrases_per_message < 1) throw ConfigError("not event-related: phrases_per_message must be >= 1");
  if (2 * phrases_per_message > min_length) throw ConfigError("synthetic: phrases do not fit in min_length tokens");
  if (f_grid.empty()) throw ConfigError("synthetic: empty f grid");
  for (double f : f_grid) {
    if (!(f >= 0 && f <= 1)) throw ConfigError("synthetic: f must be in [0, 1]");
  }
  if (n_steps < 4) throw ConfigError("synthetic: n_steps too small");
  if (messages_per_step < 1) throw ConfigError("synthetic: messages_per_step must be >= 1");
  if (!(positive_ratio > 0 && positive_ratio < 1)) throw ConfigError("synthetic: positive_ratio must be in (0, 1)");
  if (n_instances < 1) throw ConfigError("synthetic: n_instances must be >= 1");
}

SyntheticGenerator::SyntheticGenerator(const SyntheticConfig& config, const SeedLexicon& lexicon)
    : config_(config), lexicon_(lexicon) {
  config_.validate();
  if (lexicon_.phrases().empty()) throw Error("not event-related: empty seed lexicon");
  const auto& lex = SentimentLexicon::builtin();
  const auto verbs = lexicon_.all_verbs();
  const auto nouns = lexicon_.all_nouns();
  const auto& stop = default_stopwords();
  std::set<std::string> verb_stems;
  for (const auto& v : verbs) verb_stems.insert(porter_stem(v));
  for (const auto& w : lex.words()) {
    if (!verb_stems.count(porter_stem(w)) && !nouns.count(w)) sentiment_words_.push_back(w);
  }

  Rng rng(derive_seed(config_.seed, "synthetic_vocabulary"));
  std::set<std::string> seen(nouns.begin(), nouns.end());
  vocab_.assign(nouns.begin(), nouns.end());
  const std::size_t nc = std::char_traits<char>::length(kConsonants);
  const std::size_t nv = std::char_traits<char>::length(kVowels);
  std::size_t attempts = 0;
  while (vocab_.size() < config_.background_vocab_size) {
    if (++attempts > 100 * config_.background_vocab_size) throw Error("synthetic: could not build vocabulary");
    const std::size_t syllables = 2 + rng.uniform_index(2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w.push_back(kConsonants[rng.uniform_index(nc)]);
      w.push_back(kVowels[rng.uniform_index(nv)]);
    }
    if (rng.uniform() < 0.5) w.push_back(kConsonants[rng.uniform_index(nc)]);
    if (seen.count(w) || verb_stems.count(w) || stop.count(w) || lex.contains(w) || porter_stem(w) != w) continue;
    seen.insert(w);
    vocab_.push_back(w);
  }
  for (std::size_t t = 0; t < config_.n_background_topics; ++t) {
    auto p = rng.dirichlet(config_.topic_word_concentration, vocab_.size());
    std::partial_sum(p.begin(), p.end(), p.begin());
    topic_cdf_.push_back(std::move(p));
  }
}

std::vector<std::string> SyntheticGenerator::background_tokens(Rng& rng) const {
  const std::size_t len = config_.min_length + rng.uniform_index(config_.max_length - config_.min_length + 1);
  const auto theta = rng.dirichlet(config_.doc_topic_concentration, topic_cdf_.size());
  std::vector<std::string> tokens;
  tokens.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (config_.sentiment_rate > 0 && rng.uniform() < config_.sentiment_rate) {
      tokens.push_back(sentiment_words_[rng.uniform_index(sentiment_words_.size())]);
      continue;
    }
    const auto& cdf = topic_cdf_[rng.categorical(theta)];
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    tokens.push_back(vocab_[static_cast<std::size_t>(it - cdf.begin())]);
  }
  return tokens;
}

std::vector<Message> SyntheticGenerator::background(std::size_t n, Rng& rng, const std::string& id_prefix) const {
  std::vector<Message> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Message m;
    m.id = make_id(id_prefix, i);
    m.body_raw = join(background_tokens(rng), " ");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Message> SyntheticGenerator::event_related(std::size_t n,
                                                       const std::vector<std::pair<std::string, std::string>>& active,
                                                       Rng& rng, const std::string& id_prefix) const {
  if (active.empty()) throw Error("not event-related: no active seed phrases");
  std::vector<Message> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto tokens = background_tokens(rng);
    const std::size_t slots = tokens.size() / 2;
    for (auto s : rng.sample_without_replacement(slots, config_.phrases_per_message)) {
      const auto& [noun, verb] = active[rng.uniform_index(active.size())];
      tokens[2 * s] = noun;
      tokens[2 * s + 1] = verb;
    }
    Message m;
    m.id = make_id(id_prefix, i);
    m.body_raw = join(tokens, " ");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> SyntheticGenerator::draw_active_phrases(Rng& rng) const {
  const auto all = lexicon_.phrases();
  const std::size_t k = std::min(config_.active_phrases, all.size());
  std::vector<std::pair<std::string, std::string>> out;
  for (auto i : rng.sample_without_replacement(all.size(), k)) out.push_back(all[i]);
  return out;
}

std::vector<Message> generate_background(const SyntheticConfig& config, std::size_t n) {
  SyntheticGenerator gen(config, SeedLexicon::builtin());
  Rng rng(derive_seed(config.seed, "background"));
  return gen.background(n, rng, "bg-");
}

std::vector<Message> generate_event_related(const SyntheticConfig& config, std::size_t n) {
  SyntheticGenerator gen(config, SeedLexicon::builtin());
  Rng rng(derive_seed(config.seed, "event_related"));
  const auto active = gen.draw_active_phrases(rng);
  return gen.event_related(n, active, rng, "ev-");
}

std::size_t round_half_down(double x) { return static_cast<std::size_t>(std::ceil(x - 0.5)); }

std::size_t event_messages_per_step(double f, std::size_t messages_per_step) {
  const double x = f * static_cast<double>(messages_per_step);
  return std::min(messages_per_step, static_cast<std::size_t>(std::ceil(x - 1e-9)));
}

SyntheticBag bag_timesteps(std::span<const Message> background, std::span<const Message> event_related, double f,
                           std::size_t n_steps, double positive_ratio, std::size_t messages_per_step,
                           std::uint64_t seed) {
  if (!(f >= 0 && f <= 1)) throw ConfigError("bag_timesteps: f must be in [0, 1]");
  const std::size_t n_pos = round_half_down(static_cast<double>(n_steps) * positive_ratio);
  if (n_pos == 0 || n_pos >= n_steps) throw ConfigError("bag_timesteps: positive_ratio leaves a class empty");
  const std::size_t per_event = event_messages_per_step(f, messages_per_step);
  const std::size_t need_event = n_pos * per_event;
  const std::size_t need_background = n_steps * messages_per_step - need_event;
  if (event_related.size() < need_event || background.size() < need_background) {
    throw Error("bag_timesteps: insufficient message pool");
  }
  Rng rng(seed);
  std::vector<bool> positive(n_steps, false);
  for (auto i : rng.sample_without_replacement(n_steps, n_pos)) positive[i] = true;
  std::vector<std::size_t> bg_order(background.size()), ev_order(event_related.size());
  std::iota(bg_order.begin(), bg_order.end(), 0);
  std::iota(ev_order.begin(), ev_order.end(), 0);
  rng.shuffle(bg_order);
  rng.shuffle(ev_order);

  SyntheticBag bag;
  bag.messages.reserve(n_steps * messages_per_step);
  std::size_t bg = 0, ev = 0;
  const Timestamp origin = synthetic_origin();
  for (std::size_t s = 0; s < n_steps; ++s) {
    TimeStep step;
    step.start_day = std::chrono::floor<std::chrono::days>(origin) + std::chrono::days{7 * static_cast<long>(s)};
    step.end_day = step.start_day + std::chrono::days{6};
    step.design = StepDesign::calendar_week;
    step.id = "syn-" + format_day(step.start_day);
    const std::size_t n_event = positive[s] ? per_event : 0;
    std::vector<Message> msgs;
    for (std::size_t i = 0; i < n_event; ++i) msgs.push_back(event_related[ev_order[ev++]]);
    for (std::size_t i = n_event; i < messages_per_step; ++i) msgs.push_back(background[bg_order[bg++]]);
    rng.shuffle(msgs);
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      // Spread over the week at a fixed cadence; ids stay unique per step.
      const auto offset = std::chrono::seconds{static_cast<long>(i * (7 * 86400 / messages_per_step))};
      msgs[i].timestamp = Timestamp{std::chrono::sys_seconds{step.start_day}} + offset;
      msgs[i].id = step.id + "-" + msgs[i].id;
      step.message_ids.push_back(msgs[i].id);
    }
    if (positive[s]) step.event_kind = ReleaseKind::minor;
    for (auto& m : msgs) bag.messages.push_back(std::move(m));
    bag.steps.push_back(std::move(step));
  }
  const auto split = chronological_split(bag.messages, kSyntheticTrainFraction);
  bag.dataset = assemble_dataset(bag.steps, split.split_instant, "synthetic minor c.w.-based",
                                 StepDesign::calendar_week, ReleaseKind::minor);
  return bag;
}

SyntheticBag make_instance(const SyntheticGenerator& generator, double f, std::uint64_t instance_seed) {
  const auto& c = generator.config();
  Rng rng(derive_seed(instance_seed, "pools"));
  const auto active = generator.draw_active_phrases(rng);
  const std::size_t n_pos = round_half_down(static_cast<double>(c.n_steps) * c.positive_ratio);
  auto bg = generator.background(c.n_steps * c.messages_per_step, rng, "b");
  auto ev = generator.event_related(n_pos * event_messages_per_step(f, c.messages_per_step), active, rng, "e");
  return bag_timesteps(bg, ev, f, c.n_steps, c.positive_ratio, c.messages_per_step, derive_seed(instance_seed, "bag"));
}

std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> s;
  for (auto& t : split(text, ' ')) {
    if (!t.empty()) s.insert(to_lower_ascii(t));
  }
  return s;
}

double jaccard_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double kl_divergence(std::vector<double> p, std::vector<double> q, double eps) {
  if (p.size() != q.size() || p.empty()) throw Error("kl_divergence: histograms differ in size");
  auto smooth = [eps](std::vector<double>& h) {
    double s = 0.0;
    for (auto& x : h) {
      if (x < 0) throw Error("kl_divergence: negative bin");
      x += eps;
      s += x;
    }
    for (auto& x : h) x /= s;
  };
  smooth(p);
  smooth(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(0.0, kl);
}

SimilarityReport novelty_diversity(const std::vector<std::set<std::string>>& a,
                                   const std::vector<std::set<std::string>>& b, std::size_t sample_size, int repeats,
                                   std::uint64_t seed) {
  if (a.empty() || b.empty()) throw Error("novelty_diversity: empty corpus");
  if (sample_size < 1 || repeats < 1) throw ConfigError("novelty_diversity: sample_size and repeats must be >= 1");
  SimilarityReport r;
  r.sample_size = sample_size;
  r.repeats = repeats;
  r.with_replacement = a.size() < 2 * sample_size || b.size() < 2 * sample_size;
  auto draw = [&](const std::vector<std::set<std::string>>& corpus, Rng& rng) {
    std::vector<std::size_t> idx;
    if (corpus.size() >= 2 * sample_size) {
      idx = rng.sample_without_replacement(corpus.size(), 2 * sample_size);
    } else {
      for (std::size_t i = 0; i < 2 * sample_size; ++i) idx.push_back(rng.uniform_index(corpus.size()));
    }
    return idx;
  };
  std::vector<double> hist_a(kDistanceBins, 0.0), hist_b(kDistanceBins, 0.0);
  auto bin = [](double d) { return std::min<std::size_t>(kDistanceBins - 1, static_cast<std::size_t>(d * kDistanceBins)); };
  std::vector<double> nov, div_a, div_b;
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng(derive_seed(seed, "novelty", static_cast<std::uint64_t>(rep)));
    const auto ia = draw(a, rng);
    const auto ib = draw(b, rng);
    double sn = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < sample_size; ++i) {
      for (std::size_t j = 0; j < sample_size; ++j) {
        sn += 1.0 - jaccard_similarity(a[ia[i]], b[ib[j]]);
        const double da = 1.0 - jaccard_similarity(a[ia[i]], a[ia[sample_size + j]]);
        const double db = 1.0 - jaccard_similarity(b[ib[i]], b[ib[sample_size + j]]);
        sa += da;
        sb += db;
        hist_a[bin(da)] += 1.0;
        hist_b[bin(db)] += 1.0;
      }
    }
    const double pairs = static_cast<double>(sample_size * sample_size);
    nov.push_back(sn / pairs);
    div_a.push_back(sa / pairs);
    div_b.push_back(sb / pairs);
  }
  std::tie(r.novelty_mean, r.novelty_sd) = mean_sd(nov);
  std::tie(r.diversity_a_mean, r.diversity_a_sd) = mean_sd(div_a);
  std::tie(r.diversity_b_mean, r.diversity_b_sd) = mean_sd(div_b);
  r.kl_divergence = kl_divergence(hist_a, hist_b);
  return r;
}

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("spearman_rho: need two equal-length samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto [mx, sx] = mean_sd(rx);
  const auto [my, sy] = mean_sd(ry);
  if (sx == 0 || sy == 0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (rx[i] - mx) * (ry[i] - my);
  return cov / (static_cast<double>(x.size() - 1) * sx * sy);
}

SweepResult detectability_sweep(const SyntheticConfig& config, const std::vector<std::string>& estimators,
                                const CellEvaluator& evaluate, double alpha, int jobs) {
  config.validate();
  if (estimators.empty()) throw ConfigError("sweep: no estimators");
  const SyntheticGenerator generator(config, SeedLexicon::builtin());
  const std::size_t nf = config.f_grid.size();
  const std::size_t cells = nf * config.n_instances;
  std::vector<std::vector<CellOutcome>> outcomes(cells);
  // Cells run one at a time when jobs == 1; the pipeline inside may still
  // use several threads.
  parallel_for(cells, jobs, [&](std::size_t c) {
    const double f = config.f_grid[c / config.n_instances];
    const std::size_t inst = c % config.n_instances;
    const std::uint64_t inst_seed = derive_seed(config.seed, "instance", inst);
    try {
      const auto bag = make_instance(generator, f, inst_seed);
      outcomes[c] = evaluate(bag, derive_seed(inst_seed, "pipeline"));
    } catch (const Error& e) {
      for (const auto& name : estimators) outcomes[c].push_back({name, 0.0, 1.0, true, e.what()});
    }
  });

  SweepResult r;
  r.alpha = alpha;
  for (std::size_t c = 0; c < cells; ++c) {
    const double f = config.f_grid[c / config.n_instances];
    const std::size_t inst = c % config.n_instances;
    for (const auto& name : estimators) {
      auto it = std::find_if(outcomes[c].begin(), outcomes[c].end(), [&](const CellOutcome& o) { return o.estimator == name; });
      SweepRow row{name, f, inst, 0.0, 1.0, true, "estimator not evaluated"};
      if (it != outcomes[c].end()) row = {name, f, inst, it->metric, it->p_value, it->failed, it->error};
      r.rows.push_back(row);
    }
  }
  for (const auto& name : estimators) {
    std::vector<double> fs, means;
    std::optional<double> threshold;
    for (std::size_t fi = 0; fi < nf; ++fi) {
      SweepSummary s;
      s.estimator = name;
      s.f = config.f_grid[fi];
      s.worst_p = 0.0;
      std::vector<double> metrics;
      for (const auto& row : r.rows) {
        if (row.estimator != name || row.f != s.f) continue;
        if (row.failed) {
          ++s.n_failed;
          s.worst_p = 1.0;
          continue;
        }
        metrics.push_back(row.metric);
        s.worst_p = std::max(s.worst_p, row.p_value);
      }
      s.n_ok = metrics.size();
      const auto [m, sd] = mean_sd(metrics);
      s.mean_metric = m;
      if (metrics.size() >= 2) {
        const boost::math::students_t t(static_cast<double>(metrics.size() - 1));
        const double half = boost::math::quantile(t, 0.975) * sd / std::sqrt(static_cast<double>(metrics.size()));
        s.ci_low = m - half;
        s.ci_high = m + half;
      } else {
        s.ci_low = s.ci_high = m;
      }
      if (s.n_ok == 0) s.worst_p = 1.0;
      if (!threshold && s.n_failed == 0 && s.worst_p <= alpha) threshold = s.f;
      fs.push_back(s.f);
      means.push_back(s.mean_metric);
      r.summary.push_back(s);
    }
    r.threshold[name] = threshold;
    r.spearman[name] = fs.size() >= 2 ? spearman_rho(fs, means) : 0.0;
  }
  return r;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "estimator,f,instance,metric,p_value\n";
  for (const auto& r : result.rows) {
    out << r.estimator << ',' << format_double(r.f) << ',' << r.instance << ','
        << (r.failed ? std::string("nan") : format_double(r.metric)) << ','
        << (r.failed ? std::string("nan") : format_double(r.p_value)) << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "estimator,f,worst_p,mean_metric,ci_low,ci_high,n_ok,n_failed\n";
  for (const auto& s : result.summary) {
    out << s.estimator << ',' << format_double(s.f) << ',' << format_double(s.worst_p) << ','
        << format_double(s.mean_metric) << ',' << format_double(s.ci_low) << ',' << format_double(s.ci_high) << ','
        << s.n_ok << ',' << s.n_failed << '\n';
  }
}

}  // namespace microevent
