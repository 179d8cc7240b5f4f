#include "microevent/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "microevent/error.hpp"
#include "microevent/parallel.hpp"
#include "microevent/rng.hpp"

namespace microevent {
namespace {

void require_both_classes(const Eigen::VectorXd& y, const char* who) {
  const double pos = y.sum();
  if (pos < 0.5 || pos > static_cast<double>(y.size()) - 0.5) throw Error(std::string(who) + ": single-class labels");
}

void require_same_size(const Eigen::VectorXd& y, const Eigen::VectorXd& s, const char* who) {
  if (y.size() != s.size() || y.size() == 0) throw Error(std::string(who) + ": size mismatch");
}

double average_precision(const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(y.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return s[a] > s[b]; });
  const double P = y.sum();
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    const double t = s[idx[i]];
    while (i < idx.size() && s[idx[i]] == t) {
      (y[idx[i]] > 0.5 ? tp : fp) += 1.0;
      ++i;
    }
    const double recall = tp / P;
    ap += (recall - prev_recall) * tp / (tp + fp);
    prev_recall = recall;
  }
  return ap;
}

}  // namespace

double pr_auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, int positive_label) {
  require_same_size(y, scores, "pr_auc");
  require_both_classes(y, "pr_auc");
  if (positive_label == 1) return average_precision(y, scores);
  return average_precision((1.0 - y.array()).matrix(), -scores);
}

double pr_auc_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  return 0.5 * (pr_auc(y, scores, 1) + pr_auc(y, scores, 0));
}

double roc_auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  require_same_size(y, scores, "roc_auc");
  require_both_classes(y, "roc_auc");
  const auto n = static_cast<std::size_t>(y.size());
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] > 0.5) rank_sum += mid;
    }
    i = j;
  }
  const double n1 = y.sum();
  const double n0 = static_cast<double>(n) - n1;
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

Confusion confusion(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double threshold) {
  require_same_size(y, scores, "confusion");
  Confusion c;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool actual = y[i] > 0.5;
    if (pred && actual) ++c.tp;
    else if (pred) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double threshold) {
  const Confusion c = confusion(y, scores, threshold);
  auto f1 = [](double tp, double fp, double fn) { return tp > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0; };
  return 0.5 * (f1(static_cast<double>(c.tp), static_cast<double>(c.fp), static_cast<double>(c.fn)) +
                f1(static_cast<double>(c.tn), static_cast<double>(c.fn), static_cast<double>(c.fp)));
}

double no_information_rate(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw Error("no_information_rate: empty labels");
  const double p = y.sum() / static_cast<double>(y.size());
  return std::max(p, 1.0 - p);
}

MetricReport evaluate_scores(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
  MetricReport r;
  r.pr_auc_events = pr_auc(y, scores, 1);
  r.pr_auc_mean = 0.5 * (r.pr_auc_events + pr_auc(y, scores, 0));
  r.roc_auc = roc_auc(y, scores);
  r.f1_mean = f1_mean(y, scores);
  r.confusion = confusion(y, scores);
  r.accuracy = static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(y.size());
  r.no_information_rate = no_information_rate(y);
  return r;
}

PermutationResult permutation_test(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, const Metric& metric,
                                   int n_perm, std::uint64_t seed, int jobs) {
  require_same_size(y, scores, "permutation_test");
  require_both_classes(y, "permutation_test");
  if (n_perm < 1) throw ConfigError("permutation_test: n_perm must be >= 1");
  PermutationResult r;
  r.n_perm = n_perm;
  r.observed = metric(y, scores);
  r.null_distribution.assign(static_cast<std::size_t>(n_perm), 0.0);
  parallel_for(static_cast<std::size_t>(n_perm), jobs, [&](std::size_t k) {
    Rng rng(derive_seed(seed, "permutation", k));
    std::vector<double> v(y.data(), y.data() + y.size());
    rng.shuffle(v);
    r.null_distribution[k] = metric(Eigen::Map<const Eigen::VectorXd>(v.data(), y.size()), scores);
  });
  // Equal values must count as "at least as extreme" even after rounding.
  const double tol = 1e-12 * std::max(1.0, std::abs(r.observed));
  const auto hits = std::count_if(r.null_distribution.begin(), r.null_distribution.end(),
                                  [&](double v) { return v >= r.observed - tol; });
  r.p_value = (1.0 + static_cast<double>(hits)) / (n_perm + 1.0);
  return r;
}

EffectSize cliffs_delta(const std::vector<double>& a, const std::vector<double>& b, double alpha, int m_corrections,
                        std::string feature) {
  if (a.empty() || b.empty()) throw Error("cliffs_delta: empty sample");
  if (m_corrections < 1) throw ConfigError("cliffs_delta: m must be >= 1");
  const std::size_t n1 = a.size(), n2 = b.size();
  std::vector<double> di(n1, 0.0), dj(n2, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double s = a[i] > b[j] ? 1.0 : (a[i] < b[j] ? -1.0 : 0.0);
      di[i] += s;
      dj[j] += s;
      sum += s;
    }
  }
  const double N1 = static_cast<double>(n1), N2 = static_cast<double>(n2);
  EffectSize e;
  e.feature = std::move(feature);
  e.delta = sum / (N1 * N2);
  const double d = e.delta;
  double sdi = 0.0, sdj = 0.0, sd = 0.0;
  for (auto& v : di) sdi += (v / N2 - d) * (v / N2 - d);
  for (auto& v : dj) sdj += (v / N1 - d) * (v / N1 - d);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double s = a[i] > b[j] ? 1.0 : (a[i] < b[j] ? -1.0 : 0.0);
      sd += (s - d) * (s - d);
    }
  }
  const double sd_term = (n1 > 1 && n2 > 1) ? sd / ((N1 - 1.0) * (N2 - 1.0)) : 0.0;
  e.variance = std::max(0.0, (sdi + sdj + sd_term) / (N1 * N2));
  if (e.variance <= 0.0) {
    e.ci_low = e.ci_high = d;
    return e;
  }
  const double z = normal_quantile(1.0 - alpha / (2.0 * m_corrections));
  const double s2 = e.variance;
  const double root = z * std::sqrt(s2) * std::sqrt((1 - d * d) * (1 - d * d) + z * z * s2);
  const double denom = 1 - d * d + z * z * s2;
  e.ci_low = std::max(-1.0, std::min(d, (d - d * d * d - root) / denom));
  e.ci_high = std::min(1.0, std::max(d, (d - d * d * d + root) / denom));
  return e;
}

HolmResult holm_bonferroni(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  HolmResult r;
  r.significant.assign(m, false);
  r.thresholds.assign(m, 0.0);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  bool rejecting = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double thr = alpha / static_cast<double>(m - i);
    r.thresholds[idx[i]] = thr;
    if (rejecting && p[idx[i]] <= thr) {
      r.significant[idx[i]] = true;
    } else {
      rejecting = false;
    }
  }
  return r;
}

std::vector<bool> bonferroni(const std::vector<double>& p, double alpha) {
  std::vector<bool> out;
  for (double v : p) out.push_back(v <= alpha / static_cast<double>(p.size()));
  return out;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

double normal_upper_tail(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z));
}

double chi2_upper_tail(double x, double df) {
  if (x <= 0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), x));
}

}  // namespace microevent
