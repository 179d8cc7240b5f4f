#pragma once

// Oracle checks for effect sizes, Holm decisions, PR-AUC, pseudo-R2 and IRLS.
// Each returns an empty string on success.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "microevent/diagnostics.hpp"
#include "microevent/logistic.hpp"
#include "microevent/stats.hpp"

namespace stats_cases {

using namespace microevent;

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double cliff_brute(const std::vector<double>& a, const std::vector<double>& b) {
  long more = 0, less = 0;
  for (double x : a)
    for (double y : b) {
      if (x > y) ++more;
      if (x < y) ++less;
    }
  return static_cast<double>(more - less) / static_cast<double>(a.size() * b.size());
}

inline std::string cliffs_delta_matches_brute_force(int trials = 100, std::uint64_t seed = 11) {
  std::mt19937_64 gen(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(1 + gen() % 12), b(1 + gen() % 12);
    for (auto& v : a) v = static_cast<double>(gen() % 10);  // small range forces ties
    for (auto& v : b) v = static_cast<double>(gen() % 10);
    const double got = cliffs_delta(a, b).delta;
    const double want = cliff_brute(a, b);
    if (got != want) return "trial " + std::to_string(t) + ": delta " + num(got) + " vs " + num(want);
  }
  return {};
}

// Step-down Holm by hand: sort, walk ranks, stop at the first failure.
inline std::vector<bool> holm_reference(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p[i] < p[j]; });
  std::vector<bool> out(m, false);
  for (std::size_t r = 0; r < m; ++r) {
    if (p[order[r]] <= alpha / static_cast<double>(m - r)) {
      out[order[r]] = true;
    } else {
      break;
    }
  }
  return out;
}

inline std::string holm_matches_reference(int trials = 50, std::uint64_t seed = 12) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 0.08);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> p(1 + gen() % 10);
    for (auto& v : p) v = gen() % 4 == 0 ? std::round(u(gen) * 100) / 100 : u(gen);
    const auto got = holm_bonferroni(p, 0.05).significant;
    if (got != holm_reference(p, 0.05)) return "trial " + std::to_string(t) + ": decisions differ";
    const auto bonf = bonferroni(p, 0.05);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (bonf[i] && !got[i]) return "Holm rejects fewer than Bonferroni";
  }
  return {};
}

// Average precision by walking every distinct score as a threshold.
inline double pr_auc_enumerated(const std::vector<int>& y, const std::vector<double>& s) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  double prev_recall = 0.0, ap = 0.0;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (s[i] >= t) (y[i] == 1 ? tp : fp) += 1;
    const double recall = tp / positives;
    ap += (recall - prev_recall) * tp / (tp + fp);
    prev_recall = recall;
  }
  return ap;
}

inline std::string pr_auc_matches_enumeration(int trials = 100, std::uint64_t seed = 13) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 4 + gen() % 40;
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(gen() % 2);
      s[i] = t % 2 ? std::round(u(gen) * 8) / 8 : u(gen);
    }
    y[0] = 1;
    y[1] = 0;
    Eigen::VectorXd yv(n), sv(n);
    for (std::size_t i = 0; i < n; ++i) {
      yv[i] = y[i];
      sv[i] = s[i];
    }
    const double got = pr_auc(yv, sv);
    const double want = pr_auc_enumerated(y, s);
    if (std::abs(got - want) > 1e-9) return "trial " + std::to_string(t) + ": " + num(got) + " vs " + num(want);
    // events-negative polarity: flip labels and negate scores
    std::vector<int> yf(n);
    std::vector<double> sf(n);
    for (std::size_t i = 0; i < n; ++i) {
      yf[i] = 1 - y[i];
      sf[i] = -s[i];
    }
    const double mean = 0.5 * (want + pr_auc_enumerated(yf, sf));
    if (std::abs(pr_auc_mean(yv, sv) - mean) > 1e-9) return "trial " + std::to_string(t) + ": mean PR-AUC differs";
  }
  return {};
}

inline std::string pseudo_r2_identities(int trials = 20, std::uint64_t seed = 14) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  for (int t = 0; t < trials; ++t) {
    const int n = 60 + static_cast<int>(gen() % 100);
    const int p = 1 + static_cast<int>(gen() % 4);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      double eta = -0.3;
      for (int j = 0; j < p; ++j) {
        X(i, j) = norm(gen);
        eta += 0.8 * X(i, j) / (j + 1);
      }
      y[i] = std::uniform_real_distribution<double>(0, 1)(gen) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
    }
    const auto m = fit_logistic(X, y);
    const auto m0 = fit_logistic(Eigen::MatrixXd(n, 0), y);
    const auto r = pseudo_r2(y, m.predict_proba(X), m.log_likelihood, m0.log_likelihood, n, p);
    if (m.log_likelihood < m0.log_likelihood - 1e-9) return "fitted LL below null LL";
    if (r.nagelkerke < r.cox_snell) return "nagelkerke < cox_snell on trial " + std::to_string(t);
    if (std::abs(tjur_r2(y, y) - 1.0) > 1e-12) return "Tjur of a perfect classifier is not 1";
    const auto r0 = pseudo_r2(y, m0.predict_proba(Eigen::MatrixXd(n, 0)), m0.log_likelihood, m0.log_likelihood, n, 0);
    for (double v : {r0.tjur, r0.cox_snell, r0.nagelkerke, r0.adj_mcfadden})
      if (std::abs(v) > 1e-9) return "null model pseudo-R2 is " + num(v);
  }
  return {};
}

// x = 0: 10 of 50 events; x = 1: 40 of 50 events. The MLE is the pair of
// group logits: b0 = log(0.2 / 0.8), b1 = log(0.8 / 0.2) - b0.
inline void grouped_data(Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  X.resize(100, 1);
  y.resize(100);
  for (int i = 0; i < 100; ++i) {
    X(i, 0) = i < 50 ? 0.0 : 1.0;
    y[i] = (i < 50 ? i < 10 : i < 90) ? 1.0 : 0.0;
  }
}

inline std::string irls_grouped_fixture() {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  grouped_data(X, y);
  const auto m = fit_logistic(X, y, {"x"});
  if (!m.converged) return "IRLS did not converge";
  if (std::abs(m.beta[0] - (-1.3863)) > 1e-4) return "b0 = " + num(m.beta[0]);
  if (std::abs(m.beta[1] - 2.7726) > 1e-4) return "b1 = " + num(m.beta[1]);
  for (std::size_t i = 1; i < m.ll_trace.size(); ++i)
    if (m.ll_trace[i] < m.ll_trace[i - 1]) return "log-likelihood decreased at iteration " + std::to_string(i);
  if (m.ll_trace.empty()) return "empty log-likelihood trace";
  return {};
}

inline std::string irls_monotone_on_random_fits(int trials = 20, std::uint64_t seed = 15) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  for (int t = 0; t < trials; ++t) {
    const int n = 40 + static_cast<int>(gen() % 80);
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = norm(gen) * (j + 1);
      y[i] = norm(gen) + 0.7 * X(i, 0) > 0 ? 1 : 0;
    }
    try {
      const auto m = fit_logistic(X, y);
      for (std::size_t i = 1; i < m.ll_trace.size(); ++i)
        if (m.ll_trace[i] < m.ll_trace[i - 1]) return "log-likelihood decreased on trial " + std::to_string(t);
    } catch (const SeparationError&) {
    }
  }
  return {};
}

inline std::string separation_detected() {
  Eigen::MatrixXd X(8, 1);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = i;
    y[i] = i >= 4 ? 1 : 0;
  }
  try {
    (void)fit_logistic(X, y, {"x"});
  } catch (const SeparationError& e) {
    if (e.beta().size() != 2) return "separation error without coefficients";
    return {};
  }
  return "no separation reported on a separable fixture";
}

}  // namespace stats_cases
