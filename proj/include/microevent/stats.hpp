#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "microevent/learners.hpp"

namespace microevent {

// Step-wise average precision over descending unique score thresholds.
// positive_label selects the class treated as positive; for 0 the labels are
// flipped and the scores negated.
double pr_auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, int positive_label = 1);

// Mean of pr_auc for both polarities.
double pr_auc_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

// Mann-Whitney statistic with midranks (ties count 1/2).
double roc_auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Predicted event when score >= threshold.
Confusion confusion(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double threshold = 0.5);

// F1 at the threshold, averaged over both classes as positive. A class with
// no predicted and no actual members contributes 0.
double f1_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, double threshold = 0.5);

double no_information_rate(const Eigen::VectorXd& y);

struct MetricReport {
  double pr_auc_mean = 0.0;
  double pr_auc_events = 0.0;
  double roc_auc = 0.0;
  double f1_mean = 0.0;
  double accuracy = 0.0;
  double no_information_rate = 0.0;
  Confusion confusion;
};

MetricReport evaluate_scores(const Eigen::VectorXd& y, const Eigen::VectorXd& scores);

struct PermutationResult {
  double observed = 0.0;
  double p_value = 1.0;
  int n_perm = 0;
  std::vector<double> null_distribution;
};

// Permutes y against frozen scores. p = (1 + #{null >= observed}) / (n_perm + 1).
// Permutation r draws from derive_seed(seed, "permutation", r).
PermutationResult permutation_test(const Eigen::VectorXd& y, const Eigen::VectorXd& scores, const Metric& metric,
                                   int n_perm = 1000, std::uint64_t seed = 1, int jobs = 1);

struct EffectSize {
  std::string feature;
  double delta = 0.0;
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Cliff's delta by direct pair counting. The interval uses the consistent
// variance estimate and the asymmetric normal-theory bounds
//   (d - d^3 +/- z s sqrt((1 - d^2)^2 + z^2 s^2)) / (1 - d^2 + z^2 s^2)
// with z = quantile(1 - alpha / (2 m)).
EffectSize cliffs_delta(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05,
                        int m_corrections = 1, std::string feature = {});

struct HolmResult {
  std::vector<bool> significant;   // input order
  std::vector<double> thresholds;  // alpha / (m - rank + 1), input order
};

HolmResult holm_bonferroni(const std::vector<double>& p_values, double alpha = 0.05);
std::vector<bool> bonferroni(const std::vector<double>& p_values, double alpha = 0.05);

double normal_quantile(double p);
double normal_upper_tail(double z);
double chi2_upper_tail(double x, double df);

}  // namespace microevent
