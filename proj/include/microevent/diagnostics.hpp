#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "microevent/logistic.hpp"

namespace microevent {

struct PseudoR2 {
  double tjur = 0.0;
  double cox_snell = 0.0;
  double nagelkerke = 0.0;
  double adj_mcfadden = 0.0;
};

// ll / ll0: fitted and intercept-only log-likelihoods; k: number of features.
PseudoR2 pseudo_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& p_hat, double ll, double ll0, std::size_t n,
                   int k);

double tjur_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& p_hat);

// 1 / (1 - R^2) of an OLS fit (with intercept) of each column on the others.
std::vector<double> variance_inflation(const Eigen::MatrixXd& X);

struct CoefficientRow {
  std::string name;  // "(Intercept)" first
  double estimate = 0.0;
  double std_error = 0.0;
  double z_value = 0.0;
  double p_value = 1.0;
  double vif = std::numeric_limits<double>::quiet_NaN();  // NaN for the intercept
  double odds_ratio = 1.0;
  double or_ci_low = 1.0;
  double or_ci_high = 1.0;
};

struct LinearityTerm {
  std::string feature;
  double estimate = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
};

struct LrDiagnostics {
  std::size_t n = 0;
  int df = 0;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  double null_base_probability = 0.0;
  double llr_chi2 = 0.0;
  double llr_p = 1.0;
  double aic = 0.0;
  PseudoR2 r2;
  double ci_z = 0.0;  // z_{1 - alpha / (2 m)}
  std::vector<CoefficientRow> coefficients;
  std::vector<std::string> high_vif;  // VIF > 10
  std::vector<LinearityTerm> linearity;
  std::string linearity_error;  // set when the augmented refit failed
  double max_abs_studentized_residual = 0.0;
  std::size_t outlier_row = 0;
  double outlier_p_bonferroni = 1.0;
};

// Studentized deviance residuals as in R's rstudent() for a binomial glm.
Eigen::VectorXd studentized_residuals(const LogisticModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

LrDiagnostics lr_diagnostics(const LogisticModel& model, const LogisticModel& null_model, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, int m_corrections = 1, double alpha = 0.05);

}  // namespace microevent
