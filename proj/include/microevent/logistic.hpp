#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "microevent/error.hpp"

namespace microevent {

struct LogisticModel {
  std::vector<std::string> columns;  // feature names, intercept excluded
  Eigen::VectorXd beta;              // [intercept, b_1 .. b_p]
  Eigen::VectorXd se;
  double log_likelihood = 0.0;
  std::size_t n = 0;
  int iterations = 0;
  bool converged = false;
  bool separated = false;        // coefficients taken at separation detection; se is NaN
  std::vector<double> ll_trace;  // log-likelihood after every accepted step

  std::size_t n_features() const { return columns.size(); }
  Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

// Raised when some |b_j| exceeds 30 or every fitted probability is numerically
// 0 or 1. Carries the coefficients reached so far.
class SeparationError : public FitError {
 public:
  SeparationError(const std::string& what, Eigen::VectorXd beta) : FitError(what), beta_(std::move(beta)) {}
  const Eigen::VectorXd& beta() const { return beta_; }

 private:
  Eigen::VectorXd beta_;
};

inline constexpr double kSeparationBound = 30.0;

double sigmoid(double x);
double logit(double p);

// Bernoulli log-likelihood of probabilities p (clamped away from 0 and 1).
double bernoulli_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& p);

// IRLS with step halving so the log-likelihood never decreases. Converged when
// max |delta b| < tol. An intercept column is added internally; X may have
// zero columns (intercept-only model).
LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns = {},
                           int max_iter = 100, double tol = 1e-8);

// Inverse of X'WX at beta (intercept included); throws FitError when singular.
Eigen::MatrixXd logistic_covariance(const LogisticModel& model, const Eigen::MatrixXd& X);

}  // namespace microevent
