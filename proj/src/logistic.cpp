#include "microevent/logistic.hpp"

#include <algorithm>
#include <cmath>

namespace microevent {
namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return Z;
}

Eigen::VectorXd probabilities(const Eigen::MatrixXd& Z, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = Z * beta;
  return eta.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::MatrixXd information(const Eigen::MatrixXd& Z, const Eigen::VectorXd& p) {
  const Eigen::VectorXd w = p.array() * (1.0 - p.array());
  return Z.transpose() * w.asDiagonal() * Z;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double bernoulli_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& p) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i], 1e-300, 1.0 - 1e-16);
    ll += y[i] > 0.5 ? std::log(q) : std::log1p(-q);
  }
  return ll;
}

Eigen::VectorXd LogisticModel::linear_predictor(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != columns.size()) throw Error("logistic: column schema mismatch");
  return (X * beta.tail(X.cols())).array() + beta[0];
}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::MatrixXd& X) const {
  return linear_predictor(X).unaryExpr([](double v) { return sigmoid(v); });
}

LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                           int max_iter, double tol) {
  if (X.rows() != y.size() || X.rows() == 0) throw Error("fit_logistic: shape mismatch");
  if (columns.empty() && X.cols() > 0) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) columns.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(columns.size()) != X.cols()) throw Error("fit_logistic: column names mismatch");
  const double pos = y.sum();
  if (pos < 0.5 || pos > static_cast<double>(y.size()) - 0.5) throw FitError("fit_logistic: y has a single class");

  const Eigen::MatrixXd Z = with_intercept(X);
  LogisticModel m;
  m.columns = std::move(columns);
  m.n = static_cast<std::size_t>(X.rows());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(Z.cols());
  Eigen::VectorXd p = probabilities(Z, beta);
  double ll = bernoulli_log_likelihood(y, p);
  m.ll_trace.push_back(ll);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd H = information(Z, p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) {
      const bool saturated = (p.array() * (1.0 - p.array())).maxCoeff() < 1e-12;
      if (saturated) throw SeparationError("quasi-separation", beta);
      throw FitError("fit_logistic: singular X'WX");
    }
    const Eigen::VectorXd step = ldlt.solve(Z.transpose() * (y - p));
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    Eigen::VectorXd p_next = probabilities(Z, next);
    double ll_next = bernoulli_log_likelihood(y, p_next);
    for (int h = 0; h < 40 && ll_next < ll; ++h) {
      t *= 0.5;
      next = beta + t * step;
      p_next = probabilities(Z, next);
      ll_next = bernoulli_log_likelihood(y, p_next);
    }
    if (ll_next < ll) {
      next = beta;
      p_next = p;
      ll_next = ll;
    }
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    p = p_next;
    ll = ll_next;
    m.ll_trace.push_back(ll);
    m.iterations = it;
    if (beta.cwiseAbs().maxCoeff() > kSeparationBound) throw SeparationError("quasi-separation", beta);
    if (delta < tol) {
      m.converged = true;
      break;
    }
  }
  if (!m.converged) throw FitError("fit_logistic: IRLS did not converge");
  m.beta = beta;
  m.log_likelihood = ll;
  const Eigen::MatrixXd H = information(Z, p);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) throw FitError("fit_logistic: singular X'WX");
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
  m.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return m;
}

Eigen::MatrixXd logistic_covariance(const LogisticModel& model, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd Z = with_intercept(X);
  const Eigen::MatrixXd H = information(Z, probabilities(Z, model.beta));
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) throw FitError("logistic: singular X'WX");
  return ldlt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
}

}  // namespace microevent
