#include "microevent/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "microevent/error.hpp"
#include "microevent/stats.hpp"

namespace microevent {

double tjur_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& p_hat) {
  double s1 = 0.0, s0 = 0.0, n1 = 0.0, n0 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.5) {
      s1 += p_hat[i];
      n1 += 1.0;
    } else {
      s0 += p_hat[i];
      n0 += 1.0;
    }
  }
  if (n1 == 0 || n0 == 0) throw Error("tjur_r2: single-class labels");
  return s1 / n1 - s0 / n0;
}

PseudoR2 pseudo_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& p_hat, double ll, double ll0, std::size_t n,
                   int k) {
  PseudoR2 r;
  const double N = static_cast<double>(n);
  r.tjur = tjur_r2(y, p_hat);
  r.cox_snell = 1.0 - std::exp(2.0 * (ll0 - ll) / N);
  r.nagelkerke = r.cox_snell / (1.0 - std::exp(2.0 * ll0 / N));
  r.adj_mcfadden = 1.0 - (ll - k) / ll0;
  return r;
}

std::vector<double> variance_inflation(const Eigen::MatrixXd& X) {
  const Eigen::Index p = X.cols();
  std::vector<double> vif(static_cast<std::size_t>(p), 1.0);
  if (p < 2) return vif;
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::MatrixXd A(X.rows(), p);
    A.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != j) A.col(c++) = X.col(k);
    }
    const Eigen::VectorXd target = X.col(j);
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(target);
    const double ss_res = (target - A * coef).squaredNorm();
    const double ss_tot = (target.array() - target.mean()).square().sum();
    if (ss_tot <= 0) {
      vif[static_cast<std::size_t>(j)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    vif[static_cast<std::size_t>(j)] = r2 >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return vif;
}

Eigen::VectorXd studentized_residuals(const LogisticModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd C = logistic_covariance(model, X);
  const Eigen::VectorXd p = model.predict_proba(X);
  Eigen::VectorXd r(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    Eigen::VectorXd z(X.cols() + 1);
    z[0] = 1.0;
    z.tail(X.cols()) = X.row(i).transpose();
    const double pi = std::clamp(p[i], 1e-15, 1.0 - 1e-15);
    const double w = pi * (1.0 - pi);
    const double h = w * z.dot(C * z);
    const double dev2 = -2.0 * (y[i] > 0.5 ? std::log(pi) : std::log1p(-pi));
    const double pear = (y[i] - pi) / std::sqrt(w);
    const double sign = y[i] - pi >= 0 ? 1.0 : -1.0;
    r[i] = h < 1.0 ? sign * std::sqrt(dev2 + h * pear * pear / (1.0 - h)) : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

LrDiagnostics lr_diagnostics(const LogisticModel& model, const LogisticModel& null_model, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, int m_corrections, double alpha) {
  if (static_cast<std::size_t>(X.cols()) != model.n_features()) throw Error("lr_diagnostics: column schema mismatch");
  if (null_model.n_features() != 0) throw Error("lr_diagnostics: null model must be intercept-only");
  LrDiagnostics d;
  const int k = static_cast<int>(model.n_features());
  d.n = static_cast<std::size_t>(X.rows());
  d.df = k;
  d.log_likelihood = model.log_likelihood;
  d.null_log_likelihood = null_model.log_likelihood;
  d.null_base_probability = sigmoid(null_model.beta[0]);
  d.llr_chi2 = std::max(0.0, 2.0 * (d.log_likelihood - d.null_log_likelihood));
  d.llr_p = k > 0 ? chi2_upper_tail(d.llr_chi2, k) : 1.0;
  d.aic = 2.0 * (k + 1) - 2.0 * d.log_likelihood;
  d.r2 = pseudo_r2(y, model.predict_proba(X), d.log_likelihood, d.null_log_likelihood, d.n, k);
  d.ci_z = normal_quantile(1.0 - alpha / (2.0 * std::max(1, m_corrections)));

  const auto vif = variance_inflation(X);
  for (Eigen::Index j = 0; j <= k; ++j) {
    CoefficientRow row;
    row.name = j == 0 ? "(Intercept)" : model.columns[static_cast<std::size_t>(j - 1)];
    row.estimate = model.beta[j];
    row.std_error = model.se[j];
    row.z_value = row.estimate / row.std_error;
    row.p_value = 2.0 * normal_upper_tail(std::abs(row.z_value));
    if (j > 0) {
      row.vif = vif[static_cast<std::size_t>(j - 1)];
      if (row.vif > 10.0) d.high_vif.push_back(row.name);
    }
    row.odds_ratio = std::exp(row.estimate);
    row.or_ci_low = std::exp(row.estimate - d.ci_z * row.std_error);
    row.or_ci_high = std::exp(row.estimate + d.ci_z * row.std_error);
    d.coefficients.push_back(row);
  }

  if (k > 0) {
    Eigen::MatrixXd aug(X.rows(), 2 * k);
    aug.leftCols(k) = X;
    std::vector<std::string> names = model.columns;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double shift = 1e-6 - X.col(j).minCoeff();
      const Eigen::ArrayXd g = X.col(j).array() + shift;
      aug.col(k + j) = (g * g.log()).matrix();
      names.push_back(model.columns[static_cast<std::size_t>(j)] + ":log");
    }
    try {
      const LogisticModel bt = fit_logistic(aug, y, names);
      for (Eigen::Index j = 0; j < k; ++j) {
        LinearityTerm t;
        t.feature = model.columns[static_cast<std::size_t>(j)];
        t.estimate = bt.beta[k + 1 + j];
        t.std_error = bt.se[k + 1 + j];
        t.p_value = 2.0 * normal_upper_tail(std::abs(t.estimate / t.std_error));
        d.linearity.push_back(t);
      }
    } catch (const FitError& e) {
      d.linearity_error = e.what();
    }
  }

  const Eigen::VectorXd r = studentized_residuals(model, X, y);
  double best = -1.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (std::isfinite(r[i]) && std::abs(r[i]) > best) {
      best = std::abs(r[i]);
      d.outlier_row = static_cast<std::size_t>(i);
    }
  }
  d.max_abs_studentized_residual = std::max(best, 0.0);
  d.outlier_p_bonferroni = std::min(1.0, static_cast<double>(d.n) * 2.0 * normal_upper_tail(d.max_abs_studentized_residual));
  return d;
}

}  // namespace microevent
