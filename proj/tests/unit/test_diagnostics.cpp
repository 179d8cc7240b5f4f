#include <gtest/gtest.h>

#include <random>

#include "../common/stats_cases.hpp"

using namespace microevent;
using namespace stats_cases;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data simulate(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  Data d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) d.X(i, j) = norm(gen);
    d.y[i] = norm(gen) + 1.2 * d.X(i, 0) - 0.6 * d.X(i, 1) > 0.3;
  }
  return d;
}

}  // namespace

TEST(PseudoR2, Identities) { EXPECT_EQ(pseudo_r2_identities(20), ""); }

TEST(PseudoR2, Formulas) {
  const auto d = simulate(120, 3);
  const auto m = fit_logistic(d.X, d.y);
  const auto m0 = fit_logistic(Eigen::MatrixXd(120, 0), d.y);
  const double ll = m.log_likelihood, ll0 = m0.log_likelihood;
  const auto r = pseudo_r2(d.y, m.predict_proba(d.X), ll, ll0, 120, 3);
  const double cs = 1 - std::exp(2 * (ll0 - ll) / 120);
  EXPECT_NEAR(r.cox_snell, cs, 1e-12);
  EXPECT_NEAR(r.nagelkerke, cs / (1 - std::exp(2 * ll0 / 120)), 1e-12);
  EXPECT_NEAR(r.adj_mcfadden, 1 - (ll - 3) / ll0, 1e-12);
}

TEST(Vif, ClosedFormFromCorrelation) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> norm;
  const int n = 50;
  // centered orthonormal basis
  Eigen::MatrixXd B(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) B(i, j) = j == 0 ? 1.0 : norm(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 4);
  Eigen::MatrixXd X(n, 3);
  X.col(0) = Q.col(1);
  X.col(1) = 0.9 * Q.col(1) + std::sqrt(1 - 0.81) * Q.col(2);
  X.col(2) = Q.col(3);
  const auto v = variance_inflation(X);
  EXPECT_NEAR(v[0], 1 / (1 - 0.81), 0.01);
  EXPECT_NEAR(v[1], 5.26, 0.01);
  EXPECT_NEAR(v[2], 1.0, 1e-9);
}

TEST(LrDiagnostics, TableFields) {
  const auto d = simulate(150, 5);
  const std::vector<std::string> cols{"a", "b", "c"};
  const auto m = fit_logistic(d.X, d.y, cols);
  const auto m0 = fit_logistic(Eigen::MatrixXd(150, 0), d.y);
  const auto r = lr_diagnostics(m, m0, d.X, d.y, 2, 0.05);
  EXPECT_EQ(r.df, 3);
  EXPECT_NEAR(r.llr_chi2, 2 * (m.log_likelihood - m0.log_likelihood), 1e-9);
  EXPECT_NEAR(r.llr_p, chi2_upper_tail(r.llr_chi2, 3), 1e-15);
  EXPECT_NEAR(r.aic, 2 * 4 - 2 * m.log_likelihood, 1e-9);
  EXPECT_NEAR(r.ci_z, normal_quantile(1 - 0.05 / 4), 1e-12);
  ASSERT_EQ(r.coefficients.size(), 4u);
  EXPECT_EQ(r.coefficients[0].name, "(Intercept)");
  EXPECT_TRUE(std::isnan(r.coefficients[0].vif));
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& c = r.coefficients[j];
    EXPECT_NEAR(c.estimate, m.beta[j], 1e-12);
    EXPECT_NEAR(c.z_value, c.estimate / c.std_error, 1e-12);
    EXPECT_NEAR(c.p_value, 2 * normal_upper_tail(std::abs(c.z_value)), 1e-12);
    EXPECT_NEAR(c.odds_ratio, std::exp(c.estimate), 1e-12);
    EXPECT_NEAR(c.or_ci_high, std::exp(c.estimate + r.ci_z * c.std_error), 1e-9);
  }
  EXPECT_EQ(r.linearity.size(), 3u);
  EXPECT_TRUE(r.linearity_error.empty());
  EXPECT_LE(r.outlier_p_bonferroni, 1.0);
}

TEST(LrDiagnostics, StudentizedResidualsMatchHatMatrix) {
  const auto d = simulate(80, 6);
  const auto m = fit_logistic(d.X, d.y);
  const auto r = studentized_residuals(m, d.X, d.y);
  const Eigen::VectorXd p = m.predict_proba(d.X);
  Eigen::MatrixXd Z(80, 4);
  Z.col(0).setOnes();
  Z.rightCols(3) = d.X;
  const Eigen::VectorXd sw = (p.array() * (1 - p.array())).sqrt();
  const Eigen::MatrixXd A = sw.asDiagonal() * Z;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(80, 4);
  for (int i = 0; i < 80; ++i) {
    const double h = Q.row(i).squaredNorm();
    const double dev = std::sqrt(-2 * (d.y[i] > 0.5 ? std::log(p[i]) : std::log(1 - p[i])));
    const double pear = (d.y[i] - p[i]) / sw[i];
    const double want = (d.y[i] > p[i] ? 1 : -1) * std::sqrt(dev * dev + h * pear * pear / (1 - h));
    EXPECT_NEAR(r[i], want, 1e-8) << i;
  }
}
