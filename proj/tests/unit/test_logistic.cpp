#include <gtest/gtest.h>

#include <random>

#include "../common/stats_cases.hpp"

using namespace microevent;
using namespace stats_cases;

TEST(Irls, GroupedFixtureRecoversLogits) { EXPECT_EQ(irls_grouped_fixture(), ""); }

TEST(Irls, LogLikelihoodNeverDecreases) { EXPECT_EQ(irls_monotone_on_random_fits(20), ""); }

TEST(Irls, SeparationDetected) { EXPECT_EQ(separation_detected(), ""); }

TEST(Irls, StandardErrorsFromInformationMatrix) {
  // var(b0) = 1/(50*.2*.8) = var(b0 + b1), cov(b0, b1) = -var(b0)
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  grouped_data(X, y);
  const auto m = fit_logistic(X, y, {"x"});
  EXPECT_NEAR(m.se[0], std::sqrt(1.0 / 8.0), 1e-6);
  EXPECT_NEAR(m.se[1], std::sqrt(2.0 / 8.0), 1e-6);
  // LL = 2 * 50 * (0.2 log 0.2 + 0.8 log 0.8)
  EXPECT_NEAR(m.log_likelihood, 100.0 * (0.2 * std::log(0.2) + 0.8 * std::log(0.8)), 1e-8);
}

TEST(Irls, InterceptOnlyIsLogOdds) {
  Eigen::VectorXd y(8);
  y << 1, 0, 0, 1, 0, 0, 0, 0;
  const auto m = fit_logistic(Eigen::MatrixXd(8, 0), y);
  EXPECT_NEAR(m.beta[0], std::log(2.0 / 6.0), 1e-10);
  EXPECT_NEAR(sigmoid(logit(0.3)), 0.3, 1e-15);
}

TEST(Irls, PredictionsUseIntercept) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> norm;
  Eigen::MatrixXd X(100, 2);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) {
    X(i, 0) = norm(gen);
    X(i, 1) = norm(gen);
    y[i] = norm(gen) + X(i, 0) - 0.5 * X(i, 1) > 0;
  }
  const auto m = fit_logistic(X, y, {"a", "b"});
  const Eigen::VectorXd eta = m.linear_predictor(X);
  EXPECT_NEAR(eta[3], m.beta[0] + m.beta[1] * X(3, 0) + m.beta[2] * X(3, 1), 1e-12);
  EXPECT_NEAR(m.predict_proba(X)[3], sigmoid(eta[3]), 1e-15);
  // score equations hold at the optimum
  const Eigen::VectorXd r = y - m.predict_proba(X);
  EXPECT_NEAR(r.sum(), 0.0, 1e-6);
  EXPECT_NEAR(X.col(0).dot(r), 0.0, 1e-6);

  // doubling a column halves its coefficient and leaves the fit unchanged
  Eigen::MatrixXd X2 = X;
  X2.col(1) *= 2.0;
  const auto m2 = fit_logistic(X2, y, {"a", "b"});
  EXPECT_NEAR(m2.beta[2], m.beta[2] / 2.0, 1e-6);
  EXPECT_LT((m2.predict_proba(X2) - m.predict_proba(X)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Irls, SingularDesignFails) {
  Eigen::MatrixXd X(10, 2);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i % 4;
    X(i, 1) = 2.0 * X(i, 0);
    y[i] = i % 3 == 0;
  }
  EXPECT_THROW(fit_logistic(X, y), FitError);
}
