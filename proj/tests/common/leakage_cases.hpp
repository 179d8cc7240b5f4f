#pragma once

// Leakage guards: time-series CV plans and train-only preprocessing.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "microevent/features.hpp"
#include "microevent/pipeline.hpp"
#include "microevent/tuning.hpp"

namespace leakage_cases {

using namespace microevent;

// Checks n random plans directly from the fold index lists.
inline std::string cv_plans_never_leak(int n = 500, std::uint64_t seed = 2024) {
  std::mt19937_64 gen(seed);
  for (int t = 0; t < n; ++t) {
    const int folds = 1 + static_cast<int>(gen() % 6);
    const std::size_t rows = static_cast<std::size_t>(folds + 1) + gen() % 400;
    const auto plan = time_series_split(rows, folds);
    if (static_cast<int>(plan.folds.size()) != folds) return "wrong fold count";
    std::vector<int> seen(rows, 0);
    for (const auto& f : plan.folds) {
      if (f.train.empty() || f.validation.empty()) return "empty fold side";
      const auto max_train = *std::max_element(f.train.begin(), f.train.end());
      const auto min_val = *std::min_element(f.validation.begin(), f.validation.end());
      if (min_val <= max_train) {
        return "validation row " + std::to_string(min_val) + " precedes training row " + std::to_string(max_train) +
               " (rows " + std::to_string(rows) + ", folds " + std::to_string(folds) + ")";
      }
      for (auto i : f.validation) ++seen[i];
    }
    for (std::size_t i = 0; i < rows; ++i)
      if (seen[i] > 1) return "row validated twice";
  }
  return {};
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Hinges by splitting the sorted sample at the median; an odd middle value
// belongs to both halves.
inline std::pair<double, double> hinge_oracle(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const std::size_t half = (n + 1) / 2;
  std::vector<double> lo(v.begin(), v.begin() + half), hi(v.end() - half, v.end());
  return {median_of(lo), median_of(hi)};
}

inline FeatureMatrix random_matrix(std::mt19937_64& gen, std::size_t n_train, std::size_t n_test, std::size_t p) {
  std::normal_distribution<double> norm;
  FeatureMatrix m;
  for (std::size_t j = 0; j < p; ++j) m.columns.push_back("x" + std::to_string(j));
  const std::size_t n = n_train + n_test;
  m.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ids.push_back("r" + std::to_string(i));
    m.labels.push_back(i % 3 == 0 ? 1 : 0);
    m.partitions.push_back(i < n_train ? Partition::train : Partition::test);
    for (std::size_t j = 0; j < p; ++j) {
      double v = norm(gen);
      if (gen() % 20 == 0) v *= 25.0;  // outliers for the fences
      m.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return m;
}

// Expected test rows after train-only capping (optional) and standardizing.
inline Eigen::MatrixXd oracle_transform(const FeatureMatrix& m, bool cap) {
  std::vector<std::size_t> tr, te;
  for (std::size_t i = 0; i < m.rows(); ++i) (m.partitions[i] == Partition::train ? tr : te).push_back(i);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(te.size()), m.X.cols());
  for (Eigen::Index j = 0; j < m.X.cols(); ++j) {
    std::vector<double> col;
    for (auto i : tr) col.push_back(m.X(static_cast<Eigen::Index>(i), j));
    double lo = -INFINITY, hi = INFINITY;
    if (cap) {
      const auto [q1, q3] = hinge_oracle(col);
      lo = q1 - 1.5 * (q3 - q1);
      hi = q3 + 1.5 * (q3 - q1);
      for (auto& v : col) v = std::clamp(v, lo, hi);
    }
    double mu = 0.0;
    for (double v : col) mu += v;
    mu /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(col.size() - 1));
    for (std::size_t r = 0; r < te.size(); ++r) {
      const double v = std::clamp(m.X(static_cast<Eigen::Index>(te[r]), j), lo, hi);
      out(static_cast<Eigen::Index>(r), j) = (v - mu) / sd;
    }
  }
  return out;
}

// Mutating test rows never changes the fitted statistics: the prepared train
// rows stay bit-identical and the test rows follow the train-only oracle.
inline std::string preprocessing_is_train_only(int trials = 100, std::uint64_t seed = 77) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> wild(0.0, 1000.0);
  for (int t = 0; t < trials; ++t) {
    auto m = random_matrix(gen, 20 + gen() % 40, 8 + gen() % 20, 2 + gen() % 5);
    for (const char* est : {"LR", "RF"}) {
      const auto before = preprocess_for(est, m);
      auto mutated = m;
      for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.partitions[i] == Partition::test)
          for (Eigen::Index j = 0; j < m.X.cols(); ++j) mutated.X(static_cast<Eigen::Index>(i), j) = wild(gen);
      const auto after = preprocess_for(est, mutated);
      if (before.train.X != after.train.X || before.train.columns != after.train.columns)
        return std::string(est) + ": train rows changed when test rows were mutated";
      if (after.test.columns != m.columns) return std::string(est) + ": unexpected column drop";
      const auto expect = oracle_transform(mutated, std::string(est) == "LR");
      if (!after.test.X.isApprox(expect, 1e-12) && (after.test.X - expect).cwiseAbs().maxCoeff() > 1e-10)
        return std::string(est) + ": test rows do not follow train-only statistics";
    }
    try {
      (void)Standardizer::fit(m);
      return "standardizer accepted test rows";
    } catch (const Error&) {
    }
    try {
      (void)TukeyCapper::fit(m);
      return "capper accepted test rows";
    } catch (const Error&) {
    }
  }
  return {};
}

}  // namespace leakage_cases
