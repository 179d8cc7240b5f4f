#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "microevent/error.hpp"
#include "microevent/stats.hpp"
#include "microevent/tuning.hpp"

using namespace microevent;

namespace {

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (auto i = a; i < b; ++i) v.push_back(i);
  return v;
}

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> cols;
};

// f0 and f1 carry a separable signal; f2..f9 are independent noise.
Data informative(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  Data d{Eigen::MatrixXd(n, 10), Eigen::VectorXd(n), {}};
  for (int j = 0; j < 10; ++j) d.cols.push_back("f" + std::to_string(j));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 10; ++j) d.X(i, j) = norm(gen);
    d.y[i] = d.X(i, 0) - d.X(i, 1) > 0;
  }
  return d;
}

}  // namespace

TEST(TimeSeriesSplit, Blocks) {
  const auto p9 = time_series_split(9, 2);
  ASSERT_EQ(p9.folds.size(), 2u);
  EXPECT_EQ(p9.folds[0].train, range(0, 3));
  EXPECT_EQ(p9.folds[0].validation, range(3, 6));
  EXPECT_EQ(p9.folds[1].train, range(0, 6));
  EXPECT_EQ(p9.folds[1].validation, range(6, 9));
  const auto p10 = time_series_split(10, 2);
  EXPECT_EQ(p10.folds[0].train, range(0, 4));
  EXPECT_EQ(p10.folds[0].validation, range(4, 7));
  EXPECT_EQ(p10.folds[1].validation, range(7, 10));
  const auto p1 = time_series_split(7, 1);
  EXPECT_EQ(p1.folds[0].train, range(0, 4));
  EXPECT_EQ(p1.folds[0].validation, range(4, 7));
  EXPECT_THROW(time_series_split(2, 2), Error);
  EXPECT_NO_THROW(p10.check());
  CvPlan bad = p9;
  bad.folds[0].train.push_back(4);
  EXPECT_THROW(bad.check(), Error);
}

TEST(Rfe, DropCountRounding) {
  std::vector<std::size_t> sizes{100};
  while (sizes.back() > 1) sizes.push_back(sizes.back() - rfe_drop_count(sizes.back(), 0.1));
  EXPECT_EQ(std::vector<std::size_t>(sizes.begin(), sizes.begin() + 4), (std::vector<std::size_t>{100, 90, 81, 72}));
  EXPECT_EQ(sizes.back(), 1u);
  EXPECT_EQ(rfe_drop_count(5, 2.0), 2u);
  EXPECT_EQ(rfe_drop_count(3, 0.01), 1u);
}

TEST(Rfe, FindsInformativeFeatures) {
  LogisticSpec lr;
  lr.accept_separation = true;
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto d = informative(120, seed);
    const auto r = rfecv(lr, d.X, d.y, d.cols, 1.0, time_series_split(120, 2), pr_auc_mean);
    const auto& s = r.selected;
    hits += std::count(s.begin(), s.end(), "f0") && std::count(s.begin(), s.end(), "f1");
    EXPECT_EQ(r.curve.size(), 10u);
    EXPECT_EQ(r.curve.front().n_features, 10u);
  }
  EXPECT_GE(hits, 14);
}

TEST(Rfe, SingleFeatureAndTieBreak) {
  const auto d = informative(60, 3);
  const Eigen::MatrixXd one = d.X.leftCols(1);
  const auto r = rfecv(LogisticSpec{}, one, d.y, {"f0"}, 1.0, time_series_split(60, 2), pr_auc_mean);
  EXPECT_EQ(r.selected, std::vector<std::string>{"f0"});
  EXPECT_EQ(r.curve.size(), 1u);
  // a constant metric ties every size: the smallest subset wins
  const Metric flat = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.5; };
  LogisticSpec lr;
  lr.accept_separation = true;
  const auto t = rfecv(lr, d.X, d.y, d.cols, 1.0, time_series_split(60, 2), flat);
  EXPECT_EQ(t.selected.size(), 1u);
}

TEST(Rfe, SingleClassValidationFoldIsSkipped) {
  auto d = informative(30, 4);
  for (int i = 20; i < 30; ++i) d.y[i] = 0;
  for (int i = 0; i < 20; ++i) d.y[i] = i % 2;
  const auto r = rfecv(LogisticSpec{}, d.X.leftCols(3), d.y, {"a", "b", "c"}, 1.0, time_series_split(30, 2),
                       pr_auc_mean);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.curve.front().folds_used, 1);
}

TEST(GridSearch, OnePointAndTies) {
  const auto d = informative(90, 5);
  const auto plan = time_series_split(90, 2);
  ForestParams fp;
  fp.n_trees = 5;
  const ParamGrid one{{"max_depth", {ParamValue{3.0}}}};
  const auto r1 = grid_search(fp, one, d.X, d.y, d.cols, plan, pr_auc_mean);
  EXPECT_EQ(r1.configs.size(), 1u);
  EXPECT_EQ(std::get<ForestParams>(r1.best_spec).max_depth, 3);

  const Metric flat = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.5; };
  const ParamGrid two{{"max_depth", {ParamValue{6.0}, ParamValue{2.0}}}};
  const auto r2 = grid_search(fp, two, d.X, d.y, d.cols, plan, flat);
  EXPECT_EQ(r2.best, 0u);
  EXPECT_EQ(std::get<ForestParams>(r2.best_spec).max_depth, 2);
}

TEST(GridSearch, TableSixShapeEmitsEveryRow) {
  const auto d = informative(60, 6);
  const auto plan = time_series_split(60, 2);
  const ParamGrid grid{
      {"max_depth", {ParamValue{4.0}, ParamValue{6.0}, ParamValue{8.0}}},
      {"n_trees", {ParamValue{50.0}, ParamValue{200.0}, ParamValue{500.0}}},
      {"class_weighting",
       {ParamValue{std::string("none")}, ParamValue{std::string("balanced")},
        ParamValue{std::string("subsample_balanced")}}},
  };
  const auto r = grid_search(ForestParams{}, grid, d.X, d.y, d.cols, plan, pr_auc_mean);
  EXPECT_EQ(r.configs.size(), 27u);
  EXPECT_EQ(r.rows.size(), 54u);
  EXPECT_EQ(r.names, (std::vector<std::string>{"class_weighting", "max_depth", "n_trees"}));
  std::stringstream csv;
  write_grid_csv(csv, r);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 55);
  // the best point reproduces its score
  double again = 0.0;
  for (const auto& f : plan.folds) {
    Eigen::MatrixXd Xt(f.train.size(), 10), Xv(f.validation.size(), 10);
    Eigen::VectorXd yt(f.train.size()), yv(f.validation.size());
    for (std::size_t i = 0; i < f.train.size(); ++i) {
      Xt.row(i) = d.X.row(f.train[i]);
      yt[i] = d.y[f.train[i]];
    }
    for (std::size_t i = 0; i < f.validation.size(); ++i) {
      Xv.row(i) = d.X.row(f.validation[i]);
      yv[i] = d.y[f.validation[i]];
    }
    again += pr_auc_mean(yv, predict_proba(fit_estimator(r.best_spec, Xt, yt, d.cols), Xv));
  }
  EXPECT_DOUBLE_EQ(again / 2.0, r.mean_metric[r.best]);
}
