#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace microevent {

enum class ClassWeighting { none, balanced, subsample_balanced };

std::string to_string(ClassWeighting w);
ClassWeighting parse_class_weighting(std::string_view text);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: class-1 fraction (forest) or additive output (boosting)
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = 6;
  ClassWeighting class_weighting = ClassWeighting::none;
  std::optional<int> max_features;  // default floor(sqrt(p)), at least 1
  int min_samples_leaf = 1;
  std::uint64_t seed = 1;
};

struct ForestModel {
  std::vector<std::string> columns;
  ForestParams params;
  std::vector<Tree> trees;
  std::vector<double> importances;  // normalized; all zero when no split happened

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

// Bagged CART with weighted Gini impurity. Tree i draws from
// derive_seed(seed, "tree", i), so a larger forest extends a smaller one.
ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                       const ForestParams& params, int jobs = 1);

struct BoostedParams {
  int n_trees = 100;
  int depth = 4;
  double learning_rate = 0.1;
  double l2 = 3.0;
  ClassWeighting class_weighting = ClassWeighting::none;
  bool preserve_input_order = false;
  double subsample = 0.8;
  std::uint64_t seed = 1;
};

struct BoostedModel {
  std::vector<std::string> columns;
  BoostedParams params;
  double base_score = 0.0;  // logit scale
  std::vector<Tree> trees;
  std::vector<double> train_loss;  // weighted mean log-loss after each round
  std::vector<double> importances;  // normalized total gain

  Eigen::VectorXd decision_function(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

// Gradient boosting on the logistic loss. Leaves take -sum(g) / (sum(h) + l2)
// scaled by the learning rate. Rows for each round are a random subsample, or
// with preserve_input_order a contiguous block in input order whose start
// moves from round to round.
BoostedModel fit_boosted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                         const BoostedParams& params);

// Per-row weights n / (2 n_c) for balanced modes, 1 otherwise.
Eigen::VectorXd class_weights(const Eigen::VectorXd& y, ClassWeighting mode);

}  // namespace microevent
