#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "microevent/logistic.hpp"
#include "microevent/rng.hpp"
#include "microevent/trees.hpp"

namespace microevent {

struct LogisticSpec {
  int max_iter = 100;
  double tol = 1e-8;
  // Keep the coefficients reached when separation is detected (as R's glm
  // does, with a warning) instead of failing. The model is marked separated.
  bool accept_separation = false;
};

using EstimatorSpec = std::variant<LogisticSpec, ForestParams, BoostedParams>;
using FittedModel = std::variant<LogisticModel, ForestModel, BoostedModel>;

// "LR", "RF", "GBDT".
std::string estimator_name(const EstimatorSpec& spec);
std::string estimator_name(const FittedModel& model);
EstimatorSpec default_spec(std::string_view name);

// Seeds inside the spec are replaced by `seed` for the tree families.
EstimatorSpec with_seed(EstimatorSpec spec, std::uint64_t seed);

using ParamValue = std::variant<bool, double, std::string>;

std::string format_param(const ParamValue& v);
bool operator<(const ParamValue& a, const ParamValue& b);

// Sets a named hyperparameter. Throws ConfigError for names the family does
// not have or values of the wrong type.
void set_param(EstimatorSpec& spec, const std::string& name, const ParamValue& value);

FittedModel fit_estimator(const EstimatorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<std::string>& columns, int jobs = 1);

Eigen::VectorXd predict_proba(const FittedModel& model, const Eigen::MatrixXd& X);

const std::vector<std::string>& model_columns(const FittedModel& model);

// Column indices, least important first: ascending |b_j| for LR, ascending
// importance for trees. Ties keep column order.
std::vector<std::size_t> rank_features(const FittedModel& model);
std::vector<std::size_t> rank_by_magnitude(const Eigen::VectorXd& scores);

using Metric = std::function<double(const Eigen::VectorXd& y, const Eigen::VectorXd& scores)>;

// Returns a permutation of [0, n). The default shuffles with the given RNG.
using Permuter = std::function<std::vector<std::size_t>(std::size_t n, Rng& rng)>;

struct PermutationImportance {
  std::vector<std::string> columns;
  std::vector<double> mean_drop;
  std::vector<double> sd_drop;
  double baseline = 0.0;
};

PermutationImportance permutation_importance(const FittedModel& model, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y, const Metric& metric, int n_repeats,
                                             std::uint64_t seed, const Permuter& permuter = {});

// JSON with a schema_version field.
std::string serialize_model(const FittedModel& model);
FittedModel deserialize_model(std::string_view json);

}  // namespace microevent
