#include "microevent/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kSchemaVersion = 1;

double as_number(const ParamValue& v, const std::string& name) {
  if (auto d = std::get_if<double>(&v)) return *d;
  throw ConfigError("parameter " + name + " expects a number");
}

int as_int(const ParamValue& v, const std::string& name) {
  const double d = as_number(v, name);
  if (d != std::floor(d)) throw ConfigError("parameter " + name + " expects an integer");
  return static_cast<int>(d);
}

bool as_bool(const ParamValue& v, const std::string& name) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  throw ConfigError("parameter " + name + " expects a boolean");
}

ClassWeighting as_weighting(const ParamValue& v, const std::string& name) {
  if (auto s = std::get_if<std::string>(&v)) return parse_class_weighting(*s);
  throw ConfigError("parameter " + name + " expects a string");
}

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  const int size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw InputError("model JSON: broken tree links");
    }
  }
  if (t.nodes.empty()) throw InputError("model JSON: empty tree");
  return t;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string estimator_name(const EstimatorSpec& spec) {
  return std::visit(overloaded{[](const LogisticSpec&) { return std::string("LR"); },
                               [](const ForestParams&) { return std::string("RF"); },
                               [](const BoostedParams&) { return std::string("GBDT"); }},
                    spec);
}

std::string estimator_name(const FittedModel& model) {
  return std::visit(overloaded{[](const LogisticModel&) { return std::string("LR"); },
                               [](const ForestModel&) { return std::string("RF"); },
                               [](const BoostedModel&) { return std::string("GBDT"); }},
                    model);
}

EstimatorSpec default_spec(std::string_view name) {
  if (name == "LR") return LogisticSpec{};
  if (name == "RF") return ForestParams{};
  if (name == "GBDT") return BoostedParams{};
  throw ConfigError("unknown estimator: " + std::string(name));
}

EstimatorSpec with_seed(EstimatorSpec spec, std::uint64_t seed) {
  std::visit(overloaded{[](LogisticSpec&) {}, [&](ForestParams& p) { p.seed = seed; },
                        [&](BoostedParams& p) { p.seed = seed; }},
             spec);
  return spec;
}

std::string format_param(const ParamValue& v) {
  return std::visit(overloaded{[](bool b) { return std::string(b ? "true" : "false"); },
                               [](double d) { return format_double(d); }, [](const std::string& s) { return s; }},
                    v);
}

bool operator<(const ParamValue& a, const ParamValue& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return x < std::get<T>(b);
      },
      a);
}

void set_param(EstimatorSpec& spec, const std::string& name, const ParamValue& v) {
  std::visit(overloaded{
                 [&](LogisticSpec& s) {
                   if (name == "max_iter") s.max_iter = as_int(v, name);
                   else if (name == "tol") s.tol = as_number(v, name);
                   else if (name == "accept_separation") s.accept_separation = as_bool(v, name);
                   else throw ConfigError("LR has no parameter " + name);
                 },
                 [&](ForestParams& p) {
                   if (name == "n_trees") p.n_trees = as_int(v, name);
                   else if (name == "max_depth") p.max_depth = as_int(v, name);
                   else if (name == "class_weighting") p.class_weighting = as_weighting(v, name);
                   else if (name == "max_features") p.max_features = as_int(v, name);
                   else if (name == "min_samples_leaf") p.min_samples_leaf = as_int(v, name);
                   else throw ConfigError("RF has no parameter " + name);
                 },
                 [&](BoostedParams& p) {
                   if (name == "n_trees") p.n_trees = as_int(v, name);
                   else if (name == "depth") p.depth = as_int(v, name);
                   else if (name == "learning_rate") p.learning_rate = as_number(v, name);
                   else if (name == "l2") p.l2 = as_number(v, name);
                   else if (name == "class_weighting") p.class_weighting = as_weighting(v, name);
                   else if (name == "preserve_input_order") p.preserve_input_order = as_bool(v, name);
                   else if (name == "subsample") p.subsample = as_number(v, name);
                   else throw ConfigError("GBDT has no parameter " + name);
                 },
             },
             spec);
}

FittedModel fit_estimator(const EstimatorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<std::string>& columns, int jobs) {
  return std::visit(overloaded{
                        [&](const LogisticSpec& s) -> FittedModel {
                          try {
                            return fit_logistic(X, y, columns, s.max_iter, s.tol);
                          } catch (const SeparationError& e) {
                            if (!s.accept_separation) throw;
                            LogisticModel m;
                            m.columns = columns;
                            m.beta = e.beta();
                            m.se = Eigen::VectorXd::Constant(e.beta().size(), std::numeric_limits<double>::quiet_NaN());
                            m.log_likelihood = bernoulli_log_likelihood(y, m.predict_proba(X));
                            m.n = static_cast<std::size_t>(X.rows());
                            m.separated = true;
                            return m;
                          }
                        },
                        [&](const ForestParams& p) -> FittedModel { return fit_forest(X, y, columns, p, jobs); },
                        [&](const BoostedParams& p) -> FittedModel { return fit_boosted(X, y, columns, p); },
                    },
                    spec);
}

Eigen::VectorXd predict_proba(const FittedModel& model, const Eigen::MatrixXd& X) {
  return std::visit([&](const auto& m) { return m.predict_proba(X); }, model);
}

const std::vector<std::string>& model_columns(const FittedModel& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.columns; }, model);
}

std::vector<std::size_t> rank_by_magnitude(const Eigen::VectorXd& scores) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(scores[static_cast<Eigen::Index>(a)]) < std::abs(scores[static_cast<Eigen::Index>(b)]);
  });
  return idx;
}

std::vector<std::size_t> rank_features(const FittedModel& model) {
  return std::visit(overloaded{
                        [](const LogisticModel& m) { return rank_by_magnitude(m.beta.tail(m.beta.size() - 1)); },
                        [](const ForestModel& m) { return rank_by_magnitude(to_eigen(m.importances)); },
                        [](const BoostedModel& m) { return rank_by_magnitude(to_eigen(m.importances)); },
                    },
                    model);
}

PermutationImportance permutation_importance(const FittedModel& model, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y, const Metric& metric, int n_repeats,
                                             std::uint64_t seed, const Permuter& permuter) {
  if (n_repeats < 1) throw ConfigError("permutation_importance: n_repeats must be >= 1");
  PermutationImportance out;
  out.columns = model_columns(model);
  out.baseline = metric(y, predict_proba(model, X));
  const std::size_t n = static_cast<std::size_t>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Rng rng(derive_seed(seed, "permutation_importance", static_cast<std::uint64_t>(j)));
    std::vector<double> drops;
    Eigen::MatrixXd Xp = X;
    for (int r = 0; r < n_repeats; ++r) {
      std::vector<std::size_t> perm;
      if (permuter) {
        perm = permuter(n, rng);
      } else {
        perm.resize(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
      }
      for (std::size_t i = 0; i < n; ++i) {
        Xp(static_cast<Eigen::Index>(i), j) = X(static_cast<Eigen::Index>(perm[i]), j);
      }
      drops.push_back(out.baseline - metric(y, predict_proba(model, Xp)));
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / n_repeats;
    double ss = 0.0;
    for (double d : drops) ss += (d - mean) * (d - mean);
    out.mean_drop.push_back(mean);
    out.sd_drop.push_back(n_repeats > 1 ? std::sqrt(ss / (n_repeats - 1)) : 0.0);
  }
  return out;
}

std::string serialize_model(const FittedModel& model) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["estimator"] = estimator_name(model);
  std::visit(overloaded{
                 [&](const LogisticModel& m) {
                   j["columns"] = m.columns;
                   j["beta"] = to_std(m.beta);
                   j["se"] = m.separated ? std::vector<double>{} : to_std(m.se);
                   j["separated"] = m.separated;
                   j["log_likelihood"] = m.log_likelihood;
                   j["n"] = m.n;
                   j["iterations"] = m.iterations;
                 },
                 [&](const ForestModel& m) {
                   j["columns"] = m.columns;
                   j["params"] = {{"n_trees", m.params.n_trees},
                                  {"max_depth", m.params.max_depth},
                                  {"class_weighting", to_string(m.params.class_weighting)},
                                  {"min_samples_leaf", m.params.min_samples_leaf},
                                  {"seed", m.params.seed}};
                   if (m.params.max_features) j["params"]["max_features"] = *m.params.max_features;
                   j["importances"] = m.importances;
                   json trees = json::array();
                   for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
                   j["trees"] = trees;
                 },
                 [&](const BoostedModel& m) {
                   j["columns"] = m.columns;
                   j["params"] = {{"n_trees", m.params.n_trees},
                                  {"depth", m.params.depth},
                                  {"learning_rate", m.params.learning_rate},
                                  {"l2", m.params.l2},
                                  {"class_weighting", to_string(m.params.class_weighting)},
                                  {"preserve_input_order", m.params.preserve_input_order},
                                  {"subsample", m.params.subsample},
                                  {"seed", m.params.seed}};
                   j["base_score"] = m.base_score;
                   j["importances"] = m.importances;
                   j["train_loss"] = m.train_loss;
                   json trees = json::array();
                   for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
                   j["trees"] = trees;
                 },
             },
             model);
  return j.dump();
}

FittedModel deserialize_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw InputError("model JSON: unsupported schema_version");
    const auto name = j.at("estimator").get<std::string>();
    const auto columns = j.at("columns").get<std::vector<std::string>>();
    if (name == "LR") {
      LogisticModel m;
      m.columns = columns;
      m.beta = to_eigen(j.at("beta").get<std::vector<double>>());
      m.separated = j.value("separated", false);
      m.se = m.separated ? Eigen::VectorXd::Constant(m.beta.size(), std::numeric_limits<double>::quiet_NaN())
                         : to_eigen(j.at("se").get<std::vector<double>>());
      m.log_likelihood = j.at("log_likelihood").get<double>();
      m.n = j.at("n").get<std::size_t>();
      m.iterations = j.at("iterations").get<int>();
      m.converged = !m.separated;
      if (static_cast<std::size_t>(m.beta.size()) != columns.size() + 1) throw InputError("model JSON: beta size");
      return m;
    }
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
    const auto& p = j.at("params");
    if (name == "RF") {
      ForestModel m;
      m.columns = columns;
      m.params.n_trees = p.at("n_trees").get<int>();
      m.params.max_depth = p.at("max_depth").get<int>();
      m.params.class_weighting = parse_class_weighting(p.at("class_weighting").get<std::string>());
      m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
      m.params.seed = p.at("seed").get<std::uint64_t>();
      if (p.contains("max_features")) m.params.max_features = p.at("max_features").get<int>();
      m.importances = j.at("importances").get<std::vector<double>>();
      m.trees = std::move(trees);
      return m;
    }
    if (name == "GBDT") {
      BoostedModel m;
      m.columns = columns;
      m.params.n_trees = p.at("n_trees").get<int>();
      m.params.depth = p.at("depth").get<int>();
      m.params.learning_rate = p.at("learning_rate").get<double>();
      m.params.l2 = p.at("l2").get<double>();
      m.params.class_weighting = parse_class_weighting(p.at("class_weighting").get<std::string>());
      m.params.preserve_input_order = p.at("preserve_input_order").get<bool>();
      m.params.subsample = p.at("subsample").get<double>();
      m.params.seed = p.at("seed").get<std::uint64_t>();
      m.base_score = j.at("base_score").get<double>();
      m.importances = j.at("importances").get<std::vector<double>>();
      m.train_loss = j.at("train_loss").get<std::vector<double>>();
      m.trees = std::move(trees);
      return m;
    }
    throw InputError("model JSON: unknown estimator " + name);
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace microevent
