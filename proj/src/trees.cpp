#include "microevent/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "microevent/error.hpp"
#include "microevent/logistic.hpp"
#include "microevent/parallel.hpp"
#include "microevent/rng.hpp"

namespace microevent {
namespace {

constexpr double kMinGain = 1e-12;

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& columns) {
  if (X.rows() != y.size() || X.rows() == 0) throw Error("tree fit: shape mismatch");
  if (static_cast<Eigen::Index>(columns.size()) != X.cols()) throw Error("tree fit: column names mismatch");
  const double pos = y.sum();
  if (pos < 0.5 || pos > static_cast<double>(y.size()) - 0.5) throw FitError("tree fit: y has a single class");
}

std::vector<std::string> default_columns(const Eigen::MatrixXd& X, std::vector<std::string> columns) {
  if (columns.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) columns.push_back("x" + std::to_string(j));
  }
  return columns;
}

// Weighted Gini impurity times node weight: 2 w1 w0 / w.
double gini_mass(double w, double w1) { return w > 0 ? 2.0 * w1 * (w - w1) / w : 0.0; }

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;  // rows in sorted order going left
};

class ClassificationBuilder {
 public:
  ClassificationBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& w,
                        const ForestParams& params, int mtry, Rng& rng, std::vector<double>& importance)
      : X_(X), y_(y), w_(w), params_(params), mtry_(mtry), rng_(rng), importance_(importance) {}

  Tree build(std::vector<int> rows) {
    Tree t;
    grow(t, std::move(rows), 0);
    return t;
  }

 private:
  int grow(Tree& t, std::vector<int> rows, int depth) {
    double w = 0.0, w1 = 0.0;
    for (int r : rows) {
      w += w_[r];
      if (y_[r] > 0.5) w1 += w_[r];
    }
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    t.nodes[id].value = w > 0 ? w1 / w : 0.0;
    if (depth >= params_.max_depth || w1 <= 0.0 || w1 >= w ||
        rows.size() < 2 * static_cast<std::size_t>(std::max(1, params_.min_samples_leaf))) {
      return id;
    }
    const double parent = gini_mass(w, w1);
    SplitChoice best;
    auto features = rng_.sample_without_replacement(static_cast<std::size_t>(X_.cols()), static_cast<std::size_t>(mtry_));
    std::sort(features.begin(), features.end());
    std::vector<int> order(rows);
    for (std::size_t f : features) {
      const auto fi = static_cast<Eigen::Index>(f);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double xa = X_(a, fi), xb = X_(b, fi);
        return xa != xb ? xa < xb : a < b;
      });
      double wl = 0.0, wl1 = 0.0;
      const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const int r = order[i];
        wl += w_[r];
        if (y_[r] > 0.5) wl1 += w_[r];
        const double x0 = X_(r, fi), x1 = X_(order[i + 1], fi);
        if (x0 == x1 || i + 1 < min_leaf || order.size() - i - 1 < min_leaf) continue;
        const double gain = parent - gini_mass(wl, wl1) - gini_mass(w - wl, w1 - wl1);
        if (gain > best.gain + kMinGain) {
          best = {static_cast<int>(f), 0.5 * (x0 + x1), gain, i + 1};
        }
      }
    }
    if (best.feature < 0) return id;
    importance_[best.feature] += best.gain;
    std::vector<int> left, right;
    const auto fi = static_cast<Eigen::Index>(best.feature);
    for (int r : rows) (X_(r, fi) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    t.nodes[id].feature = best.feature;
    t.nodes[id].threshold = best.threshold;
    const int l = grow(t, std::move(left), depth + 1);
    t.nodes[id].left = l;
    const int rr = grow(t, std::move(right), depth + 1);
    t.nodes[id].right = rr;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const std::vector<double>& w_;
  const ForestParams& params_;
  int mtry_;
  Rng& rng_;
  std::vector<double>& importance_;
};

class RegressionBuilder {
 public:
  RegressionBuilder(const Eigen::MatrixXd& X, const std::vector<double>& g, const std::vector<double>& h,
                    const BoostedParams& params, std::vector<double>& importance)
      : X_(X), g_(g), h_(h), params_(params), importance_(importance) {}

  Tree build(std::vector<int> rows) {
    Tree t;
    grow(t, std::move(rows), 0);
    return t;
  }

 private:
  double score(double G, double H) const {
    const double d = H + params_.l2;
    return d > 0 ? G * G / d : 0.0;
  }

  int grow(Tree& t, std::vector<int> rows, int depth) {
    double G = 0.0, H = 0.0;
    for (int r : rows) {
      G += g_[r];
      H += h_[r];
    }
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({});
    const double d = H + params_.l2;
    t.nodes[id].value = d > 0 ? -G / d * params_.learning_rate : 0.0;
    if (depth >= params_.depth || rows.size() < 2) return id;
    const double parent = score(G, H);
    SplitChoice best;
    std::vector<int> order(rows);
    for (Eigen::Index f = 0; f < X_.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double xa = X_(a, f), xb = X_(b, f);
        return xa != xb ? xa < xb : a < b;
      });
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        gl += g_[order[i]];
        hl += h_[order[i]];
        const double x0 = X_(order[i], f), x1 = X_(order[i + 1], f);
        if (x0 == x1) continue;
        const double gain = score(gl, hl) + score(G - gl, H - hl) - parent;
        if (gain > best.gain + kMinGain) best = {static_cast<int>(f), 0.5 * (x0 + x1), gain, i + 1};
      }
    }
    if (best.feature < 0) return id;
    importance_[best.feature] += best.gain;
    std::vector<int> left, right;
    for (int r : rows) (X_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    t.nodes[id].feature = best.feature;
    t.nodes[id].threshold = best.threshold;
    const int l = grow(t, std::move(left), depth + 1);
    t.nodes[id].left = l;
    const int rr = grow(t, std::move(right), depth + 1);
    t.nodes[id].right = rr;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const BoostedParams& params_;
  std::vector<double>& importance_;
};

std::vector<double> normalized(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0) {
    for (auto& x : v) x /= s;
  }
  return v;
}

}  // namespace

std::string to_string(ClassWeighting w) {
  switch (w) {
    case ClassWeighting::none: return "none";
    case ClassWeighting::balanced: return "balanced";
    case ClassWeighting::subsample_balanced: return "subsample_balanced";
  }
  return "none";
}

ClassWeighting parse_class_weighting(std::string_view text) {
  if (text == "none") return ClassWeighting::none;
  if (text == "balanced") return ClassWeighting::balanced;
  if (text == "subsample_balanced") return ClassWeighting::subsample_balanced;
  throw ConfigError("unknown class weighting: " + std::string(text));
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

Eigen::VectorXd class_weights(const Eigen::VectorXd& y, ClassWeighting mode) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
  if (mode == ClassWeighting::none) return w;
  const double n = static_cast<double>(y.size());
  const double n1 = y.sum();
  const double n0 = n - n1;
  for (Eigen::Index i = 0; i < y.size(); ++i) w[i] = y[i] > 0.5 ? n / (2.0 * n1) : n / (2.0 * n0);
  return w;
}

Eigen::VectorXd ForestModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != columns.size()) throw Error("forest: column schema mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  if (trees.empty()) return out.array() + 0.5;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(X.row(i));
    out[i] = s / static_cast<double>(trees.size());
  }
  return out;
}

ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                       const ForestParams& params, int jobs) {
  columns = default_columns(X, std::move(columns));
  check_inputs(X, y, columns);
  if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (params.max_depth < 0) throw ConfigError("forest: max_depth must be >= 0");
  const int p = static_cast<int>(X.cols());
  const int mtry = std::clamp(params.max_features.value_or(static_cast<int>(std::floor(std::sqrt(p)))), 1, std::max(p, 1));
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const Eigen::VectorXd cw = class_weights(y, params.class_weighting == ClassWeighting::balanced
                                                  ? ClassWeighting::balanced
                                                  : ClassWeighting::none);
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (y[static_cast<Eigen::Index>(i)] > 0.5 ? pos : neg).push_back(static_cast<int>(i));

  ForestModel model;
  model.columns = columns;
  model.params = params;
  model.trees.resize(params.n_trees);
  std::vector<std::vector<double>> imps(params.n_trees, std::vector<double>(p, 0.0));
  parallel_for(static_cast<std::size_t>(params.n_trees), jobs, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, "tree", t));
    std::vector<double> w(n, 0.0);
    if (params.class_weighting == ClassWeighting::subsample_balanced) {
      const std::size_t n1 = n / 2, n0 = n - n1;
      for (std::size_t i = 0; i < n1; ++i) w[pos[rng.uniform_index(pos.size())]] += 1.0;
      for (std::size_t i = 0; i < n0; ++i) w[neg[rng.uniform_index(neg.size())]] += 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) w[rng.uniform_index(n)] += 1.0;
      for (std::size_t i = 0; i < n; ++i) w[i] *= cw[static_cast<Eigen::Index>(i)];
    }
    std::vector<int> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] > 0) rows.push_back(static_cast<int>(i));
    }
    ClassificationBuilder builder(X, y, w, params, mtry, rng, imps[t]);
    model.trees[t] = builder.build(std::move(rows));
  });
  std::vector<double> total(p, 0.0);
  for (const auto& imp : imps) {
    for (int j = 0; j < p; ++j) total[j] += imp[j];
  }
  model.importances = normalized(std::move(total));
  return model;
}

Eigen::VectorXd BoostedModel::decision_function(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != columns.size()) throw Error("boosted: column schema mismatch");
  Eigen::VectorXd f = Eigen::VectorXd::Constant(X.rows(), base_score);
  for (const auto& t : trees) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) f[i] += t.predict(X.row(i));
  }
  return f;
}

Eigen::VectorXd BoostedModel::predict_proba(const Eigen::MatrixXd& X) const {
  return decision_function(X).unaryExpr([](double v) { return sigmoid(v); });
}

BoostedModel fit_boosted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> columns,
                         const BoostedParams& params) {
  columns = default_columns(X, std::move(columns));
  check_inputs(X, y, columns);
  if (!(params.learning_rate > 0)) throw ConfigError("boosted: learning_rate must be > 0");
  if (params.n_trees < 0) throw ConfigError("boosted: n_trees must be >= 0");
  if (params.depth < 0) throw ConfigError("boosted: depth must be >= 0");
  if (!(params.l2 >= 0)) throw ConfigError("boosted: l2 must be >= 0");
  if (!(params.subsample > 0 && params.subsample <= 1)) throw ConfigError("boosted: subsample must be in (0, 1]");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const Eigen::VectorXd w = class_weights(y, params.class_weighting);
  const double wsum = w.sum();
  const double ybar = std::clamp(w.dot(y) / wsum, 1e-12, 1.0 - 1e-12);

  BoostedModel model;
  model.columns = columns;
  model.params = params;
  model.base_score = logit(ybar);
  std::vector<double> imp(X.cols(), 0.0);
  Eigen::VectorXd F = Eigen::VectorXd::Constant(X.rows(), model.base_score);
  auto loss = [&] {
    double l = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      // log(1 + e^F) - y F, evaluated stably
      const double f = F[ii];
      const double softplus = f > 0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
      l += w[ii] * (softplus - y[ii] * f);
    }
    return l / wsum;
  };
  Rng rng(derive_seed(params.seed, "boost"));
  const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))), 1, n);
  std::vector<double> g(n), h(n);
  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double p = sigmoid(F[ii]);
      g[i] = w[ii] * (p - y[ii]);
      h[i] = w[ii] * p * (1.0 - p);
    }
    std::vector<int> rows;
    if (m == n) {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    } else if (params.preserve_input_order) {
      const std::size_t start = static_cast<std::size_t>(round) % (n - m + 1);
      for (std::size_t i = start; i < start + m; ++i) rows.push_back(static_cast<int>(i));
    } else {
      for (auto i : rng.sample_without_replacement(n, m)) rows.push_back(static_cast<int>(i));
      std::sort(rows.begin(), rows.end());
    }
    RegressionBuilder builder(X, g, h, params, imp);
    Tree t = builder.build(std::move(rows));
    for (Eigen::Index i = 0; i < X.rows(); ++i) F[i] += t.predict(X.row(i));
    model.trees.push_back(std::move(t));
    model.train_loss.push_back(loss());
  }
  model.importances = normalized(std::move(imp));
  return model;
}

}  // namespace microevent
