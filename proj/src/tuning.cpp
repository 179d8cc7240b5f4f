#include "microevent/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "microevent/error.hpp"
#include "microevent/parallel.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd take(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          X(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  return out;
}

bool single_class(const Eigen::VectorXd& y) {
  const double s = y.sum();
  return s < 0.5 || s > static_cast<double>(y.size()) - 0.5;
}

std::vector<std::string> names_of(const std::vector<std::string>& columns, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(columns[i]);
  return out;
}

struct FoldScore {
  double metric = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

FoldScore score_fold(const EstimatorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<std::string>& columns, const std::vector<std::size_t>& cols, const CvFold& fold,
                     const Metric& metric) {
  FoldScore s;
  const Eigen::VectorXd yv = take(y, fold.validation);
  if (single_class(yv)) {
    s.error = "single-class validation block";
    return s;
  }
  try {
    const auto model = fit_estimator(spec, take(X, fold.train, cols), take(y, fold.train), names_of(columns, cols));
    s.metric = metric(yv, predict_proba(model, take(X, fold.validation, cols)));
  } catch (const Error& e) {
    s.error = e.what();
  }
  return s;
}

}  // namespace

void CvPlan::check() const {
  std::size_t expected_start = 0;
  bool first = true;
  for (const auto& f : folds) {
    if (f.train.empty() || f.validation.empty()) throw Error("cv plan: empty fold");
    const auto max_train = *std::max_element(f.train.begin(), f.train.end());
    const auto min_val = *std::min_element(f.validation.begin(), f.validation.end());
    if (max_train >= min_val) throw Error("cv plan: validation row precedes a training row");
    for (std::size_t i = 1; i < f.validation.size(); ++i) {
      if (f.validation[i] != f.validation[i - 1] + 1) throw Error("cv plan: validation block not consecutive");
    }
    if (!first && f.validation.front() != expected_start) throw Error("cv plan: validation blocks not adjacent");
    expected_start = f.validation.back() + 1;
    first = false;
  }
}

CvPlan time_series_split(std::size_t n_rows, int n_folds) {
  if (n_folds < 1) throw ConfigError("time_series_split: n_folds must be >= 1");
  const std::size_t blocks = static_cast<std::size_t>(n_folds) + 1;
  if (n_rows < blocks) throw Error("time_series_split: too few rows");
  std::vector<std::size_t> start(blocks + 1, 0);
  const std::size_t base = n_rows / blocks, extra = n_rows % blocks;
  for (std::size_t b = 0; b < blocks; ++b) start[b + 1] = start[b] + base + (b < extra ? 1 : 0);
  CvPlan plan;
  plan.n_folds = n_folds;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_folds); ++i) {
    CvFold f;
    for (std::size_t r = 0; r < start[i + 1]; ++r) f.train.push_back(r);
    for (std::size_t r = start[i + 1]; r < start[i + 2]; ++r) f.validation.push_back(r);
    plan.folds.push_back(std::move(f));
  }
  plan.check();
  return plan;
}

std::size_t rfe_drop_count(std::size_t current, double step) {
  if (!(step > 0)) throw ConfigError("rfecv: step must be positive");
  std::size_t k;
  if (step >= 1) {
    if (step != std::floor(step)) throw ConfigError("rfecv: step >= 1 must be an integer");
    k = static_cast<std::size_t>(step);
  } else {
    k = static_cast<std::size_t>(std::ceil(step * static_cast<double>(current) - 1e-9));
  }
  return std::max<std::size_t>(1, k);
}

SelectionResult rfecv(const EstimatorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const std::vector<std::string>& columns, double step, const CvPlan& plan, const Metric& metric,
                      int jobs) {
  if (X.cols() == 0) throw Error("rfecv: no features");
  if (static_cast<Eigen::Index>(columns.size()) != X.cols()) throw Error("rfecv: column names mismatch");
  plan.check();
  rfe_drop_count(1, step);
  SelectionResult result;
  std::vector<std::size_t> current(columns.size());
  std::iota(current.begin(), current.end(), 0);
  std::vector<std::vector<std::size_t>> subsets;
  bool any_valid_block = false;
  std::vector<std::size_t> all_rows(static_cast<std::size_t>(X.rows()));
  std::iota(all_rows.begin(), all_rows.end(), 0);

  while (!current.empty()) {
    std::vector<FoldScore> scores(plan.folds.size());
    parallel_for(plan.folds.size(), jobs, [&](std::size_t f) {
      scores[f] = score_fold(spec, X, y, columns, current, plan.folds[f], metric);
    });
    CurvePoint point;
    point.n_features = current.size();
    double sum = 0.0;
    for (std::size_t f = 0; f < scores.size(); ++f) {
      if (scores[f].error != "single-class validation block") any_valid_block = true;
      if (std::isnan(scores[f].metric)) {
        result.warnings.push_back("size " + std::to_string(current.size()) + ", fold " + std::to_string(f) +
                                  " skipped: " + scores[f].error);
        continue;
      }
      sum += scores[f].metric;
      ++point.folds_used;
    }
    point.metric = point.folds_used > 0 ? sum / point.folds_used : kNegInf;
    result.curve.push_back(point);
    subsets.push_back(current);
    if (current.size() == 1) break;

    std::vector<std::size_t> order;
    try {
      const auto model = fit_estimator(spec, take(X, all_rows, current), y, names_of(columns, current));
      order = rank_features(model);
    } catch (const SeparationError& e) {
      order = rank_by_magnitude(e.beta().tail(e.beta().size() - 1));
      result.warnings.push_back("size " + std::to_string(current.size()) + ": ranking from a separated fit");
    } catch (const Error& e) {
      order.resize(current.size());
      std::iota(order.begin(), order.end(), 0);
      result.warnings.push_back("size " + std::to_string(current.size()) + ": ranking fit failed (" + e.what() +
                                "), column order used");
    }
    const std::size_t drop = std::min(rfe_drop_count(current.size(), step), current.size() - 1);
    std::vector<bool> removed(current.size(), false);
    for (std::size_t i = 0; i < drop; ++i) removed[order[i]] = true;
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (!removed[i]) next.push_back(current[i]);
    }
    current = std::move(next);
  }

  if (!any_valid_block) throw Error("rfecv: every validation fold is single-class");
  std::size_t best = result.curve.size();
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    if (result.curve[i].metric == kNegInf) continue;
    // Later points are smaller subsets, so >= prefers the smaller size on ties.
    if (best == result.curve.size() || result.curve[i].metric >= result.curve[best].metric) best = i;
  }
  if (best == result.curve.size()) throw Error("rfecv: no subset size could be scored");
  result.chosen_size = result.curve[best].n_features;
  result.selected = names_of(columns, subsets[best]);
  return result;
}

GridResult grid_search(const EstimatorSpec& spec, const ParamGrid& grid, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const std::vector<std::string>& columns, const CvPlan& plan,
                       const Metric& metric, int jobs) {
  if (grid.empty()) throw ConfigError("grid_search: empty grid");
  plan.check();
  std::map<std::string, std::vector<ParamValue>> sorted;
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ConfigError("grid_search: no values for " + name);
    if (sorted.count(name)) throw ConfigError("grid_search: duplicate parameter " + name);
    auto v = values;
    std::sort(v.begin(), v.end(), [](const ParamValue& a, const ParamValue& b) { return a < b; });
    sorted[name] = std::move(v);
  }
  GridResult r;
  for (const auto& [name, values] : sorted) r.names.push_back(name);
  std::size_t total = 1;
  for (const auto& n : r.names) total *= sorted[n].size();
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<ParamValue> cfg(r.names.size());
    std::size_t rest = c;
    for (std::size_t i = r.names.size(); i-- > 0;) {
      const auto& values = sorted[r.names[i]];
      cfg[i] = values[rest % values.size()];
      rest /= values.size();
    }
    r.configs.push_back(std::move(cfg));
  }

  std::vector<EstimatorSpec> specs;
  for (const auto& cfg : r.configs) {
    EstimatorSpec s = spec;
    for (std::size_t i = 0; i < r.names.size(); ++i) set_param(s, r.names[i], cfg[i]);
    specs.push_back(std::move(s));
  }
  std::vector<std::size_t> cols(columns.size());
  std::iota(cols.begin(), cols.end(), 0);
  const std::size_t nf = plan.folds.size();
  std::vector<FoldScore> scores(specs.size() * nf);
  parallel_for(scores.size(), jobs, [&](std::size_t c) {
    scores[c] = score_fold(specs[c / nf], X, y, columns, cols, plan.folds[c % nf], metric);
  });
  for (std::size_t c = 0; c < specs.size(); ++c) {
    double sum = 0.0;
    int used = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& s = scores[c * nf + f];
      r.rows.push_back({c, static_cast<int>(f), s.metric, s.error});
      if (!std::isnan(s.metric)) {
        sum += s.metric;
        ++used;
      }
    }
    r.mean_metric.push_back(used > 0 ? sum / used : kNegInf);
  }
  r.best = 0;
  for (std::size_t c = 1; c < r.mean_metric.size(); ++c) {
    if (r.mean_metric[c] > r.mean_metric[r.best]) r.best = c;
  }
  r.best_spec = specs[r.best];
  return r;
}

void write_grid_csv(std::ostream& out, const GridResult& result) {
  for (const auto& n : result.names) out << csv_escape(n) << ',';
  out << "fold,metric\n";
  for (const auto& row : result.rows) {
    for (const auto& v : result.configs[row.config]) out << csv_escape(format_param(v)) << ',';
    out << row.fold << ',' << (std::isnan(row.metric) ? std::string("nan") : format_double(row.metric)) << '\n';
  }
}

void write_selection_curve_csv(std::ostream& out, const SelectionResult& result) {
  out << "n_features,metric\n";
  for (const auto& p : result.curve) {
    out << p.n_features << ',' << (p.metric == kNegInf ? std::string("-inf") : format_double(p.metric)) << '\n';
  }
}

}  // namespace microevent
