#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "microevent/learners.hpp"

namespace microevent {

struct CvFold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct CvPlan {
  int n_folds = 0;
  std::vector<CvFold> folds;

  // Throws unless every training row precedes every validation row in each
  // fold and the validation blocks are disjoint and consecutive.
  void check() const;
};

// n_folds + 1 consecutive blocks (the remainder goes to the earliest blocks);
// fold i trains on blocks 0..i and validates on block i + 1.
CvPlan time_series_split(std::size_t n_rows, int n_folds = 2);

// Number of features removed from `current` by one elimination round: step
// itself when step >= 1, otherwise ceil(step * current), at least 1.
std::size_t rfe_drop_count(std::size_t current, double step);

struct CurvePoint {
  std::size_t n_features = 0;
  double metric = 0.0;  // -inf when no fold could be scored
  int folds_used = 0;
};

struct SelectionResult {
  std::vector<std::string> selected;
  std::vector<CurvePoint> curve;  // in visiting order (largest subset first)
  std::size_t chosen_size = 0;
  std::vector<std::string> warnings;
};

// Recursive feature elimination scored by CV. Rankings come from a fit on all
// training rows. Folds whose fit fails or whose validation block is single
// class are skipped with a warning.
SelectionResult rfecv(const EstimatorSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const std::vector<std::string>& columns, double step, const CvPlan& plan, const Metric& metric,
                      int jobs = 1);

using ParamGrid = std::vector<std::pair<std::string, std::vector<ParamValue>>>;

struct GridRow {
  std::size_t config = 0;
  int fold = 0;
  double metric = 0.0;  // NaN when the fold failed
  std::string error;
};

struct GridResult {
  std::vector<std::string> names;                 // sorted
  std::vector<std::vector<ParamValue>> configs;   // lexicographic order
  std::vector<double> mean_metric;                // -inf when every fold failed
  std::vector<GridRow> rows;                      // config-major, then fold
  std::size_t best = 0;
  EstimatorSpec best_spec;
};

// Cartesian product of the grid (names and values sorted ascending), each
// point scored by mean validation metric. Ties keep the first point.
GridResult grid_search(const EstimatorSpec& spec, const ParamGrid& grid, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const std::vector<std::string>& columns, const CvPlan& plan,
                       const Metric& metric, int jobs = 1);

// params...,fold,metric
void write_grid_csv(std::ostream& out, const GridResult& result);
// n_features,metric
void write_selection_curve_csv(std::ostream& out, const SelectionResult& result);

}  // namespace microevent
