#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "microevent/sentiment.hpp"
#include "microevent/timegrid.hpp"

namespace microevent {

enum class Partition { train, test };

std::string to_string(Partition p);
Partition parse_partition(std::string_view text);

// Rows are time steps in chronological order (train rows first), columns are
// named features.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::string> row_ids;
  std::vector<int> labels;
  std::vector<Partition> partitions;
  Eigen::MatrixXd X;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }

  FeatureMatrix partition(Partition p) const;
  FeatureMatrix select_columns(std::span<const std::string> names) const;
  Eigen::VectorXd label_vector() const;
  void validate() const;
};

std::vector<std::string> feature_columns(int n_topics);
std::string topic_column(int k);

// theta followed by (negative, neutral, positive, compound).
std::vector<double> message_vector(std::span<const double> theta, const SentimentScore& s);

// Column-wise mean; throws on an empty step.
std::vector<double> pool_timestep(std::span<const std::vector<double>> message_vectors);

// One row per step of `dataset` (train then test); label 1 for event steps.
FeatureMatrix build_feature_matrix(const StepDataset& dataset,
                                   const std::unordered_map<std::string, std::vector<double>>& message_vectors,
                                   std::vector<std::string> columns);

// Columns that are linear combinations of the intercept and the columns kept
// before them, tested in column order on `train` (relative residual norm
// below tol), as a pivoted QR would alias them.
std::vector<std::string> aliased_columns(const FeatureMatrix& train, double tol = 1e-7);

class Standardizer {
 public:
  // Sample mean and (n - 1) standard deviation per column. Throws when any
  // row is marked as a test row.
  // Columns with sigma == 0 are dropped by apply() and listed in dropped().
  static Standardizer fit(const FeatureMatrix& train);

  FeatureMatrix apply(const FeatureMatrix& m) const;

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sd() const { return sd_; }
  const std::vector<std::string>& dropped() const { return dropped_; }

 private:
  std::vector<std::string> columns_;
  std::vector<double> mean_;
  std::vector<double> sd_;
  std::vector<std::string> dropped_;
};

// Tukey hinges as in R's fivenum().
std::pair<double, double> tukey_hinges(std::vector<double> values);

class TukeyCapper {
 public:
  // Fences Q1 - 1.5 IQR and Q3 + 1.5 IQR. Rejects test rows like Standardizer.
  static TukeyCapper fit(const FeatureMatrix& train);

  FeatureMatrix apply(const FeatureMatrix& m) const;

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

 private:
  std::vector<std::string> columns_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

// Header step_id,label,partition,<columns...>.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(std::istream& in);

}  // namespace microevent
