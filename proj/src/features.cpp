#include "microevent/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {
namespace {

// Fitted statistics may only see training rows.
void require_train_rows(const FeatureMatrix& m, const char* who) {
  for (auto p : m.partitions) {
    if (p != Partition::train) throw Error(std::string(who) + ": fit given non-train rows");
  }
}

void check_columns(const std::vector<std::string>& expected, const std::vector<std::string>& got, const char* who) {
  if (expected != got) throw Error(std::string(who) + ": column schema mismatch");
}

}  // namespace

std::string to_string(Partition p) { return p == Partition::train ? "train" : "test"; }

Partition parse_partition(std::string_view text) {
  if (text == "train") return Partition::train;
  if (text == "test") return Partition::test;
  throw InputError("unknown partition: " + std::string(text));
}

FeatureMatrix FeatureMatrix::partition(Partition p) const {
  FeatureMatrix out;
  out.columns = columns;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (partitions[i] != p) continue;
    keep.push_back(static_cast<Eigen::Index>(i));
    out.row_ids.push_back(row_ids[i]);
    out.labels.push_back(labels[i]);
    out.partitions.push_back(p);
  }
  out.X.resize(static_cast<Eigen::Index>(keep.size()), X.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) out.X.row(static_cast<Eigen::Index>(r)) = X.row(keep[r]);
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  FeatureMatrix out;
  out.row_ids = row_ids;
  out.labels = labels;
  out.partitions = partitions;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = std::find(columns.begin(), columns.end(), names[j]);
    if (it == columns.end()) throw Error("unknown feature column: " + names[j]);
    out.X.col(static_cast<Eigen::Index>(j)) = X.col(it - columns.begin());
    out.columns.push_back(names[j]);
  }
  return out;
}

Eigen::VectorXd FeatureMatrix::label_vector() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i];
  return y;
}

void FeatureMatrix::validate() const {
  if (static_cast<std::size_t>(X.cols()) != columns.size()) throw Error("feature matrix: column count mismatch");
  if (row_ids.size() != rows() || labels.size() != rows() || partitions.size() != rows()) {
    throw Error("feature matrix: row metadata mismatch");
  }
  if (!X.allFinite()) throw Error("feature matrix: missing or non-finite values");
}

std::string topic_column(int k) { return "lda_topic__" + std::to_string(k); }

std::vector<std::string> feature_columns(int n_topics) {
  std::vector<std::string> c;
  for (int k = 0; k < n_topics; ++k) c.push_back(topic_column(k));
  for (const char* s : {"negative", "neutral", "positive", "compound"}) c.push_back(std::string("sentiment_") + s);
  return c;
}

std::vector<double> message_vector(std::span<const double> theta, const SentimentScore& s) {
  std::vector<double> v(theta.begin(), theta.end());
  v.push_back(s.negative);
  v.push_back(s.neutral);
  v.push_back(s.positive);
  v.push_back(s.compound);
  return v;
}

std::vector<double> pool_timestep(std::span<const std::vector<double>> message_vectors) {
  if (message_vectors.empty()) throw Error("pool_timestep: empty step");
  std::vector<double> out(message_vectors.front().size(), 0.0);
  for (const auto& v : message_vectors) {
    if (v.size() != out.size()) throw Error("pool_timestep: ragged message vectors");
    for (std::size_t j = 0; j < v.size(); ++j) out[j] += v[j];
  }
  for (auto& x : out) x /= static_cast<double>(message_vectors.size());
  return out;
}

FeatureMatrix build_feature_matrix(const StepDataset& dataset,
                                   const std::unordered_map<std::string, std::vector<double>>& message_vectors,
                                   std::vector<std::string> columns) {
  FeatureMatrix m;
  m.columns = std::move(columns);
  const std::size_t n = dataset.train.size() + dataset.test.size();
  m.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m.columns.size()));
  std::size_t r = 0;
  auto add = [&](const TimeStep& step, Partition p) {
    std::vector<std::vector<double>> vecs;
    vecs.reserve(step.message_ids.size());
    for (const auto& id : step.message_ids) {
      auto it = message_vectors.find(id);
      if (it == message_vectors.end()) throw Error("no feature vector for message " + id);
      vecs.push_back(it->second);
    }
    const auto pooled = pool_timestep(vecs);
    if (pooled.size() != m.columns.size()) throw Error("feature vector width does not match columns");
    for (std::size_t j = 0; j < pooled.size(); ++j) m.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = pooled[j];
    m.row_ids.push_back(step.id);
    m.labels.push_back(step.is_event() ? 1 : 0);
    m.partitions.push_back(p);
    ++r;
  };
  for (const auto& s : dataset.train) add(s, Partition::train);
  for (const auto& s : dataset.test) add(s, Partition::test);
  return m;
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
  require_train_rows(train, "standardizer");
  if (train.rows() < 2) throw Error("standardizer: need at least 2 train rows");
  Standardizer s;
  const double n = static_cast<double>(train.rows());
  for (std::size_t j = 0; j < train.cols(); ++j) {
    const auto col = train.X.col(static_cast<Eigen::Index>(j));
    const double mu = col.sum() / n;
    const double var = (col.array() - mu).square().sum() / (n - 1.0);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      s.dropped_.push_back(train.columns[j]);
      continue;
    }
    s.columns_.push_back(train.columns[j]);
    s.mean_.push_back(mu);
    s.sd_.push_back(sd);
  }
  return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& m) const {
  FeatureMatrix out = m.select_columns(columns_);
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    auto col = out.X.col(static_cast<Eigen::Index>(j));
    col = (col.array() - mean_[j]) / sd_[j];
  }
  return out;
}

std::vector<std::string> aliased_columns(const FeatureMatrix& train, double tol) {
  const Eigen::Index n = train.X.rows();
  std::vector<Eigen::VectorXd> basis;
  if (n > 0) basis.push_back(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < train.X.cols(); ++j) {
    Eigen::VectorXd v = train.X.col(j);
    const double norm = v.norm();
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double rest = v.norm();
    if (norm == 0.0 || rest <= tol * norm) {
      out.push_back(train.columns[static_cast<std::size_t>(j)]);
      continue;
    }
    basis.push_back(v / rest);
  }
  return out;
}

std::pair<double, double> tukey_hinges(std::vector<double> v) {
  if (v.empty()) throw Error("tukey_hinges: empty column");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double n4 = std::floor((n + 3.0) / 2.0) / 2.0;
  auto at = [&](double d) {
    const auto lo = static_cast<std::size_t>(std::floor(d)) - 1;
    const auto hi = static_cast<std::size_t>(std::ceil(d)) - 1;
    return 0.5 * (v[lo] + v[hi]);
  };
  return {at(n4), at(n + 1.0 - n4)};
}

TukeyCapper TukeyCapper::fit(const FeatureMatrix& train) {
  require_train_rows(train, "tukey capper");
  TukeyCapper c;
  c.columns_ = train.columns;
  for (std::size_t j = 0; j < train.cols(); ++j) {
    const auto col = train.X.col(static_cast<Eigen::Index>(j));
    auto [q1, q3] = tukey_hinges(std::vector<double>(col.begin(), col.end()));
    const double iqr = q3 - q1;
    c.lower_.push_back(q1 - 1.5 * iqr);
    c.upper_.push_back(q3 + 1.5 * iqr);
  }
  return c;
}

FeatureMatrix TukeyCapper::apply(const FeatureMatrix& m) const {
  check_columns(columns_, m.columns, "tukey capper");
  FeatureMatrix out = m;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    auto col = out.X.col(static_cast<Eigen::Index>(j));
    col = col.array().max(lower_[j]).min(upper_[j]);
  }
  return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "step_id,label,partition";
  for (const auto& c : m.columns) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << csv_escape(m.row_ids[i]) << ',' << m.labels[i] << ',' << to_string(m.partitions[i]);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out << ',' << format_double(m.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("feature CSV: empty file");
  auto header = parse_csv_line(line);
  if (header.size() < 3 || header[0] != "step_id" || header[1] != "label" || header[2] != "partition") {
    throw InputError("feature CSV: unexpected header");
  }
  FeatureMatrix m;
  m.columns.assign(header.begin() + 3, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = parse_csv_line(line);
    if (f.size() != header.size()) throw InputError("feature CSV: ragged row");
    m.row_ids.push_back(f[0]);
    m.labels.push_back(std::stoi(f[1]));
    m.partitions.push_back(parse_partition(f[2]));
    std::vector<double> r;
    for (std::size_t j = 3; j < f.size(); ++j) r.push_back(std::stod(f[j]));
    rows.push_back(std::move(r));
  }
  m.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
      m.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  m.validate();
  return m;
}

}  // namespace microevent
