#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "microevent/diagnostics.hpp"
#include "microevent/stats.hpp"
#include "microevent/synthlab.hpp"
#include "microevent/topics.hpp"
#include "microevent/tuning.hpp"

namespace microevent {

inline constexpr const char* kVersion = "0.1.0";

struct DatasetSummary {
  std::string name;
  std::string design;
  std::string event_kind;
  std::vector<std::string> packages;
  std::size_t n_messages = 0;
  std::string split_instant;
  std::size_t train_steps = 0, test_steps = 0;
  std::size_t train_events = 0, test_events = 0;
  std::size_t dropped_straddling = 0, dropped_empty = 0;
};

struct TopicSummary {
  int k = 0;
  bool selected_by_elbow = false;
  bool no_elbow = false;
  std::vector<int> ks;
  std::vector<double> mean_coherence;
  std::vector<CoherencePoint> curve;
  double coherence = 0.0;
  std::vector<double> per_topic_coherence;
  std::vector<std::vector<std::string>> top_words;
};

struct EstimatorSummary {
  std::string name;
  bool failed = false;
  std::string failed_stage;
  std::string error;
  std::vector<std::string> dropped_constant;
  std::vector<std::string> selected;
  std::vector<CurvePoint> curve;
  std::map<std::string, std::string> tuned_params;
  MetricReport metrics;
  double p_value = 1.0;
  int n_permutations = 0;
  bool holm_significant = false;
  double holm_threshold = 0.0;
  std::vector<std::string> warnings;
  std::optional<LrDiagnostics> diagnostics;
  std::string diagnostics_error;
  std::optional<PermutationImportance> importance;
};

struct ExperimentReport {
  DatasetSummary dataset;
  std::string family;
  double alpha = 0.05;
  std::optional<TopicSummary> topics;
  std::vector<std::string> feature_columns;
  std::vector<EffectSize> effects;
  std::vector<EstimatorSummary> estimators;
  std::vector<std::string> notes;
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json config;
};

// Throws ConfigError on any token other than json, markdown, svg.
void validate_formats(const std::vector<std::string>& formats);

// Everything except wall-clock data, which goes under "run_info" when given.
nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const std::optional<nlohmann::ordered_json>& run_info = std::nullopt);

// Inverse of report_to_json (run_info is ignored); nulls read back as NaN.
ExperimentReport report_from_json(const nlohmann::ordered_json& doc);

// Performance table (PRAUC, P.test, F1 per estimator; Holm-significant rows
// starred), the LR coefficient table with VIF, the LLR block and the four
// pseudo R^2, then effect sizes, selections and topics.
std::string render_markdown(const ExperimentReport& report);

struct ForestRow {
  std::string label;
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};
// Horizontal interval plot; log_scale for odds ratios. `reference` draws the
// vertical no-effect line.
std::string svg_forest(const std::string& title, const std::vector<ForestRow>& rows, double reference, bool log_scale);
std::string svg_coherence(const TopicSummary& topics);
std::string svg_sweep(const SweepResult& sweep);

std::string render_sweep_markdown(const SweepResult& sweep, const SyntheticConfig& config,
                                  const std::optional<SimilarityReport>& similarity);
nlohmann::ordered_json sweep_to_json(const SweepResult& sweep, const SyntheticConfig& config,
                                     const std::optional<SimilarityReport>& similarity);

// Writes report.json and, when requested, report.md and the SVG plots into
// `dir`. Returns the written paths in write order.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::vector<std::string>& formats,
                                               const std::filesystem::path& dir,
                                               const std::optional<nlohmann::ordered_json>& run_info = std::nullopt);

}  // namespace microevent
