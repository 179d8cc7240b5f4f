#pragma once

// A hand-filled report with every section populated, for golden rendering.

#include <string>
#include <vector>

#include "microevent/report.hpp"

namespace report_sample {

using namespace microevent;

inline EstimatorSummary estimator(const std::string& name, double prauc, double p, double f1, bool significant) {
  EstimatorSummary e;
  e.name = name;
  e.selected = {"topic_3", "compound"};
  e.curve = {{4, 0.58, 2}, {3, 0.61, 2}, {2, 0.63, 2}, {1, 0.55, 2}};
  e.metrics.pr_auc_mean = prauc;
  e.metrics.pr_auc_events = prauc - 0.1;
  e.metrics.roc_auc = prauc + 0.02;
  e.metrics.f1_mean = f1;
  e.metrics.accuracy = 0.7;
  e.metrics.no_information_rate = 0.75;
  e.metrics.confusion = {3, 4, 11, 2};
  e.p_value = p;
  e.n_permutations = 1000;
  e.holm_significant = significant;
  e.holm_threshold = 0.05 / 3;
  return e;
}

inline LrDiagnostics lr_table() {
  LrDiagnostics d;
  d.n = 52;
  d.df = 2;
  d.log_likelihood = -24.512;
  d.null_log_likelihood = -29.167;
  d.null_base_probability = 0.2692;
  d.llr_chi2 = 9.31;
  d.llr_p = 0.0095;
  d.aic = 55.024;
  d.r2 = {0.187, 0.164, 0.241, 0.057};
  d.ci_z = 2.2414;
  CoefficientRow c0{"(Intercept)", -1.1042, 0.3581, -3.0835, 0.00205, std::numeric_limits<double>::quiet_NaN(),
                    0.3315, 0.1487, 0.7392};
  CoefficientRow c1{"topic_3", 0.9213, 0.3702, 2.4887, 0.01282, 1.08, 2.5126, 1.1021, 5.7284};
  CoefficientRow c2{"compound", -0.6120, 0.3301, -1.8540, 0.06374, 12.4, 0.5423, 0.2597, 1.1325};
  d.coefficients = {c0, c1, c2};
  d.high_vif = {"compound"};
  d.linearity = {{"topic_3", 0.2211, 0.4102, 0.5899}, {"compound", -0.0412, 0.2977, 0.8899}};
  d.max_abs_studentized_residual = 2.4311;
  d.outlier_row = 17;
  d.outlier_p_bonferroni = 0.7827;
  return d;
}

inline ExperimentReport make() {
  ExperimentReport r;
  r.dataset.name = "multiple minor c.w.-based";
  r.dataset.design = "calendar_week";
  r.dataset.event_kind = "minor";
  r.dataset.packages = {"django", "selenium"};
  r.dataset.n_messages = 1846;
  r.dataset.split_instant = "2019-12-31T08:15:00Z";
  r.dataset.train_steps = 52;
  r.dataset.test_steps = 34;
  r.dataset.train_events = 14;
  r.dataset.test_events = 5;
  r.dataset.dropped_straddling = 1;
  r.family = "multiple";
  r.alpha = 0.05;
  TopicSummary t;
  t.k = 6;
  t.selected_by_elbow = true;
  t.ks = {4, 6, 8};
  t.mean_coherence = {0.41, 0.52, 0.54};
  t.curve = {{4, 1, 0.40}, {4, 2, 0.42}, {6, 1, 0.51}, {6, 2, 0.53}, {8, 1, 0.55}, {8, 2, 0.53}};
  t.coherence = 0.52;
  t.per_topic_coherence = {0.5, 0.6, 0.4, 0.55, 0.5, 0.57};
  t.top_words = {{"model", "queri"}, {"driver", "element"}, {"templat", "render"},
                 {"form", "field"},  {"test", "assert"},    {"server", "deploy"}};
  r.topics = t;
  r.feature_columns = {"topic_0", "topic_1", "topic_2", "topic_3", "negative", "neutral", "positive", "compound"};
  r.effects = {{"topic_3", 0.4211, 0.021, 0.1202, 0.6523}, {"compound", -0.2105, 0.03, -0.5077, 0.1311}};
  auto lr = estimator("LR", 0.6634, 0.0049, 0.6121, true);
  lr.diagnostics = lr_table();
  lr.warnings = {"aliased with earlier columns, dropped: positive"};
  auto rf = estimator("RF", 0.5912, 0.0619, 0.5521, false);
  rf.tuned_params = {{"class_weighting", "balanced"}, {"max_depth", "4"}};
  PermutationImportance imp;
  imp.columns = {"topic_3", "compound"};
  imp.mean_drop = {0.0712, 0.0123};
  imp.sd_drop = {0.021, 0.008};
  imp.baseline = 0.5912;
  rf.importance = imp;
  auto gb = estimator("GBDT", 0.4, 1.0, 0.0, false);
  gb.failed = true;
  gb.failed_stage = "rfecv";
  gb.error = "every fold was skipped";
  r.estimators = {lr, rf, gb};
  r.notes = {"synthetic note for rendering"};
  r.config_hash = "0123456789abcdef";
  r.seed = 7;
  r.config = nlohmann::json{{"seed", 7}};
  return r;
}

// Column headers and row labels the rendered Markdown must carry.
inline std::vector<std::string> required_fields() {
  return {"| Dataset | Estimator | PRAUC | P.test | F1 |",
          "| Feature | Estimate | Std. Error | Z-value | Pr(>\\|z\\|) | VIF |",
          "Observations",
          "Log-Likelihood",
          "LL-Null",
          "LLR chi2",
          "LLR p-value",
          "| Tjur | Cox-Snell | Nagelkerke | Adj. McFadden |"};
}

// Empty when every field is present, otherwise the first missing one.
inline std::string missing_field(const std::string& markdown) {
  for (const auto& f : required_fields())
    if (markdown.find(f) == std::string::npos) return f;
  return {};
}

}  // namespace report_sample
