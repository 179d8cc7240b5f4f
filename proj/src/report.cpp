#include "microevent/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "microevent/error.hpp"
#include "microevent/strings.hpp"

namespace microevent {

using OJson = nlohmann::ordered_json;

namespace {

std::string fixed(double x, int digits) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s = buf;
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (!s.empty() && s[0] == '-') s.erase(0, 1);
  }
  return s;
}

std::string pfmt(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 1e-4) return "<0.0001";
  return fixed(p, 4);
}

OJson num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

OJson metrics_json(const MetricReport& m) {
  return OJson{{"pr_auc_mean", num(m.pr_auc_mean)},
               {"pr_auc_events", num(m.pr_auc_events)},
               {"roc_auc", num(m.roc_auc)},
               {"f1_mean", num(m.f1_mean)},
               {"accuracy", num(m.accuracy)},
               {"no_information_rate", num(m.no_information_rate)},
               {"confusion",
                {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

OJson diagnostics_json(const LrDiagnostics& d) {
  OJson coefs = OJson::array();
  for (const auto& c : d.coefficients)
    coefs.push_back({{"name", c.name},
                     {"estimate", num(c.estimate)},
                     {"std_error", num(c.std_error)},
                     {"z_value", num(c.z_value)},
                     {"p_value", num(c.p_value)},
                     {"vif", num(c.vif)},
                     {"odds_ratio", num(c.odds_ratio)},
                     {"or_ci_low", num(c.or_ci_low)},
                     {"or_ci_high", num(c.or_ci_high)}});
  OJson lin = OJson::array();
  for (const auto& t : d.linearity)
    lin.push_back({{"feature", t.feature},
                   {"estimate", num(t.estimate)},
                   {"std_error", num(t.std_error)},
                   {"p_value", num(t.p_value)}});
  return OJson{{"n", d.n},
               {"df", d.df},
               {"log_likelihood", num(d.log_likelihood)},
               {"null_log_likelihood", num(d.null_log_likelihood)},
               {"null_base_probability", num(d.null_base_probability)},
               {"llr_chi2", num(d.llr_chi2)},
               {"llr_p", num(d.llr_p)},
               {"aic", num(d.aic)},
               {"pseudo_r2",
                {{"tjur", num(d.r2.tjur)},
                 {"cox_snell", num(d.r2.cox_snell)},
                 {"nagelkerke", num(d.r2.nagelkerke)},
                 {"adj_mcfadden", num(d.r2.adj_mcfadden)}}},
               {"ci_z", num(d.ci_z)},
               {"coefficients", coefs},
               {"high_vif", d.high_vif},
               {"linearity", lin},
               {"linearity_error", d.linearity_error},
               {"outlier",
                {{"max_abs_studentized_residual", num(d.max_abs_studentized_residual)},
                 {"row", d.outlier_row},
                 {"p_bonferroni", num(d.outlier_p_bonferroni)}}}};
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("write failed: " + path.string());
}

struct Frame {
  double width = 640, height = 400;
  double left = 150, right = 30, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string svg_open(const Frame& f, const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  return s.str();
}

std::string svg_axes(const Frame& f, const std::string& xlabel, const std::string& ylabel, int nticks_x,
                     int nticks_y, bool log_x) {
  std::ostringstream s;
  s << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\"" << f.width - f.right << "\" y2=\""
    << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.height - f.bottom
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= nticks_x; ++i) {
    double x = f.x0 + (f.x1 - f.x0) * i / nticks_x;
    double label = log_x ? std::exp(x) : x;
    s << "<text x=\"" << fixed(f.px(x), 1) << "\" y=\"" << f.height - f.bottom + 15
      << "\" text-anchor=\"middle\">" << fixed(label, 2) << "</text>\n";
  }
  for (int i = 0; nticks_y > 0 && i <= nticks_y; ++i) {
    double y = f.y0 + (f.y1 - f.y0) * i / nticks_y;
    s << "<text x=\"" << f.left - 5 << "\" y=\"" << fixed(f.py(y) + 4, 1) << "\" text-anchor=\"end\">"
      << fixed(y, 2) << "</text>\n";
  }
  s << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 10
    << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n";
  if (!ylabel.empty())
    s << "<text x=\"15\" y=\"" << (f.top + f.height - f.bottom) / 2 << "\" transform=\"rotate(-90 15 "
      << (f.top + f.height - f.bottom) / 2 << ")\" text-anchor=\"middle\">" << xml_escape(ylabel) << "</text>\n";
  return s.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

void validate_formats(const std::vector<std::string>& formats) {
  static const std::set<std::string> known{"json", "markdown", "svg"};
  if (formats.empty()) throw ConfigError("report formats: at least one format is required");
  for (const auto& f : formats)
    if (!known.count(f)) throw ConfigError("unknown report format: " + f);
}

OJson report_to_json(const ExperimentReport& r, const std::optional<OJson>& run_info) {
  OJson out;
  out["schema_version"] = 1;
  out["config_hash"] = r.config_hash;
  out["seed"] = r.seed;
  out["version"] = kVersion;
  const auto& d = r.dataset;
  out["dataset"] = {{"name", d.name},
                    {"design", d.design},
                    {"event_kind", d.event_kind},
                    {"packages", d.packages},
                    {"n_messages", d.n_messages},
                    {"split_instant", d.split_instant},
                    {"train_steps", d.train_steps},
                    {"test_steps", d.test_steps},
                    {"train_events", d.train_events},
                    {"test_events", d.test_events},
                    {"dropped_straddling", d.dropped_straddling},
                    {"dropped_empty", d.dropped_empty}};
  if (r.topics) {
    const auto& t = *r.topics;
    OJson curve = OJson::array();
    for (const auto& p : t.curve) curve.push_back({{"k", p.k}, {"seed", p.seed}, {"coherence", num(p.coherence)}});
    OJson means = OJson::array();
    for (double v : t.mean_coherence) means.push_back(num(v));
    OJson per = OJson::array();
    for (double v : t.per_topic_coherence) per.push_back(num(v));
    out["topics"] = {{"k", t.k},
                     {"selected_by_elbow", t.selected_by_elbow},
                     {"no_elbow", t.no_elbow},
                     {"k_grid", t.ks},
                     {"mean_coherence", means},
                     {"coherence_curve", curve},
                     {"coherence", num(t.coherence)},
                     {"per_topic_coherence", per},
                     {"top_words", t.top_words}};
  } else {
    out["topics"] = nullptr;
  }
  out["feature_columns"] = r.feature_columns;
  OJson effects = OJson::array();
  for (const auto& e : r.effects)
    effects.push_back({{"feature", e.feature},
                       {"delta", num(e.delta)},
                       {"variance", num(e.variance)},
                       {"ci_low", num(e.ci_low)},
                       {"ci_high", num(e.ci_high)}});
  out["effect_sizes"] = effects;
  OJson ests = OJson::array();
  for (const auto& e : r.estimators) {
    OJson j;
    j["name"] = e.name;
    j["failed"] = e.failed;
    if (e.failed) {
      j["failed_stage"] = e.failed_stage;
      j["error"] = e.error;
    }
    j["dropped_constant"] = e.dropped_constant;
    j["selected_features"] = e.selected;
    OJson curve = OJson::array();
    for (const auto& c : e.curve)
      curve.push_back({{"n_features", c.n_features}, {"metric", num(c.metric)}, {"folds_used", c.folds_used}});
    j["selection_curve"] = curve;
    j["tuned_params"] = e.tuned_params;
    if (!e.failed) {
      j["metrics"] = metrics_json(e.metrics);
      j["permutation"] = {{"p_value", num(e.p_value)}, {"n_permutations", e.n_permutations}};
    }
    j["holm_threshold"] = num(e.holm_threshold);
    j["holm_significant"] = e.holm_significant;
    j["warnings"] = e.warnings;
    j["diagnostics"] = e.diagnostics ? diagnostics_json(*e.diagnostics) : OJson(nullptr);
    if (!e.diagnostics_error.empty()) j["diagnostics_error"] = e.diagnostics_error;
    if (e.importance) {
      OJson imp = OJson::array();
      for (std::size_t i = 0; i < e.importance->columns.size(); ++i)
        imp.push_back({{"feature", e.importance->columns[i]},
                       {"mean_drop", num(e.importance->mean_drop[i])},
                       {"sd_drop", num(e.importance->sd_drop[i])}});
      j["permutation_importance"] = {{"baseline", num(e.importance->baseline)}, {"features", imp}};
    }
    ests.push_back(j);
  }
  out["estimators"] = ests;
  out["holm"] = {{"family", r.family}, {"alpha", r.alpha}};
  out["notes"] = r.notes;
  out["config"] = OJson::parse(r.config.is_null() ? std::string("{}") : r.config.dump());
  if (run_info) out["run_info"] = *run_info;
  return out;
}

namespace {

double dnum(const OJson& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j[key].get<double>();
}

std::vector<std::string> strings(const OJson& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  return j[key].get<std::vector<std::string>>();
}

MetricReport metrics_from(const OJson& j) {
  MetricReport m;
  m.pr_auc_mean = dnum(j, "pr_auc_mean");
  m.pr_auc_events = dnum(j, "pr_auc_events");
  m.roc_auc = dnum(j, "roc_auc");
  m.f1_mean = dnum(j, "f1_mean");
  m.accuracy = dnum(j, "accuracy");
  m.no_information_rate = dnum(j, "no_information_rate");
  const auto& c = j.at("confusion");
  m.confusion.tp = c.at("tp").get<std::size_t>();
  m.confusion.fp = c.at("fp").get<std::size_t>();
  m.confusion.tn = c.at("tn").get<std::size_t>();
  m.confusion.fn = c.at("fn").get<std::size_t>();
  return m;
}

LrDiagnostics diagnostics_from(const OJson& j) {
  LrDiagnostics d;
  d.n = j.at("n").get<std::size_t>();
  d.df = j.at("df").get<int>();
  d.log_likelihood = dnum(j, "log_likelihood");
  d.null_log_likelihood = dnum(j, "null_log_likelihood");
  d.null_base_probability = dnum(j, "null_base_probability");
  d.llr_chi2 = dnum(j, "llr_chi2");
  d.llr_p = dnum(j, "llr_p");
  d.aic = dnum(j, "aic");
  const auto& r2 = j.at("pseudo_r2");
  d.r2.tjur = dnum(r2, "tjur");
  d.r2.cox_snell = dnum(r2, "cox_snell");
  d.r2.nagelkerke = dnum(r2, "nagelkerke");
  d.r2.adj_mcfadden = dnum(r2, "adj_mcfadden");
  d.ci_z = dnum(j, "ci_z");
  for (const auto& c : j.at("coefficients")) {
    CoefficientRow row;
    row.name = c.at("name").get<std::string>();
    row.estimate = dnum(c, "estimate");
    row.std_error = dnum(c, "std_error");
    row.z_value = dnum(c, "z_value");
    row.p_value = dnum(c, "p_value");
    row.vif = dnum(c, "vif");
    row.odds_ratio = dnum(c, "odds_ratio");
    row.or_ci_low = dnum(c, "or_ci_low");
    row.or_ci_high = dnum(c, "or_ci_high");
    d.coefficients.push_back(row);
  }
  d.high_vif = strings(j, "high_vif");
  for (const auto& t : j.at("linearity"))
    d.linearity.push_back({t.at("feature").get<std::string>(), dnum(t, "estimate"), dnum(t, "std_error"),
                           dnum(t, "p_value")});
  d.linearity_error = j.value("linearity_error", std::string());
  const auto& o = j.at("outlier");
  d.max_abs_studentized_residual = dnum(o, "max_abs_studentized_residual");
  d.outlier_row = o.at("row").get<std::size_t>();
  d.outlier_p_bonferroni = dnum(o, "p_bonferroni");
  return d;
}

}  // namespace

ExperimentReport report_from_json(const OJson& doc) {
  ExperimentReport r;
  try {
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    const auto& d = doc.at("dataset");
    r.dataset.name = d.at("name").get<std::string>();
    r.dataset.design = d.at("design").get<std::string>();
    r.dataset.event_kind = d.at("event_kind").get<std::string>();
    r.dataset.packages = strings(d, "packages");
    r.dataset.n_messages = d.at("n_messages").get<std::size_t>();
    r.dataset.split_instant = d.at("split_instant").get<std::string>();
    r.dataset.train_steps = d.at("train_steps").get<std::size_t>();
    r.dataset.test_steps = d.at("test_steps").get<std::size_t>();
    r.dataset.train_events = d.at("train_events").get<std::size_t>();
    r.dataset.test_events = d.at("test_events").get<std::size_t>();
    r.dataset.dropped_straddling = d.at("dropped_straddling").get<std::size_t>();
    r.dataset.dropped_empty = d.at("dropped_empty").get<std::size_t>();
    if (!doc.at("topics").is_null()) {
      const auto& t = doc["topics"];
      TopicSummary ts;
      ts.k = t.at("k").get<int>();
      ts.selected_by_elbow = t.at("selected_by_elbow").get<bool>();
      ts.no_elbow = t.at("no_elbow").get<bool>();
      ts.ks = t.at("k_grid").get<std::vector<int>>();
      for (const auto& v : t.at("mean_coherence"))
        ts.mean_coherence.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      for (const auto& p : t.at("coherence_curve"))
        ts.curve.push_back({p.at("k").get<int>(), p.at("seed").get<std::uint64_t>(), dnum(p, "coherence")});
      ts.coherence = dnum(t, "coherence");
      for (const auto& v : t.at("per_topic_coherence"))
        ts.per_topic_coherence.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      ts.top_words = t.at("top_words").get<std::vector<std::vector<std::string>>>();
      r.topics = ts;
    }
    r.feature_columns = strings(doc, "feature_columns");
    for (const auto& e : doc.at("effect_sizes"))
      r.effects.push_back({e.at("feature").get<std::string>(), dnum(e, "delta"), dnum(e, "variance"),
                           dnum(e, "ci_low"), dnum(e, "ci_high")});
    for (const auto& j : doc.at("estimators")) {
      EstimatorSummary e;
      e.name = j.at("name").get<std::string>();
      e.failed = j.at("failed").get<bool>();
      e.failed_stage = j.value("failed_stage", std::string());
      e.error = j.value("error", std::string());
      e.dropped_constant = strings(j, "dropped_constant");
      e.selected = strings(j, "selected_features");
      for (const auto& c : j.at("selection_curve")) {
        CurvePoint p;
        p.n_features = c.at("n_features").get<std::size_t>();
        p.metric = c.at("metric").is_null() ? -std::numeric_limits<double>::infinity() : c["metric"].get<double>();
        p.folds_used = c.at("folds_used").get<int>();
        e.curve.push_back(p);
      }
      e.tuned_params = j.at("tuned_params").get<std::map<std::string, std::string>>();
      if (j.contains("metrics")) e.metrics = metrics_from(j["metrics"]);
      if (j.contains("permutation")) {
        e.p_value = dnum(j["permutation"], "p_value");
        e.n_permutations = j["permutation"].at("n_permutations").get<int>();
      }
      e.holm_threshold = dnum(j, "holm_threshold");
      e.holm_significant = j.at("holm_significant").get<bool>();
      e.warnings = strings(j, "warnings");
      if (!j.at("diagnostics").is_null()) e.diagnostics = diagnostics_from(j["diagnostics"]);
      e.diagnostics_error = j.value("diagnostics_error", std::string());
      if (j.contains("permutation_importance")) {
        PermutationImportance imp;
        const auto& pi = j["permutation_importance"];
        imp.baseline = dnum(pi, "baseline");
        for (const auto& f : pi.at("features")) {
          imp.columns.push_back(f.at("feature").get<std::string>());
          imp.mean_drop.push_back(dnum(f, "mean_drop"));
          imp.sd_drop.push_back(dnum(f, "sd_drop"));
        }
        e.importance = imp;
      }
      r.estimators.push_back(std::move(e));
    }
    r.family = doc.at("holm").at("family").get<std::string>();
    r.alpha = doc["holm"].at("alpha").get<double>();
    r.notes = strings(doc, "notes");
    r.config = nlohmann::json::parse(doc.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report document: ") + e.what());
  }
  return r;
}

std::string render_markdown(const ExperimentReport& r) {
  std::ostringstream s;
  s << "# Experiment report: " << md_escape(r.dataset.name) << "\n\n";
  s << "- config hash: `" << r.config_hash << "`\n";
  s << "- seed: " << r.seed << "\n";
  s << "- design: " << r.dataset.design << ", event kind: " << r.dataset.event_kind << "\n";
  s << "- messages: " << r.dataset.n_messages << ", split instant: " << r.dataset.split_instant << "\n";
  s << "- train steps: " << r.dataset.train_steps << " (" << r.dataset.train_events << " events), test steps: "
    << r.dataset.test_steps << " (" << r.dataset.test_events << " events)\n";
  s << "- dropped steps: " << r.dataset.dropped_straddling << " straddling the split, " << r.dataset.dropped_empty
    << " empty\n\n";

  s << "## Performance\n\n";
  s << "Starred rows are significant after Holm-Bonferroni correction at alpha = " << fixed(r.alpha, 2)
    << " within family `" << md_escape(r.family) << "`.\n\n";
  s << "| Dataset | Estimator | PRAUC | P.test | F1 |\n";
  s << "|---|---|---:|---:|---:|\n";
  for (const auto& e : r.estimators) {
    s << "| " << md_escape(r.dataset.name) << " | " << e.name << (e.holm_significant ? "*" : "") << " | ";
    if (e.failed) {
      s << "failed | - | - |\n";
      continue;
    }
    s << fixed(e.metrics.pr_auc_mean, 3) << " | " << pfmt(e.p_value) << " | " << fixed(e.metrics.f1_mean, 3)
      << " |\n";
  }
  s << "\n| Estimator | ROC AUC | PRAUC (events) | Accuracy | NIR | TP | FP | TN | FN |\n";
  s << "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& e : r.estimators) {
    if (e.failed) continue;
    const auto& m = e.metrics;
    s << "| " << e.name << " | " << fixed(m.roc_auc, 3) << " | " << fixed(m.pr_auc_events, 3) << " | "
      << fixed(m.accuracy, 3) << " | " << fixed(m.no_information_rate, 3) << " | " << m.confusion.tp << " | "
      << m.confusion.fp << " | " << m.confusion.tn << " | " << m.confusion.fn << " |\n";
  }
  s << "\n";
  bool any_failed = false;
  for (const auto& e : r.estimators)
    if (e.failed) {
      s << "- " << e.name << " failed during " << e.failed_stage << ": " << md_escape(e.error) << "\n";
      any_failed = true;
    }
  if (any_failed) s << "\n";

  for (const auto& e : r.estimators) {
    if (e.failed || !e.diagnostics) continue;
    const auto& d = *e.diagnostics;
    s << "## Logistic regression (" << e.name << ")\n\n";
    s << "| Feature | Estimate | Std. Error | Z-value | Pr(>\\|z\\|) | VIF |\n";
    s << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& c : d.coefficients)
      s << "| " << md_escape(c.name) << " | " << fixed(c.estimate, 4) << " | " << fixed(c.std_error, 4) << " | "
        << fixed(c.z_value, 3) << " | " << pfmt(c.p_value) << " | " << (std::isnan(c.vif) ? "" : fixed(c.vif, 2))
        << " |\n";
    s << "\n| Statistic | Value |\n|---|---:|\n";
    s << "| Observations | " << d.n << " |\n";
    s << "| Log-Likelihood | " << fixed(d.log_likelihood, 3) << " |\n";
    s << "| LL-Null | " << fixed(d.null_log_likelihood, 3) << " |\n";
    s << "| LLR chi2 (df = " << d.df << ") | " << fixed(d.llr_chi2, 3) << " |\n";
    s << "| LLR p-value | " << pfmt(d.llr_p) << " |\n";
    s << "| AIC | " << fixed(d.aic, 3) << " |\n";
    s << "\n| Tjur | Cox-Snell | Nagelkerke | Adj. McFadden |\n|---:|---:|---:|---:|\n";
    s << "| " << fixed(d.r2.tjur, 4) << " | " << fixed(d.r2.cox_snell, 4) << " | " << fixed(d.r2.nagelkerke, 4)
      << " | " << fixed(d.r2.adj_mcfadden, 4) << " |\n\n";
    s << "| Feature | Odds ratio | CI low | CI high |\n|---|---:|---:|---:|\n";
    for (const auto& c : d.coefficients) {
      if (c.name == "(Intercept)") continue;
      s << "| " << md_escape(c.name) << " | " << fixed(c.odds_ratio, 4) << " | " << fixed(c.or_ci_low, 4) << " | "
        << fixed(c.or_ci_high, 4) << " |\n";
    }
    s << "\nInterval z = " << fixed(d.ci_z, 4) << ".";
    if (!d.high_vif.empty()) s << " VIF above 10: " << join(d.high_vif, ", ") << ".";
    s << "\n\n";
    if (!d.linearity.empty()) {
      s << "| Box-Tidwell term | Estimate | Std. Error | p |\n|---|---:|---:|---:|\n";
      for (const auto& t : d.linearity)
        s << "| " << md_escape(t.feature) << " | " << fixed(t.estimate, 4) << " | " << fixed(t.std_error, 4)
          << " | " << pfmt(t.p_value) << " |\n";
      s << "\n";
    }
    if (!d.linearity_error.empty()) s << "Linearity check skipped: " << md_escape(d.linearity_error) << "\n\n";
    s << "Largest studentized residual: " << fixed(d.max_abs_studentized_residual, 3) << " (row "
      << d.outlier_row << "), Bonferroni p = " << pfmt(d.outlier_p_bonferroni) << ".\n\n";
  }
  for (const auto& e : r.estimators)
    if (!e.diagnostics_error.empty())
      s << "Diagnostics unavailable for " << e.name << ": " << md_escape(e.diagnostics_error) << "\n\n";

  if (!r.effects.empty()) {
    s << "## Effect sizes (Cliff's delta, train partition)\n\n";
    s << "| Feature | Delta | CI low | CI high |\n|---|---:|---:|---:|\n";
    for (const auto& e : r.effects)
      s << "| " << md_escape(e.feature) << " | " << fixed(e.delta, 4) << " | " << fixed(e.ci_low, 4) << " | "
        << fixed(e.ci_high, 4) << " |\n";
    s << "\n";
  }

  s << "## Feature selection\n\n";
  for (const auto& e : r.estimators) {
    s << "- " << e.name << ": ";
    if (e.selected.empty()) s << "(none)";
    else s << join(e.selected, ", ");
    if (!e.tuned_params.empty()) {
      std::vector<std::string> kv;
      for (const auto& [k, v] : e.tuned_params) kv.push_back(k + "=" + v);
      s << "; tuned " << join(kv, ", ");
    }
    s << "\n";
    const std::size_t shown = std::min<std::size_t>(e.warnings.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) s << "  - warning: " << md_escape(e.warnings[i]) << "\n";
    if (shown < e.warnings.size())
      s << "  - " << e.warnings.size() - shown << " more warning(s) in report.json\n";
  }
  s << "\n";

  if (r.topics) {
    const auto& t = *r.topics;
    s << "## Topics\n\n";
    s << "K = " << t.k;
    if (t.selected_by_elbow) s << " (elbow of mean C_V" << (t.no_elbow ? ", no elbow found, argmax used" : "") << ")";
    else s << " (fixed)";
    s << ", mean C_V = " << fixed(t.coherence, 4) << ".\n\n";
    if (!t.ks.empty()) {
      s << "| K | mean C_V |\n|---:|---:|\n";
      for (std::size_t i = 0; i < t.ks.size(); ++i)
        s << "| " << t.ks[i] << " | " << fixed(i < t.mean_coherence.size() ? t.mean_coherence[i] : NAN, 4)
          << " |\n";
      s << "\n";
    }
    for (std::size_t k = 0; k < t.top_words.size(); ++k) {
      s << "- topic_" << k;
      if (k < t.per_topic_coherence.size()) s << " (" << fixed(t.per_topic_coherence[k], 3) << ")";
      s << ": " << join(t.top_words[k], " ") << "\n";
    }
    s << "\n";
  }
  if (!r.notes.empty()) {
    s << "## Notes\n\n";
    for (const auto& n : r.notes) s << "- " << md_escape(n) << "\n";
    s << "\n";
  }
  return s.str();
}

std::string svg_forest(const std::string& title, const std::vector<ForestRow>& rows, double reference,
                       bool log_scale) {
  Frame f;
  f.height = std::max(160.0, 60.0 + 22.0 * rows.size() + 50.0);
  auto tr = [&](double v) { return log_scale ? std::log(std::max(v, 1e-300)) : v; };
  double lo = tr(reference), hi = tr(reference);
  for (const auto& r : rows)
    for (double v : {r.estimate, r.low, r.high})
      if (std::isfinite(tr(v))) {
        lo = std::min(lo, tr(v));
        hi = std::max(hi, tr(v));
      }
  double pad = (hi - lo) * 0.05 + 1e-9;
  f.x0 = lo - pad;
  f.x1 = hi + pad;
  f.y0 = 0;
  f.y1 = static_cast<double>(rows.size()) + 1;
  std::ostringstream s;
  s << svg_open(f, title);
  s << svg_axes(f, log_scale ? "odds ratio (log scale)" : "estimate", "", 4, 0, log_scale);
  double rx = f.px(tr(reference));
  s << "<line x1=\"" << fixed(rx, 1) << "\" y1=\"" << f.top << "\" x2=\"" << fixed(rx, 1) << "\" y2=\""
    << f.height - f.bottom << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double y = f.py(static_cast<double>(rows.size() - i));
    s << "<text x=\"" << f.left - 8 << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
      << xml_escape(r.label) << "</text>\n";
    double a = tr(r.low), b = tr(r.high), e = tr(r.estimate);
    if (std::isfinite(a) && std::isfinite(b))
      s << "<line x1=\"" << fixed(f.px(a), 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(f.px(b), 1)
        << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"black\"/>\n";
    if (std::isfinite(e))
      s << "<circle cx=\"" << fixed(f.px(e), 1) << "\" cy=\"" << fixed(y, 1) << "\" r=\"3.5\" fill=\"" << kPalette[0]
        << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_coherence(const TopicSummary& t) {
  Frame f;
  f.left = 60;
  double lo = 1e300, hi = -1e300;
  for (const auto& p : t.curve) {
    lo = std::min(lo, p.coherence);
    hi = std::max(hi, p.coherence);
  }
  for (double v : t.mean_coherence) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) lo = 0, hi = 1;
  double pad = (hi - lo) * 0.1 + 1e-6;
  f.y0 = lo - pad;
  f.y1 = hi + pad;
  f.x0 = t.ks.empty() ? 0 : t.ks.front() - 1;
  f.x1 = t.ks.empty() ? 1 : t.ks.back() + 1;
  std::ostringstream s;
  s << svg_open(f, "Topic coherence by K");
  s << svg_axes(f, "K", "C_V", 4, 4, false);
  for (const auto& p : t.curve)
    s << "<circle cx=\"" << fixed(f.px(p.k), 1) << "\" cy=\"" << fixed(f.py(p.coherence), 1)
      << "\" r=\"2.5\" fill=\"gray\"/>\n";
  if (!t.ks.empty()) {
    s << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" points=\"";
    for (std::size_t i = 0; i < t.ks.size() && i < t.mean_coherence.size(); ++i)
      s << fixed(f.px(t.ks[i]), 1) << ',' << fixed(f.py(t.mean_coherence[i]), 1) << ' ';
    s << "\"/>\n";
  }
  s << "<line x1=\"" << fixed(f.px(t.k), 1) << "\" y1=\"" << f.top << "\" x2=\"" << fixed(f.px(t.k), 1)
    << "\" y2=\"" << f.height - f.bottom << "\" stroke=\"" << kPalette[1] << "\" stroke-dasharray=\"4 3\"/>\n";
  s << "</svg>\n";
  return s.str();
}

std::string svg_sweep(const SweepResult& sweep) {
  Frame f;
  f.left = 60;
  f.right = 110;
  f.x0 = 0;
  f.x1 = 1;
  f.y0 = 0;
  f.y1 = 1;
  for (const auto& r : sweep.rows) f.x1 = std::max(f.x1, r.f);
  std::ostringstream s;
  s << svg_open(f, "Detectability of release events");
  s << svg_axes(f, "fraction of event messages per positive step (f)", "PR AUC (mean of both classes)", 5, 5,
                false);
  double band0 = kReferenceThreshold - kReferenceBand, band1 = kReferenceThreshold + kReferenceBand;
  s << "<rect x=\"" << fixed(f.px(band0), 1) << "\" y=\"" << f.top << "\" width=\""
    << fixed(f.px(band1) - f.px(band0), 1) << "\" height=\"" << f.height - f.top - f.bottom
    << "\" fill=\"#eeeeee\"/>\n";
  std::vector<std::string> names;
  for (const auto& r : sweep.rows)
    if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
  std::map<std::string, int> offset;
  for (std::size_t i = 0; i < names.size(); ++i) offset[names[i]] = static_cast<int>(i);
  double jitter = 0.006;
  for (const auto& r : sweep.rows) {
    if (r.failed) continue;
    int o = offset[r.estimator];
    double x = r.f + (o - (static_cast<double>(names.size()) - 1) / 2.0) * jitter;
    bool sig = r.p_value <= sweep.alpha;
    s << "<circle cx=\"" << fixed(f.px(x), 1) << "\" cy=\"" << fixed(f.py(std::clamp(r.metric, 0.0, 1.0)), 1)
      << "\" r=\"3\" fill=\"" << (sig ? kPalette[o % 5] : "none") << "\" stroke=\"" << kPalette[o % 5] << "\"/>\n";
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    double y = f.top + 15 + 18.0 * i;
    s << "<circle cx=\"" << f.width - f.right + 15 << "\" cy=\"" << y << "\" r=\"4\" fill=\"" << kPalette[i % 5]
      << "\"/>\n";
    s << "<text x=\"" << f.width - f.right + 25 << "\" y=\"" << y + 4 << "\">" << xml_escape(names[i])
      << "</text>\n";
  }
  s << "<text x=\"" << f.width - f.right + 10 << "\" y=\"" << f.top + 30 + 18.0 * names.size()
    << "\" font-size=\"9\">filled: p &lt;= " << fixed(sweep.alpha, 2) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

OJson sweep_to_json(const SweepResult& sweep, const SyntheticConfig& c, const std::optional<SimilarityReport>& sim) {
  OJson out;
  out["schema_version"] = 1;
  out["alpha"] = sweep.alpha;
  out["generator"] = {{"background_vocab_size", c.background_vocab_size},
                      {"n_background_topics", c.n_background_topics},
                      {"topic_word_concentration", c.topic_word_concentration},
                      {"doc_topic_concentration", c.doc_topic_concentration},
                      {"min_length", c.min_length},
                      {"max_length", c.max_length},
                      {"sentiment_rate", c.sentiment_rate},
                      {"active_phrases", c.active_phrases},
                      {"phrases_per_message", c.phrases_per_message},
                      {"f_grid", c.f_grid},
                      {"n_steps", c.n_steps},
                      {"messages_per_step", c.messages_per_step},
                      {"positive_ratio", c.positive_ratio},
                      {"n_instances", c.n_instances},
                      {"seed", c.seed}};
  OJson summary = OJson::array();
  for (const auto& s : sweep.summary)
    summary.push_back({{"estimator", s.estimator},
                       {"f", s.f},
                       {"worst_p", num(s.worst_p)},
                       {"mean_metric", num(s.mean_metric)},
                       {"ci_low", num(s.ci_low)},
                       {"ci_high", num(s.ci_high)},
                       {"n_ok", s.n_ok},
                       {"n_failed", s.n_failed}});
  out["summary"] = summary;
  OJson th;
  for (const auto& [k, v] : sweep.threshold) th[k] = v ? OJson(*v) : OJson(nullptr);
  out["threshold"] = th;
  OJson rho;
  for (const auto& [k, v] : sweep.spearman) rho[k] = num(v);
  out["spearman"] = rho;
  out["reference_threshold"] = {{"value", kReferenceThreshold}, {"band", kReferenceBand}};
  if (sim)
    out["similarity"] = {{"novelty_mean", sim->novelty_mean},     {"novelty_sd", sim->novelty_sd},
                         {"diversity_a_mean", sim->diversity_a_mean}, {"diversity_a_sd", sim->diversity_a_sd},
                         {"diversity_b_mean", sim->diversity_b_mean}, {"diversity_b_sd", sim->diversity_b_sd},
                         {"kl_divergence", sim->kl_divergence},   {"sample_size", sim->sample_size},
                         {"repeats", sim->repeats},               {"with_replacement", sim->with_replacement}};
  OJson failures = OJson::array();
  for (const auto& r : sweep.rows)
    if (r.failed)
      failures.push_back({{"estimator", r.estimator}, {"f", r.f}, {"instance", r.instance}, {"error", r.error}});
  out["failed_cells"] = failures;
  return out;
}

std::string render_sweep_markdown(const SweepResult& sweep, const SyntheticConfig& c,
                                  const std::optional<SimilarityReport>& sim) {
  std::ostringstream s;
  s << "# Detectability sweep\n\n";
  s << "- instances per f: " << c.n_instances << ", steps: " << c.n_steps << ", messages per step: "
    << c.messages_per_step << ", positive ratio: " << fixed(c.positive_ratio, 2) << "\n";
  s << "- active phrases: " << c.active_phrases << ", phrases per event message: " << c.phrases_per_message << "\n";
  s << "- alpha: " << fixed(sweep.alpha, 3) << " (criterion: worst p over all instances)\n\n";
  s << "| Estimator | f | worst p | mean PRAUC | 95% CI | ok | failed |\n";
  s << "|---|---:|---:|---:|---|---:|---:|\n";
  for (const auto& r : sweep.summary)
    s << "| " << r.estimator << " | " << fixed(r.f, 2) << " | " << pfmt(r.worst_p) << " | "
      << fixed(r.mean_metric, 3) << " | [" << fixed(r.ci_low, 3) << ", " << fixed(r.ci_high, 3) << "] | " << r.n_ok
      << " | " << r.n_failed << " |\n";
  s << "\n| Estimator | threshold f | Spearman rho(f, PRAUC) |\n|---|---:|---:|\n";
  for (const auto& [name, th] : sweep.threshold) {
    auto it = sweep.spearman.find(name);
    s << "| " << name << " | " << (th ? fixed(*th, 2) : std::string("not reached")) << " | "
      << (it == sweep.spearman.end() ? std::string("NA") : fixed(it->second, 3)) << " |\n";
  }
  s << "\nReference threshold for comparison: f = " << fixed(kReferenceThreshold, 2) << " +/- "
    << fixed(kReferenceBand, 2) << ".\n\n";
  if (sim) {
    s << "## Synthetic vs. real messages\n\n";
    s << "| Measure | Mean | SD |\n|---|---:|---:|\n";
    s << "| Novelty (real to synthetic) | " << fixed(sim->novelty_mean, 4) << " | " << fixed(sim->novelty_sd, 4)
      << " |\n";
    s << "| Diversity (synthetic) | " << fixed(sim->diversity_a_mean, 4) << " | " << fixed(sim->diversity_a_sd, 4)
      << " |\n";
    s << "| Diversity (real) | " << fixed(sim->diversity_b_mean, 4) << " | " << fixed(sim->diversity_b_sd, 4)
      << " |\n";
    s << "\nKL divergence between within-corpus distance histograms: " << fixed(sim->kl_divergence, 4)
      << " (sample " << sim->sample_size << " x " << sim->repeats << " repeats"
      << (sim->with_replacement ? ", drawn with replacement" : "") << ").\n\n";
  }
  std::size_t failed = 0;
  for (const auto& r : sweep.rows) failed += r.failed;
  if (failed) s << failed << " cell(s) failed and are listed in sweep.json.\n";
  return s.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, const std::vector<std::string>& formats,
                                               const std::filesystem::path& dir,
                                               const std::optional<OJson>& run_info) {
  validate_formats(formats);
  std::set<std::string> want(formats.begin(), formats.end());
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    auto p = dir / name;
    write_file(p, content);
    written.push_back(p);
  };
  if (want.count("json")) put("report.json", report_to_json(report, run_info).dump(2) + "\n");
  if (want.count("markdown")) put("report.md", render_markdown(report));
  if (want.count("svg")) {
    auto stamp = [&](std::string svg) {
      auto pos = svg.find('>');
      return svg.insert(pos + 2, "<!-- config " + report.config_hash + " -->\n");
    };
    for (const auto& e : report.estimators) {
      if (!e.diagnostics) continue;
      std::vector<ForestRow> rows;
      for (const auto& c : e.diagnostics->coefficients)
        if (c.name != "(Intercept)") rows.push_back({c.name, c.odds_ratio, c.or_ci_low, c.or_ci_high});
      put("odds_ratios_" + e.name + ".svg", stamp(svg_forest("Odds ratios (" + e.name + ")", rows, 1.0, true)));
    }
    if (!report.effects.empty()) {
      std::vector<ForestRow> rows;
      for (const auto& e : report.effects) rows.push_back({e.feature, e.delta, e.ci_low, e.ci_high});
      put("effect_sizes.svg", stamp(svg_forest("Cliff's delta (events vs. controls)", rows, 0.0, false)));
    }
    if (report.topics && !report.topics->ks.empty()) put("coherence.svg", stamp(svg_coherence(*report.topics)));
  }
  return written;
}

}  // namespace microevent
