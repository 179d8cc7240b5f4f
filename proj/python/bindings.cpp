// Python module microevent._core.

#include <filesystem>
#include <fstream>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "microevent/config.hpp"
#include "microevent/error.hpp"
#include "microevent/logistic.hpp"
#include "microevent/report.hpp"
#include "microevent/runner.hpp"
#include "microevent/sentiment.hpp"
#include "microevent/stats.hpp"
#include "microevent/textprep.hpp"

namespace py = pybind11;
namespace me = microevent;
namespace fs = std::filesystem;

namespace {

// Config file (may be empty), then MICROEVENT_* variables, then the JSON
// object of overrides merged on top.
me::ExperimentConfig resolve(const std::string& path, const std::string& overrides) {
  me::Json raw = me::Json::object();
  fs::path base;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw me::InputError("missing input: config " + path);
    raw = me::Json::parse(in, nullptr, false);
    if (raw.is_discarded()) throw me::ConfigError("config " + path + ": not valid JSON");
    base = fs::path(path).parent_path();
  }
  raw = me::apply_env_overrides(std::move(raw), me::environment_with_prefix());
  if (!overrides.empty()) raw.merge_patch(me::Json::parse(overrides));
  return me::resolve_config(raw, base);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "microevent core";
  m.attr("__version__") = me::kVersion;

  // Translators are tried newest first, so the base class goes in first.
  auto error = py::register_exception<me::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<me::ConfigError>(m, "ConfigError", error);
  py::register_exception<me::InputError>(m, "InputError", error);
  auto fit = py::register_exception<me::FitError>(m, "FitError", error);
  py::register_exception<me::SeparationError>(m, "SeparationError", fit);

  m.def("resolved_config", [](const std::string& path, const std::string& overrides) {
    const auto c = resolve(path, overrides);
    return me::Json{{"hash", c.hash}, {"config", c.resolved}}.dump();
  });

  m.def("run_pipeline", [](const std::string& path, const std::string& overrides) {
    const auto c = resolve(path, overrides);
    me::ExperimentReport r;
    {
      py::gil_scoped_release release;
      r = me::run_pipeline(c);
    }
    return me::report_to_json(r).dump();
  });

  m.def("run_sweep", [](const std::string& path, const std::string& overrides) {
    const auto c = resolve(path, overrides);
    me::SweepRun run;
    {
      py::gil_scoped_release release;
      run = me::run_synth_sweep(c);
    }
    auto doc = me::sweep_to_json(run.result, c.sweep.synthetic, run.similarity);
    doc["config_hash"] = c.hash;
    return doc.dump();
  });

  m.def("render_markdown", [](const std::string& report_json) {
    return me::render_markdown(me::report_from_json(nlohmann::ordered_json::parse(report_json)));
  });

  m.def("cliffs_delta", [](const std::vector<double>& a, const std::vector<double>& b, double alpha, int m) {
    const auto e = me::cliffs_delta(a, b, alpha, m);
    return py::dict(py::arg("delta") = e.delta, py::arg("variance") = e.variance, py::arg("ci_low") = e.ci_low,
                    py::arg("ci_high") = e.ci_high);
  }, py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05, py::arg("m_corrections") = 1);

  m.def("holm_bonferroni", [](const std::vector<double>& p, double alpha) {
    const auto h = me::holm_bonferroni(p, alpha);
    return py::make_tuple(h.significant, h.thresholds);
  }, py::arg("p_values"), py::arg("alpha") = 0.05);

  m.def("pr_auc", &me::pr_auc, py::arg("y"), py::arg("scores"), py::arg("positive_label") = 1);
  m.def("pr_auc_mean", &me::pr_auc_mean, py::arg("y"), py::arg("scores"));
  m.def("roc_auc", &me::roc_auc, py::arg("y"), py::arg("scores"));

  m.def("permutation_test", [](const Eigen::VectorXd& y, const Eigen::VectorXd& s, int n_perm, std::uint64_t seed) {
    const auto r = me::permutation_test(y, s, me::pr_auc_mean, n_perm, seed);
    return py::make_tuple(r.observed, r.p_value);
  }, py::arg("y"), py::arg("scores"), py::arg("n_perm") = 1000, py::arg("seed") = 1);

  m.def("fit_logistic", [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto fit = me::fit_logistic(X, y);
    return py::dict(py::arg("beta") = fit.beta, py::arg("se") = fit.se,
                    py::arg("log_likelihood") = fit.log_likelihood, py::arg("iterations") = fit.iterations,
                    py::arg("converged") = fit.converged, py::arg("ll_trace") = fit.ll_trace);
  }, py::arg("X"), py::arg("y"));

  m.def("clean_tokens", [](const std::string& body) {
    return me::tokenize_normalize(me::strip_markup(body), me::default_stopwords());
  }, py::arg("body"));

  m.def("sentiment", [](const std::string& text) {
    const auto s = me::score_sentiment(text, me::SentimentLexicon::builtin());
    return py::dict(py::arg("negative") = s.negative, py::arg("neutral") = s.neutral,
                    py::arg("positive") = s.positive, py::arg("compound") = s.compound);
  }, py::arg("text"));
}
