#include "microevent/runner.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "microevent/corpus.hpp"
#include "microevent/features.hpp"
#include "microevent/pipeline.hpp"
#include "microevent/rng.hpp"
#include "microevent/strings.hpp"
#include "microevent/textprep.hpp"
#include "microevent/timegrid.hpp"
#include "microevent/topics.hpp"

namespace microevent {

using OJson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string family_of(const ExperimentConfig& c) {
  if (!c.dataset.family.empty()) return c.dataset.family;
  return c.dataset.packages.size() == 1 ? c.dataset.packages.front() : "multiple";
}

PipelineParams pipeline_params(const ExperimentConfig& c) {
  PipelineParams p = c.pipeline;
  if (c.inputs.stopwords) {
    std::ifstream in(*c.inputs.stopwords);
    if (!in) throw InputError("missing input: stopwords " + c.inputs.stopwords->string());
    p.text.stopwords = read_stopwords(in);
  }
  if (c.inputs.sentiment_lexicon) {
    std::ifstream in(*c.inputs.sentiment_lexicon);
    if (!in) throw InputError("missing input: sentiment_lexicon " + c.inputs.sentiment_lexicon->string());
    p.lexicon = SentimentLexicon::read_tsv(in);
  }
  return p;
}

std::vector<Message> read_messages(const RunDirectory& dir) {
  std::istringstream in(dir.read("ingest/messages.jsonl"));
  return import_messages(in, DumpFormat::canonical_jsonl).messages;
}

struct LoadedDataset {
  std::vector<Message> messages;
  StepDataset dataset;
};

LoadedDataset read_dataset(const ExperimentConfig& c, const RunDirectory& dir) {
  LoadedDataset out;
  out.messages = read_messages(dir);
  std::istringstream csv(dir.read("timesteps/steps.csv")), side(dir.read("timesteps/steps_messages.json"));
  auto steps = read_steps(csv, side);
  const auto meta = OJson::parse(dir.read("timesteps/dataset.json"));
  const auto split = parse_iso8601(meta.at("split_instant").get<std::string>());
  if (!split) throw InputError("timesteps/dataset.json: bad split_instant");
  out.dataset = assemble_dataset(std::move(steps), *split, meta.at("name").get<std::string>(), c.dataset.design,
                                 c.dataset.event_kind);
  return out;
}

FeatureMatrix read_features(const RunDirectory& dir) {
  std::istringstream in(dir.read("features/features.csv"));
  return read_feature_csv(in);
}

void save_state(RunDirectory& dir, const ExperimentReport& r) {
  dir.write("report_state.json", report_to_json(r).dump(2) + "\n");
}

std::string model_dir(const std::string& name) { return "models/" + name + "/"; }

OJson outcome_json(const EstimatorOutcome& o, const std::string& hash) {
  OJson curve = OJson::array();
  for (const auto& p : o.selection.curve) {
    curve.push_back({{"n_features", p.n_features},
                     {"metric", std::isfinite(p.metric) ? OJson(p.metric) : OJson(nullptr)},
                     {"folds_used", p.folds_used}});
  }
  return OJson{{"config_hash", hash},
               {"estimator", o.estimator},
               {"failed", o.failed},
               {"failed_stage", o.failed_stage},
               {"error", o.error},
               {"dropped_constant", o.dropped_constant},
               {"selected", o.selection.selected},
               {"chosen_size", o.selection.chosen_size},
               {"selection_curve", curve},
               {"selection_warnings", o.selection.warnings},
               {"warnings", o.warnings},
               {"tuned_params", o.tuned_params}};
}

EstimatorOutcome load_outcome(const RunDirectory& dir, const std::string& name) {
  const auto j = OJson::parse(dir.read(model_dir(name) + "outcome.json"));
  EstimatorOutcome o;
  o.estimator = name;
  o.failed = j.at("failed").get<bool>();
  o.failed_stage = j.at("failed_stage").get<std::string>();
  o.error = j.at("error").get<std::string>();
  o.dropped_constant = j.at("dropped_constant").get<std::vector<std::string>>();
  o.selection.selected = j.at("selected").get<std::vector<std::string>>();
  o.selection.chosen_size = j.at("chosen_size").get<std::size_t>();
  for (const auto& p : j.at("selection_curve")) {
    CurvePoint c;
    c.n_features = p.at("n_features").get<std::size_t>();
    c.metric = p.at("metric").is_null() ? -std::numeric_limits<double>::infinity() : p["metric"].get<double>();
    c.folds_used = p.at("folds_used").get<int>();
    o.selection.curve.push_back(c);
  }
  o.selection.warnings = j.at("selection_warnings").get<std::vector<std::string>>();
  o.warnings = j.at("warnings").get<std::vector<std::string>>();
  o.tuned_params = j.at("tuned_params").get<std::map<std::string, std::string>>();
  if (!o.failed) {
    o.model = deserialize_model(dir.read(model_dir(name) + "model.json"));
    std::istringstream in(dir.read(model_dir(name) + "test_scores.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto f = parse_csv_line(line);
      if (f.size() != 3) throw InputError(model_dir(name) + "test_scores.csv: expected step_id,label,score");
      o.test_scores.push_back(std::stod(f[2]));
    }
  }
  return o;
}

EstimatorSummary* find_summary(ExperimentReport& r, const std::string& name) {
  for (auto& e : r.estimators)
    if (e.name == name) return &e;
  r.estimators.push_back({});
  r.estimators.back().name = name;
  return &r.estimators.back();
}

template <typename F>
void as_stage(const std::string& name, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string iso_now() {
  return format_iso8601(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

}  // namespace

StageError::StageError(std::string stage, const std::string& cause)
    : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

RunDirectory::RunDirectory(fs::path root, std::string config_hash) : root_(std::move(root)), hash_(std::move(config_hash)) {
  fs::create_directories(root_);
  lock_ = root_ / ".lock";
  std::FILE* f = std::fopen(lock_.c_str(), "wx");
  if (!f) {
    throw Error("output directory " + root_.string() + " is in use by another run (delete " + lock_.string() +
                " if that run is gone)");
  }
  std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
  std::fclose(f);
  const fs::path manifest = root_ / "manifest.json";
  if (fs::exists(manifest)) {
    auto doc = OJson::parse(slurp(manifest), nullptr, false);
    const std::string prior = doc.is_object() ? doc.value("config_hash", std::string()) : std::string();
    if (prior != hash_) {
      fs::remove(lock_);
      throw ConfigError("config hash mismatch: " + root_.string() + " holds artifacts of config " +
                        (prior.empty() ? std::string("(unreadable manifest)") : prior) + ", current config is " +
                        hash_ + "; use another output directory");
    }
    manifest_ = std::move(doc);
  } else {
    manifest_ = OJson{{"config_hash", hash_}, {"version", kVersion}, {"stages", OJson::array()},
                      {"files", OJson::object()}};
    save_manifest();
  }
}

RunDirectory::~RunDirectory() {
  std::error_code ec;
  fs::remove(lock_, ec);
}

fs::path RunDirectory::stage_dir(const std::string& stage) const {
  auto p = root_ / stage;
  fs::create_directories(p);
  return p;
}

void RunDirectory::write(const fs::path& relative, const std::string& content) {
  const auto path = root_ / relative;
  fs::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("write failed: " + path.string());
  }
  manifest_["files"][relative.generic_string()] = hex16(fnv1a64(content));
  save_manifest();
}

std::string RunDirectory::read(const fs::path& relative) const {
  const auto path = root_ / relative;
  if (!fs::exists(path)) {
    throw InputError("missing artifact: " + relative.generic_string() + " (run the stage that produces it first)");
  }
  return slurp(path);
}

bool RunDirectory::exists(const fs::path& relative) const { return fs::exists(root_ / relative); }

void RunDirectory::complete(const std::string& stage) {
  auto& stages = manifest_["stages"];
  if (std::find(stages.begin(), stages.end(), stage) == stages.end()) stages.push_back(stage);
  save_manifest();
}

void RunDirectory::save_manifest() {
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  out << manifest_.dump(2) << "\n";
}

void check_inputs(const ExperimentConfig& c) {
  if (!c.inputs.messages) throw InputError("missing input: messages (inputs.messages is not set)");
  if (!fs::exists(*c.inputs.messages)) throw InputError("missing input: messages " + c.inputs.messages->string());
  if (!c.inputs.events) throw InputError("missing input: events (inputs.events is not set)");
  if (!fs::exists(*c.inputs.events)) throw InputError("missing input: events " + c.inputs.events->string());
  if (c.dataset.packages.empty()) throw ConfigError("config $.dataset.packages: at least one package is required");
}

ExperimentReport load_report_state(const RunDirectory& dir) {
  if (!dir.exists("report_state.json")) throw InputError("missing artifact: report_state.json");
  return report_from_json(OJson::parse(dir.read("report_state.json")));
}

void stage_ingest(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  check_inputs(c);
  std::ifstream in(*c.inputs.messages, std::ios::binary);
  const auto imported = import_messages(in, c.inputs.format);
  const auto by_package = filter_by_packages(imported.messages, c.dataset.packages);
  const auto corpus = union_corpus(by_package);
  if (corpus.empty()) throw InputError("no message mentions the configured packages");
  std::ostringstream msgs;
  write_messages_jsonl(msgs, corpus);
  dir.write("ingest/messages.jsonl", msgs.str());

  std::ifstream ev(*c.inputs.events);
  auto events = load_release_history(ev);
  std::erase_if(events, [&](const ReleaseEvent& e) {
    return std::find(c.dataset.packages.begin(), c.dataset.packages.end(), e.package) == c.dataset.packages.end();
  });
  std::ostringstream evs;
  write_events_csv(evs, events);
  dir.write("ingest/events.csv", evs.str());

  OJson counts = OJson::object();
  for (const auto& [p, list] : by_package) counts[p] = list.size();
  OJson kinds = {{"major", 0}, {"minor", 0}, {"patch", 0}};
  for (const auto& e : events) kinds[to_string(e.kind)] = kinds[to_string(e.kind)].get<int>() + 1;
  OJson errors = OJson::array();
  for (std::size_t i = 0; i < imported.errors.size() && i < 20; ++i) errors.push_back(imported.errors[i]);
  OJson summary = {{"config_hash", dir.config_hash()}, {"rows", imported.rows},   {"skipped", imported.skipped},
                   {"first_errors", errors},           {"per_package", counts}, {"union", corpus.size()},
                   {"events", kinds}};
  dir.write("ingest/ingest.json", summary.dump(2) + "\n");

  ExperimentReport r;
  r.config_hash = dir.config_hash();
  r.seed = c.seed;
  r.config = c.resolved;
  r.family = family_of(c);
  r.alpha = c.pipeline.models.alpha;
  save_state(dir, r);
  dir.complete("ingest");
  say(log, "ingest: " + std::to_string(imported.rows) + " rows, " + std::to_string(corpus.size()) +
               " messages kept, " + std::to_string(events.size()) + " classified releases");
}

void stage_timesteps(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  auto messages = read_messages(dir);
  std::istringstream ev(dir.read("ingest/events.csv"));
  const auto events = read_events_csv(ev);
  const auto split = chronological_split(messages, c.dataset.train_fraction);
  auto steps = c.dataset.design == StepDesign::calendar_week
                   ? build_calendar_week_steps(messages, events, c.dataset.event_kind)
                   : build_event_based_steps(messages, events, c.dataset.event_kind);
  std::ostringstream csv, side;
  write_steps(steps, csv, side);
  dir.write("timesteps/steps.csv", csv.str());
  dir.write("timesteps/steps_messages.json", side.str());

  const std::string name = dataset_name(c.dataset.packages, c.dataset.event_kind, c.dataset.design);
  const auto ds = assemble_dataset(std::move(steps), split.split_instant, name, c.dataset.design, c.dataset.event_kind);
  auto ids = [](const std::vector<TimeStep>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.id);
    return out;
  };
  auto events_in = [](const std::vector<TimeStep>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const TimeStep& s) { return s.is_event(); }));
  };
  OJson meta = {{"config_hash", dir.config_hash()},
                {"name", name},
                {"split_instant", format_iso8601(split.split_instant)},
                {"train", ids(ds.train)},
                {"test", ids(ds.test)},
                {"dropped_straddling", ds.dropped_straddling},
                {"dropped_empty", ds.dropped_empty}};
  dir.write("timesteps/dataset.json", meta.dump(2) + "\n");

  auto r = load_report_state(dir);
  r.dataset.name = name;
  r.dataset.design = to_string(c.dataset.design);
  r.dataset.event_kind = to_string(c.dataset.event_kind);
  r.dataset.packages = c.dataset.packages;
  r.dataset.n_messages = messages.size();
  r.dataset.split_instant = format_iso8601(split.split_instant);
  r.dataset.train_steps = ds.train.size();
  r.dataset.test_steps = ds.test.size();
  r.dataset.train_events = events_in(ds.train);
  r.dataset.test_events = events_in(ds.test);
  r.dataset.dropped_straddling = ds.dropped_straddling;
  r.dataset.dropped_empty = ds.dropped_empty;
  save_state(dir, r);
  dir.complete("timesteps");
  say(log, "timesteps: " + name + ", " + std::to_string(ds.train.size()) + " train / " +
               std::to_string(ds.test.size()) + " test steps");
}

void stage_features(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  const auto params = pipeline_params(c);
  const auto loaded = read_dataset(c, dir);
  std::string sub = "text";
  try {
    const auto text = prepare_text(loaded.messages, loaded.dataset.split_instant, params.text, params.jobs);
    std::ostringstream vocab;
    text.vocabulary.write_tsv(vocab);
    dir.write("features/vocabulary.tsv", vocab.str());
    say(log, "text: " + std::to_string(text.vocabulary.size()) + " vocabulary terms");

    sub = "topics";
    const auto topics = fit_topics(text, params.topics, derive_seed(c.seed, "topics"), params.jobs);
    std::ostringstream header, counts;
    write_topic_model(topics.model, header, counts);
    dir.write("features/topic_model.json", header.str());
    dir.write("features/topic_counts.csv", counts.str());
    TopicSummary ts;
    ts.k = topics.model.K();
    if (topics.selection) {
      std::ostringstream curve;
      write_coherence_curve_csv(curve, topics.selection->curve);
      dir.write("features/coherence_curve.csv", curve.str());
      ts.selected_by_elbow = true;
      ts.no_elbow = topics.selection->no_elbow;
      ts.ks = topics.selection->ks;
      ts.mean_coherence = topics.selection->mean_coherence;
      ts.curve = topics.selection->curve;
    }
    ts.coherence = topics.coherence.mean;
    ts.per_topic_coherence = topics.coherence.per_topic;
    for (int k = 0; k < ts.k; ++k) {
      std::vector<std::string> words;
      for (const auto& [w, p] : top_words(topics.model, k, params.topics.top_n)) words.push_back(w);
      ts.top_words.push_back(std::move(words));
    }
    say(log, "topics: K = " + std::to_string(ts.k));

    sub = "sentiment";
    const auto vectors = message_vectors(text, topics, params.lexicon, params.jobs);

    sub = "features";
    const auto fm = build_feature_matrix(loaded.dataset, vectors, feature_columns(ts.k));
    std::ostringstream out;
    write_feature_csv(out, fm);
    dir.write("features/features.csv", out.str());

    auto r = load_report_state(dir);
    r.topics = ts;
    r.feature_columns = fm.columns;
    save_state(dir, r);
  } catch (const std::exception& e) {
    throw StageError(sub, e.what());
  }
  dir.complete("features");
}

void stage_train(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  const auto fm = read_features(dir);
  const auto& mp = c.pipeline.models;
  const auto test = fm.partition(Partition::test);
  auto r = load_report_state(dir);
  r.estimators.clear();
  for (const auto& name : mp.estimators) {
    say(log, "train: " + name);
    const auto o = train_estimator(name, fm, mp, derive_seed(c.seed, "models"), c.jobs);
    const std::string base = model_dir(name);
    dir.write(base + "outcome.json", outcome_json(o, dir.config_hash()).dump(2) + "\n");
    std::ostringstream curve;
    write_selection_curve_csv(curve, o.selection);
    dir.write(base + "selection_curve.csv", curve.str());
    if (o.grid) {
      std::ostringstream grid;
      write_grid_csv(grid, *o.grid);
      dir.write(base + "grid.csv", grid.str());
    }
    if (o.model) dir.write(base + "model.json", serialize_model(*o.model));
    if (!o.failed) {
      std::ostringstream scores;
      scores << "step_id,label,score\n";
      for (std::size_t i = 0; i < o.test_scores.size(); ++i)
        scores << csv_escape(test.row_ids[i]) << ',' << test.labels[i] << ',' << format_double(o.test_scores[i])
               << '\n';
      dir.write(base + "test_scores.csv", scores.str());
    }
    EstimatorSummary e;
    e.name = name;
    e.failed = o.failed;
    e.failed_stage = o.failed_stage;
    e.error = o.error;
    e.dropped_constant = o.dropped_constant;
    e.selected = o.selection.selected;
    e.curve = o.selection.curve;
    e.tuned_params = o.tuned_params;
    e.warnings = o.selection.warnings;
    e.warnings.insert(e.warnings.end(), o.warnings.begin(), o.warnings.end());
    r.estimators.push_back(std::move(e));
    if (o.failed) say(log, "train: " + name + " failed during " + o.failed_stage + ": " + o.error);
  }
  save_state(dir, r);
  dir.complete("train");
}

void stage_evaluate(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  const auto fm = read_features(dir);
  const auto& mp = c.pipeline.models;
  const Eigen::VectorXd y_test = fm.partition(Partition::test).label_vector();
  auto r = load_report_state(dir);
  std::vector<EstimatorOutcome> outcomes;
  std::vector<double> p;
  for (const auto& name : mp.estimators) {
    auto o = load_outcome(dir, name);
    evaluate_estimator(o, y_test, mp, derive_seed(c.seed, "models"), c.jobs);
    p.push_back(o.failed ? 1.0 : o.permutation.p_value);
    outcomes.push_back(std::move(o));
  }
  const auto holm = holm_bonferroni(p, mp.alpha);
  OJson rows = OJson::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    auto* e = find_summary(r, o.estimator);
    e->failed = o.failed;
    e->failed_stage = o.failed_stage;
    e->error = o.error;
    e->metrics = o.test_metrics;
    e->p_value = o.failed ? 1.0 : o.permutation.p_value;
    e->n_permutations = o.permutation.n_perm;
    e->holm_threshold = holm.thresholds[i];
    e->holm_significant = holm.significant[i];
    OJson row = {{"estimator", o.estimator}, {"failed", o.failed}};
    if (!o.failed) {
      row["pr_auc_mean"] = o.test_metrics.pr_auc_mean;
      row["f1_mean"] = o.test_metrics.f1_mean;
      row["roc_auc"] = o.test_metrics.roc_auc;
      row["observed"] = o.permutation.observed;
      row["p_value"] = o.permutation.p_value;
      row["n_permutations"] = o.permutation.n_perm;
    }
    row["holm_threshold"] = holm.thresholds[i];
    row["holm_significant"] = static_cast<bool>(holm.significant[i]);
    rows.push_back(row);
    if (!o.failed) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "evaluate: %s PRAUC %.3f p %.4f%s", o.estimator.c_str(),
                    o.test_metrics.pr_auc_mean, o.permutation.p_value, holm.significant[i] ? " *" : "");
      say(log, buf);
    }
  }
  OJson doc = {{"config_hash", dir.config_hash()},
               {"family", r.family},
               {"alpha", mp.alpha},
               {"estimators", rows}};
  dir.write("models/evaluation.json", doc.dump(2) + "\n");
  save_state(dir, r);
  dir.complete("evaluate");
}

void stage_diagnose(const ExperimentConfig& c, RunDirectory& dir, const Logger& log) {
  const auto fm = read_features(dir);
  const auto& mp = c.pipeline.models;
  auto r = load_report_state(dir);
  OJson rows = OJson::array();
  for (const auto& name : mp.estimators) {
    auto o = load_outcome(dir, name);
    auto* e = find_summary(r, name);
    if (e->failed) continue;
    const std::size_t n_warn = o.warnings.size();
    diagnose_estimator(o, fm, mp, derive_seed(c.seed, "models"));
    e->diagnostics = o.diagnostics;
    e->diagnostics_error = o.diagnostics_error;
    e->importance = o.importance;
    e->warnings.insert(e->warnings.end(), o.warnings.begin() + static_cast<std::ptrdiff_t>(n_warn), o.warnings.end());
    rows.push_back({{"estimator", name},
                    {"has_diagnostics", o.diagnostics.has_value()},
                    {"diagnostics_error", o.diagnostics_error}});
  }
  r.effects = effect_sizes(fm.partition(Partition::train), mp.alpha);
  save_state(dir, r);
  OJson doc = {{"config_hash", dir.config_hash()}, {"estimators", rows}};
  dir.write("models/diagnostics.json", doc.dump(2) + "\n");
  dir.complete("diagnose");
  say(log, "diagnose: " + std::to_string(r.effects.size()) + " effect sizes");
}

std::vector<fs::path> stage_report(const ExperimentConfig& c, RunDirectory& dir, const std::optional<OJson>& run_info,
                                   const Logger& log) {
  validate_formats(c.formats);
  auto r = load_report_state(dir);
  const auto& mp = c.pipeline.models;
  char buf[256];
  r.notes.clear();
  std::snprintf(buf, sizeof buf,
                "P.test: permutation test of mean PR AUC with %d label permutations against the frozen test scores "
                "(the model is not refit).",
                mp.n_permutations);
  r.notes.push_back(buf);
  r.notes.push_back("Holm-Bonferroni correction runs over the estimators of family " + r.family + ".");
  r.notes.push_back(
      "LR inputs are capped at the Tukey fences of the train rows before standardization; tree inputs are "
      "standardized only.");
  r.notes.push_back("Odds-ratio and effect-size intervals are Bonferroni-widened over the number of features.");
  r.notes.push_back(
      "Outlier check: largest absolute studentized residual with a Bonferroni-adjusted normal p-value.");
  const auto written = emit_report(r, c.formats, dir.root() / "report", run_info);
  std::vector<fs::path> rel;
  for (const auto& p : written) {
    const auto relative = fs::relative(p, dir.root());
    dir.write(relative, slurp(p));
    rel.push_back(p);
  }
  save_state(dir, r);
  dir.complete("report");
  say(log, "report: " + std::to_string(written.size()) + " file(s) in " + (dir.root() / "report").string());
  return rel;
}

ExperimentReport run_pipeline(const ExperimentConfig& c, const Logger& log) {
  check_inputs(c);
  validate_formats(c.formats);
  RunDirectory dir(c.output_dir, c.hash);
  dir.write("config.resolved.json",
            OJson{{"config_hash", c.hash}, {"config", OJson::parse(c.resolved.dump())}}.dump(2) + "\n");
  const auto started = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  OJson timings = OJson::object();
  auto timed = [&](const std::string& name, auto&& fn) {
    const auto s = std::chrono::steady_clock::now();
    as_stage(name, fn);
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
  };
  timed("ingest", [&] { stage_ingest(c, dir, log); });
  timed("timesteps", [&] { stage_timesteps(c, dir, log); });
  timed("features", [&] { stage_features(c, dir, log); });
  timed("train", [&] { stage_train(c, dir, log); });
  timed("evaluate", [&] { stage_evaluate(c, dir, log); });
  timed("diagnose", [&] { stage_diagnose(c, dir, log); });
  OJson info = {{"started_at", started},
                {"elapsed_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                {"stage_seconds", timings}};
  as_stage("report", [&] { stage_report(c, dir, info, log); });
  return load_report_state(dir);
}

SweepRun run_synth_sweep(const ExperimentConfig& c, const Logger& log) {
  validate_formats(c.formats);
  const auto params = pipeline_params(c);
  RunDirectory dir(c.output_dir, c.hash);
  dir.write("config.resolved.json",
            OJson{{"config_hash", c.hash}, {"config", OJson::parse(c.resolved.dump())}}.dump(2) + "\n");
  const auto& sc = c.sweep.synthetic;
  say(log, "sweep: " + std::to_string(sc.f_grid.size()) + " f values x " + std::to_string(sc.n_instances) +
               " instances x " + std::to_string(params.models.estimators.size()) + " estimators");
  SweepRun run;
  const auto evaluator = make_cell_evaluator(params);
  CellEvaluator logged = [&](const SyntheticBag& bag, std::uint64_t seed) {
    auto out = evaluator(bag, seed);
    std::string line = "sweep cell " + bag.dataset.name + ":";
    for (const auto& o : out) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " %s %.3f (p %.3f)%s", o.estimator.c_str(), o.metric, o.p_value,
                    o.failed ? " failed" : "");
      line += buf;
    }
    say(log, line);
    return out;
  };
  run.result = detectability_sweep(sc, params.models.estimators, logged, c.sweep.alpha, c.jobs);

  if (c.inputs.messages && fs::exists(*c.inputs.messages)) {
    std::ifstream in(*c.inputs.messages, std::ios::binary);
    auto real = import_messages(in, c.inputs.format).messages;
    if (!c.dataset.packages.empty()) real = union_corpus(filter_by_packages(real, c.dataset.packages));
    const SyntheticGenerator generator(sc, SeedLexicon::builtin());
    const double f = *std::max_element(sc.f_grid.begin(), sc.f_grid.end());
    const auto bag = make_instance(generator, f, derive_seed(c.seed, "instance", 0));
    std::vector<std::set<std::string>> a, b;
    for (const auto& m : bag.messages) a.push_back(token_set(m.body_raw));
    for (const auto& m : real) b.push_back(token_set(strip_markup(m.body_raw)));
    if (!a.empty() && !b.empty()) {
      run.similarity = novelty_diversity(a, b, c.sweep.novelty_sample_size, c.sweep.novelty_repeats,
                                         derive_seed(c.seed, "similarity"));
    }
  }

  std::ostringstream rows, summary;
  write_sweep_csv(rows, run.result);
  write_sweep_summary_csv(summary, run.result);
  dir.write("sweep/sweep.csv", rows.str());
  dir.write("sweep/sweep_summary.csv", summary.str());
  run.files = {dir.root() / "sweep/sweep.csv", dir.root() / "sweep/sweep_summary.csv"};
  OJson doc = sweep_to_json(run.result, sc, run.similarity);
  doc["config_hash"] = c.hash;
  doc["config"] = OJson::parse(c.resolved.dump());
  dir.write("sweep/sweep.json", doc.dump(2) + "\n");
  run.files.push_back(dir.root() / "sweep/sweep.json");
  const bool md = std::find(c.formats.begin(), c.formats.end(), "markdown") != c.formats.end();
  const bool svg = std::find(c.formats.begin(), c.formats.end(), "svg") != c.formats.end();
  if (md) {
    dir.write("sweep/sweep.md", render_sweep_markdown(run.result, sc, run.similarity) + "\nConfig hash: `" + c.hash +
                                    "`\n");
    run.files.push_back(dir.root() / "sweep/sweep.md");
  }
  if (svg) {
    std::string s = svg_sweep(run.result);
    s.insert(s.find('>') + 2, "<!-- config " + c.hash + " -->\n");
    dir.write("sweep/sweep.svg", s);
    run.files.push_back(dir.root() / "sweep/sweep.svg");
  }
  dir.complete("sweep");
  for (const auto& [name, th] : run.result.threshold) {
    say(log, "sweep: " + name + " threshold " + (th ? format_double(*th) : std::string("not reached")) +
                 ", spearman " + format_double(run.result.spearman.at(name)));
  }
  return run;
}

std::vector<fs::path> run_synth(const ExperimentConfig& c, double f, std::size_t instance, const Logger& log) {
  if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("synth: f must lie in [0, 1]");
  const auto& sc = c.sweep.synthetic;
  sc.validate();
  RunDirectory dir(c.output_dir, c.hash);
  const SyntheticGenerator generator(sc, SeedLexicon::builtin());
  const auto bag = make_instance(generator, f, derive_seed(c.seed, "instance", instance));
  std::ostringstream msgs, csv, side;
  write_messages_jsonl(msgs, bag.messages);
  write_steps(bag.steps, csv, side);
  dir.write("synth/messages.jsonl", msgs.str());
  dir.write("synth/steps.csv", csv.str());
  dir.write("synth/steps_messages.json", side.str());
  OJson meta = {{"config_hash", c.hash},
                {"f", f},
                {"instance", instance},
                {"name", bag.dataset.name},
                {"split_instant", format_iso8601(bag.dataset.split_instant)},
                {"train_steps", bag.dataset.train.size()},
                {"test_steps", bag.dataset.test.size()},
                {"messages", bag.messages.size()}};
  dir.write("synth/dataset.json", meta.dump(2) + "\n");
  dir.complete("synth");
  say(log, "synth: " + std::to_string(bag.messages.size()) + " messages, " + std::to_string(bag.steps.size()) +
               " steps");
  return {dir.root() / "synth/messages.jsonl", dir.root() / "synth/steps.csv",
          dir.root() / "synth/steps_messages.json", dir.root() / "synth/dataset.json"};
}

}  // namespace microevent
