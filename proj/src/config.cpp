#include "microevent/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "microevent/assets.hpp"
#include "microevent/error.hpp"
#include "microevent/rng.hpp"
#include "microevent/strings.hpp"

extern char** environ;

namespace microevent {
namespace {

bool has_type(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
  if (type == "number") return v.is_number();
  throw ConfigError("schema: unknown type " + type);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config " + path + ": " + what);
}

void merge_into(Json& base, const Json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge_into(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

std::optional<std::filesystem::path> path_or_null(const Json& v, const std::filesystem::path& base) {
  if (v.is_null()) return std::nullopt;
  std::filesystem::path p = v.get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

ParamGrid grid_from_json(const Json& obj, const std::string& where) {
  ParamGrid grid;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_array() || it.value().empty()) fail(where + "." + it.key(), "grid values must be a nonempty array");
    std::vector<ParamValue> values;
    for (const auto& v : it.value()) values.push_back(param_from_json(v));
    grid.emplace_back(it.key(), std::move(values));
  }
  return grid;
}

}  // namespace

ParamValue param_from_json(const Json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError("parameter values must be booleans, numbers or strings");
}

void validate_schema(const Json& doc, const Json& schema, const std::string& path) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(doc, alt.get<std::string>());
    }
    if (!ok) fail(path, "expected type " + t.dump());
  }
  if (schema.contains("enum")) {
    const auto& e = schema["enum"];
    if (std::find(e.begin(), e.end(), doc) == e.end()) fail(path, "value " + doc.dump() + " not in " + e.dump());
  }
  if (doc.is_number()) {
    const double x = doc.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) fail(path, "below minimum");
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) fail(path, "above maximum");
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) fail(path, "must be greater than " + schema["exclusiveMinimum"].dump());
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>()) fail(path, "must be less than " + schema["exclusiveMaximum"].dump());
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      fail(path, "needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        validate_schema(doc[i], schema["items"], path + "[" + std::to_string(i) + "]");
      }
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& r : schema["required"]) {
        if (!doc.contains(r.get<std::string>())) fail(path, "missing required key " + r.get<std::string>());
      }
    }
    const Json props = schema.value("properties", Json::object());
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (props.contains(it.key())) {
        validate_schema(it.value(), props[it.key()], path + "." + it.key());
      } else if (closed) {
        fail(path, "unknown key " + it.key());
      }
    }
  }
}

const Json& config_schema() {
  static const Json schema = Json::parse(assets::load("schema.json"));
  return schema;
}

Json apply_env_overrides(Json doc, const std::map<std::string, std::string>& env) {
  const std::string prefix = "MICROEVENT_";
  for (const auto& [name, value] : env) {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) continue;
    std::vector<std::string> keys;
    std::string rest = to_lower_ascii(name.substr(prefix.size()));
    for (std::size_t pos = 0;;) {
      const auto next = rest.find("__", pos);
      keys.push_back(rest.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    Json parsed = Json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    // Keys match case-insensitively so MODELS__GRIDS__RF reaches "RF".
    auto existing = [](const Json& node, const std::string& key) {
      if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          if (to_lower_ascii(it.key()) == key) return it.key();
        }
      }
      return key;
    };
    Json defaults = default_config();
    const Json* shape = &defaults;
    Json* node = &doc;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      std::string key = existing(*node, keys[i]);
      if (key == keys[i] && shape) key = existing(*shape, keys[i]);
      shape = shape && shape->is_object() && shape->contains(key) ? &(*shape)[key] : nullptr;
      if (i + 1 == keys.size()) {
        (*node)[key] = parsed;
      } else {
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
        node = &(*node)[key];
      }
    }
  }
  return doc;
}

std::map<std::string, std::string> environment_with_prefix(const std::string& prefix) {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    if (entry.rfind(prefix, 0) == 0) out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

std::string config_hash(const Json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(resolved.dump())));
  return buf;
}

Json default_config() {
  const SyntheticConfig sc;
  return Json{
      {"seed", 42},
      {"jobs", 1},
      {"output_dir", "out"},
      {"inputs",
       {{"messages", nullptr}, {"format", "canonical-jsonl"}, {"events", nullptr}, {"stopwords", nullptr},
        {"sentiment_lexicon", nullptr}}},
      {"dataset",
       {{"packages", Json::array()}, {"event_kind", "minor"}, {"design", "event_based"}, {"train_fraction", 0.6},
        {"family", ""}}},
      {"text",
       {{"min_df", 5}, {"max_df_fraction", 0.5}, {"collocation_min_count", 20}, {"collocation_threshold", 10.0}}},
      {"lda",
       {{"k_grid", {6, 10, 14, 18, 22, 26, 30}},
        {"k", nullptr},
        {"alpha", nullptr},
        {"beta", 0.01},
        {"burn_in", 200},
        {"total_iterations", 500},
        {"n_seeds", 3},
        {"top_n", 10},
        {"window", 110},
        {"fold_in_sweeps", 20},
        {"max_train_docs", 0}}},
      {"models",
       {{"estimators", {"LR", "RF", "GBDT"}},
        {"n_folds", 2},
        {"rfe_step_lr", 1},
        {"rfe_step_trees", 0.1},
        {"n_permutations", 1000},
        {"alpha", 0.05},
        {"importance_repeats", 10},
        {"params", {{"LR", {{"accept_separation", true}}}}},
        {"grids",
         {{"RF",
           {{"max_depth", {4, 6, 8}},
            {"n_trees", {50, 200, 500}},
            {"class_weighting", {"none", "balanced", "subsample_balanced"}}}},
          {"GBDT",
           {{"depth", {4, 6, 8}},
            {"n_trees", {50, 200}},
            {"l2", {1, 3, 10}},
            {"preserve_input_order", {false, true}}}}}}}},
      {"synthetic",
       {{"background_vocab_size", sc.background_vocab_size},
        {"n_background_topics", sc.n_background_topics},
        {"topic_word_concentration", sc.topic_word_concentration},
        {"doc_topic_concentration", sc.doc_topic_concentration},
        {"min_length", sc.min_length},
        {"max_length", sc.max_length},
        {"sentiment_rate", sc.sentiment_rate},
        {"active_phrases", sc.active_phrases},
        {"phrases_per_message", sc.phrases_per_message},
        {"f_grid", sc.f_grid},
        {"n_steps", sc.n_steps},
        {"messages_per_step", sc.messages_per_step},
        {"positive_ratio", sc.positive_ratio},
        {"n_instances", sc.n_instances}}},
      {"sweep", {{"alpha", 0.05}, {"novelty_sample_size", 500}, {"novelty_repeats", 30}}},
      {"report", {{"formats", {"json", "markdown"}}}},
  };
}

ExperimentConfig resolve_config(const Json& raw, const std::filesystem::path& base_dir) {
  if (!raw.is_object()) throw ConfigError("config: top level must be an object");
  validate_schema(raw, config_schema());
  Json merged = default_config();
  // Grids replace the defaults per estimator instead of merging key by key.
  if (raw.contains("models") && raw["models"].contains("grids")) merged["models"]["grids"] = Json::object();
  merge_into(merged, raw);
  validate_schema(merged, config_schema());

  ExperimentConfig c;
  c.resolved = merged;
  c.hash = config_hash(merged);
  c.seed = merged["seed"].get<std::uint64_t>();
  c.jobs = merged["jobs"].get<int>();
  c.output_dir = merged["output_dir"].get<std::string>();

  const auto& in = merged["inputs"];
  c.inputs.messages = path_or_null(in["messages"], base_dir);
  c.inputs.format = parse_dump_format(in["format"].get<std::string>());
  c.inputs.events = path_or_null(in["events"], base_dir);
  c.inputs.stopwords = path_or_null(in["stopwords"], base_dir);
  c.inputs.sentiment_lexicon = path_or_null(in["sentiment_lexicon"], base_dir);

  const auto& ds = merged["dataset"];
  for (const auto& p : ds["packages"]) c.dataset.packages.push_back(to_lower_ascii(p.get<std::string>()));
  c.dataset.event_kind = parse_release_kind(ds["event_kind"].get<std::string>());
  c.dataset.design = parse_step_design(ds["design"].get<std::string>());
  c.dataset.train_fraction = ds["train_fraction"].get<double>();
  c.dataset.family = ds["family"].get<std::string>();

  auto& pp = c.pipeline;
  pp.seed = c.seed;
  pp.jobs = c.jobs;
  const auto& tx = merged["text"];
  pp.text.min_df = tx["min_df"].get<std::size_t>();
  pp.text.max_df_fraction = tx["max_df_fraction"].get<double>();
  pp.text.collocation_min_count = tx["collocation_min_count"].get<std::size_t>();
  pp.text.collocation_threshold = tx["collocation_threshold"].get<double>();

  const auto& lda = merged["lda"];
  pp.topics.k_grid = lda["k_grid"].get<std::vector<int>>();
  if (!std::is_sorted(pp.topics.k_grid.begin(), pp.topics.k_grid.end()) ||
      std::adjacent_find(pp.topics.k_grid.begin(), pp.topics.k_grid.end()) != pp.topics.k_grid.end()) {
    throw ConfigError("config $.lda.k_grid: must be strictly ascending");
  }
  if (!lda["k"].is_null()) pp.topics.fixed_k = lda["k"].get<int>();
  if (!lda["alpha"].is_null()) pp.topics.alpha = lda["alpha"].get<double>();
  pp.topics.beta = lda["beta"].get<double>();
  pp.topics.burn_in = lda["burn_in"].get<int>();
  pp.topics.total_iterations = lda["total_iterations"].get<int>();
  pp.topics.n_seeds = lda["n_seeds"].get<int>();
  pp.topics.top_n = lda["top_n"].get<std::size_t>();
  pp.topics.window = lda["window"].get<std::size_t>();
  pp.topics.fold_in_sweeps = lda["fold_in_sweeps"].get<int>();
  pp.topics.max_train_docs = lda["max_train_docs"].get<std::size_t>();
  LdaConfig check;
  check.K = pp.topics.fixed_k.value_or(pp.topics.k_grid.front());
  check.alpha = pp.topics.alpha;
  check.beta = pp.topics.beta;
  check.burn_in = pp.topics.burn_in;
  check.total_iterations = pp.topics.total_iterations;
  check.validate();

  const auto& m = merged["models"];
  pp.models.estimators = m["estimators"].get<std::vector<std::string>>();
  pp.models.n_folds = m["n_folds"].get<int>();
  pp.models.rfe_step_lr = m["rfe_step_lr"].get<double>();
  pp.models.rfe_step_trees = m["rfe_step_trees"].get<double>();
  rfe_drop_count(1, pp.models.rfe_step_lr);
  rfe_drop_count(1, pp.models.rfe_step_trees);
  pp.models.n_permutations = m["n_permutations"].get<int>();
  pp.models.alpha = m["alpha"].get<double>();
  pp.models.importance_repeats = m["importance_repeats"].get<int>();
  pp.models.base.clear();
  for (const std::string name : {"LR", "RF", "GBDT"}) {
    EstimatorSpec spec = default_spec(name);
    if (m["params"].contains(name)) {
      const auto& ps = m["params"][name];
      for (auto it = ps.begin(); it != ps.end(); ++it) set_param(spec, it.key(), param_from_json(it.value()));
    }
    pp.models.base[name] = spec;
  }
  pp.models.grids.clear();
  for (auto it = m["grids"].begin(); it != m["grids"].end(); ++it) {
    auto grid = grid_from_json(it.value(), "$.models.grids." + it.key());
    EstimatorSpec probe = default_spec(it.key());
    for (const auto& [name, values] : grid) {
      for (const auto& v : values) set_param(probe, name, v);
    }
    pp.models.grids[it.key()] = std::move(grid);
  }

  const auto& sy = merged["synthetic"];
  auto& sc = c.sweep.synthetic;
  sc.background_vocab_size = sy["background_vocab_size"].get<std::size_t>();
  sc.n_background_topics = sy["n_background_topics"].get<std::size_t>();
  sc.topic_word_concentration = sy["topic_word_concentration"].get<double>();
  sc.doc_topic_concentration = sy["doc_topic_concentration"].get<double>();
  sc.min_length = sy["min_length"].get<std::size_t>();
  sc.max_length = sy["max_length"].get<std::size_t>();
  sc.sentiment_rate = sy["sentiment_rate"].get<double>();
  sc.active_phrases = sy["active_phrases"].get<std::size_t>();
  sc.phrases_per_message = sy["phrases_per_message"].get<std::size_t>();
  sc.f_grid = sy["f_grid"].get<std::vector<double>>();
  sc.n_steps = sy["n_steps"].get<std::size_t>();
  sc.messages_per_step = sy["messages_per_step"].get<std::size_t>();
  sc.positive_ratio = sy["positive_ratio"].get<double>();
  sc.n_instances = sy["n_instances"].get<std::size_t>();
  sc.seed = c.seed;
  sc.validate();
  c.sweep.alpha = merged["sweep"]["alpha"].get<double>();
  c.sweep.novelty_sample_size = merged["sweep"]["novelty_sample_size"].get<std::size_t>();
  c.sweep.novelty_repeats = merged["sweep"]["novelty_repeats"].get<int>();

  c.formats = merged["report"]["formats"].get<std::vector<std::string>>();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& env) {
  std::ifstream in(path);
  if (!in) throw InputError("missing input: config " + path.string());
  Json raw = Json::parse(in, nullptr, false);
  if (raw.is_discarded()) throw ConfigError("config " + path.string() + ": not valid JSON");
  raw = apply_env_overrides(std::move(raw), env);
  return resolve_config(raw, path.parent_path());
}

}  // namespace microevent
