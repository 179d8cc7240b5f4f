#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "microevent/corpus.hpp"
#include "microevent/pipeline.hpp"
#include "microevent/synthlab.hpp"
#include "microevent/timegrid.hpp"

namespace microevent {

using Json = nlohmann::json;

// JSON Schema subset: type, properties, required, additionalProperties
// (boolean), enum, minimum, maximum, exclusiveMinimum, exclusiveMaximum,
// items, minItems. Throws ConfigError naming the first offending path.
void validate_schema(const Json& doc, const Json& schema, const std::string& path = "$");

const Json& config_schema();

// MICROEVENT_LDA__BURN_IN=100 sets /lda/burn_in. Values are parsed as JSON
// when possible and kept as strings otherwise. Variables outside the prefix
// are ignored.
Json apply_env_overrides(Json doc, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_with_prefix(const std::string& prefix = "MICROEVENT_");

// 16 hex digits of FNV-1a over the compact dump (keys sorted).
std::string config_hash(const Json& resolved);

struct InputPaths {
  std::optional<std::filesystem::path> messages;
  DumpFormat format = DumpFormat::canonical_jsonl;
  std::optional<std::filesystem::path> events;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> sentiment_lexicon;
};

struct DatasetSpec {
  std::vector<std::string> packages;
  ReleaseKind event_kind = ReleaseKind::minor;
  StepDesign design = StepDesign::event_based;
  double train_fraction = 0.6;
  std::string family;  // Holm family; defaults to the dataset's package label
};

struct SweepSpec {
  SyntheticConfig synthetic;
  double alpha = 0.05;
  std::size_t novelty_sample_size = 500;
  int novelty_repeats = 30;
};

struct ExperimentConfig {
  Json resolved;  // after env overrides, with every default filled in
  std::string hash;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::filesystem::path output_dir = "out";
  InputPaths inputs;
  DatasetSpec dataset;
  PipelineParams pipeline;
  SweepSpec sweep;
  std::vector<std::string> formats{"json", "markdown"};
};

// Validates `raw` against the shipped schema, fills defaults and builds the
// typed view. Relative input paths resolve against `base_dir`.
ExperimentConfig resolve_config(const Json& raw, const std::filesystem::path& base_dir = {});

// Reads, applies env overrides, resolves.
ExperimentConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& env = {});

// Every field of a resolved config with its default value.
Json default_config();

ParamValue param_from_json(const Json& v);

}  // namespace microevent
