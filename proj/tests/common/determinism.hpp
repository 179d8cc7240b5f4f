#pragma once

// Runs the pipeline twice on one config and compares every artifact.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "microevent/config.hpp"
#include "microevent/runner.hpp"

namespace determinism {

namespace fs = std::filesystem;

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// report.json loses run_info; the manifest is skipped since it hashes report.json.
inline std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel == "manifest.json" || rel == ".lock") continue;
    auto content = slurp(e.path());
    if (rel == "report/report.json") {
      auto doc = nlohmann::ordered_json::parse(content);
      doc.erase("run_info");
      content = doc.dump(2);
    }
    files[rel] = std::move(content);
  }
  return files;
}

// Empty on success. Clears the output directory before each run.
inline std::string two_runs_identical(const microevent::ExperimentConfig& config, std::size_t* n_files = nullptr) {
  fs::remove_all(config.output_dir);
  microevent::run_pipeline(config);
  const auto first = snapshot(config.output_dir);
  fs::remove_all(config.output_dir);
  microevent::run_pipeline(config);
  const auto second = snapshot(config.output_dir);
  if (n_files) *n_files = first.size();
  if (first.count("report/report.md") == 0) return "no report.md written";
  for (const auto& [name, content] : first) {
    auto it = second.find(name);
    if (it == second.end()) return name + " missing from the second run";
    if (it->second != content) return name + " differs between runs";
  }
  if (second.size() != first.size()) return "second run wrote extra files";
  return {};
}

// The bundled fixture config with output under `out`.
inline microevent::ExperimentConfig fixture_config(const std::string& source_dir, const fs::path& out) {
  auto config_path = fs::path(source_dir) / "config" / "fixture.json";
  auto raw = nlohmann::json::parse(slurp(config_path));
  raw["output_dir"] = out.string();
  return microevent::resolve_config(raw, config_path.parent_path());
}

}  // namespace determinism
