#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "microevent/config.hpp"
#include "microevent/error.hpp"
#include "microevent/report.hpp"
#include "microevent/synthlab.hpp"

namespace microevent {

// A stage failed; what() reads "stage '<name>' failed: <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using Logger = std::function<void(const std::string&)>;

// Output directory guard: takes <root>/.lock exclusively, refuses a
// directory whose manifest was written under another config hash, and keeps
// a manifest of every artifact with its content hash.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path root, std::string config_hash);
  ~RunDirectory();
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  const std::filesystem::path& root() const { return root_; }
  const std::string& config_hash() const { return hash_; }
  std::filesystem::path stage_dir(const std::string& stage) const;

  // Writes the file and records it in the manifest.
  void write(const std::filesystem::path& relative, const std::string& content);
  std::string read(const std::filesystem::path& relative) const;
  bool exists(const std::filesystem::path& relative) const;
  void complete(const std::string& stage);

 private:
  void save_manifest();

  std::filesystem::path root_;
  std::string hash_;
  std::filesystem::path lock_;
  nlohmann::ordered_json manifest_;
};

// Stages of a run. Each reads what earlier stages persisted under the run
// directory, so every one can run on its own.
void stage_ingest(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
void stage_timesteps(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
void stage_features(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
void stage_train(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
void stage_evaluate(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
void stage_diagnose(const ExperimentConfig& config, RunDirectory& dir, const Logger& log = {});
std::vector<std::filesystem::path> stage_report(const ExperimentConfig& config, RunDirectory& dir,
                                                const std::optional<nlohmann::ordered_json>& run_info = std::nullopt,
                                                const Logger& log = {});

// Reads the report state the stages have accumulated so far.
ExperimentReport load_report_state(const RunDirectory& dir);

// Throws InputError("missing input: ...") for an unset or absent input.
void check_inputs(const ExperimentConfig& config);

// Every stage in order. The report payload depends only on the config and
// the inputs; wall-clock data lands under run_info in report.json.
ExperimentReport run_pipeline(const ExperimentConfig& config, const Logger& log = {});

struct SweepRun {
  SweepResult result;
  std::optional<SimilarityReport> similarity;
  std::vector<std::filesystem::path> files;
};

// Pipeline parameters used for the sweep cells: the configured ones with the
// estimator list and LDA settings as given.
SweepRun run_synth_sweep(const ExperimentConfig& config, const Logger& log = {});

// One synthetic instance written as canonical-jsonl plus steps.
std::vector<std::filesystem::path> run_synth(const ExperimentConfig& config, double f, std::size_t instance,
                                             const Logger& log = {});

}  // namespace microevent
