#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "../common/determinism.hpp"
#include "microevent/error.hpp"
#include "microevent/runner.hpp"

using namespace microevent;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("microevent_runner_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig fixture(const fs::path& out) { return determinism::fixture_config(MICROEVENT_SOURCE_DIR, out); }

}  // namespace

TEST(Runner, MissingEventsInput) {
  auto raw = nlohmann::json::parse(determinism::slurp(fs::path(MICROEVENT_SOURCE_DIR) / "config/fixture.json"));
  raw["inputs"]["events"] = "no_such_releases.csv";
  raw["output_dir"] = scratch("missing").string();
  const auto c = resolve_config(raw, fs::path(MICROEVENT_SOURCE_DIR) / "config");
  try {
    run_pipeline(c);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("missing input: events", 0), 0u) << e.what();
  }
  EXPECT_FALSE(fs::exists(c.output_dir / "manifest.json"));
}

TEST(Runner, LockRefusesSecondWriter) {
  const auto root = scratch("lock");
  {
    RunDirectory a(root, "aaaa");
    EXPECT_THROW(RunDirectory(root, "aaaa"), Error);
  }
  EXPECT_NO_THROW(RunDirectory(root, "aaaa"));
  fs::remove_all(root);
}

TEST(Runner, HashMismatchRefused) {
  const auto root = scratch("hash");
  {
    RunDirectory a(root, "aaaa");
    a.write("x/y.txt", "hello");
    EXPECT_EQ(a.read("x/y.txt"), "hello");
  }
  EXPECT_THROW(RunDirectory(root, "bbbb"), ConfigError);
  EXPECT_FALSE(fs::exists(root / ".lock"));
  fs::remove_all(root);
}

TEST(Runner, StageNeedsEarlierArtifacts) {
  const auto root = scratch("order");
  const auto c = fixture(root);
  RunDirectory dir(root, c.hash);
  try {
    stage_train(c, dir);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("missing artifact"), std::string::npos) << e.what();
  }
}

TEST(Runner, StageErrorMessage) {
  StageError e("features", "vocabulary is empty");
  EXPECT_EQ(std::string(e.what()), "stage 'features' failed: vocabulary is empty");
  EXPECT_EQ(e.stage(), "features");
}

TEST(Runner, FixtureRunIsDeterministic) {
  const auto c = fixture(scratch("det"));
  std::size_t n = 0;
  EXPECT_EQ(determinism::two_runs_identical(c, &n), "");
  EXPECT_GT(n, 20u);
  const auto md = determinism::slurp(c.output_dir / "report" / "report.md");
  EXPECT_NE(md.find("| Dataset | Estimator | PRAUC | P.test | F1 |"), std::string::npos);
  const auto doc = nlohmann::json::parse(determinism::slurp(c.output_dir / "report" / "report.json"));
  EXPECT_TRUE(doc.contains("run_info"));
  EXPECT_EQ(doc["config_hash"], c.hash);
  fs::remove_all(c.output_dir);
}

TEST(Runner, StagesRunSeparatelyMatchFullRun) {
  const auto whole = fixture(scratch("whole"));
  run_pipeline(whole);
  const auto split = fixture(scratch("split"));
  {
    RunDirectory dir(split.output_dir, split.hash);
    stage_ingest(split, dir);
    stage_timesteps(split, dir);
    stage_features(split, dir);
    stage_train(split, dir);
    stage_evaluate(split, dir);
    stage_diagnose(split, dir);
    stage_report(split, dir);
  }
  // Hashes differ because output_dir is part of the config.
  auto a = determinism::snapshot(whole.output_dir);
  auto b = determinism::snapshot(split.output_dir);
  for (const auto* f : {"models/evaluation.json", "features/features.csv", "timesteps/steps.csv"}) {
    ASSERT_TRUE(a.count(f)) << f;
    auto strip = [](std::string s) {
      auto doc = nlohmann::ordered_json::parse(s, nullptr, false);
      if (doc.is_discarded()) return s;
      doc.erase("config_hash");
      return doc.dump();
    };
    EXPECT_EQ(strip(a[f]), strip(b[f])) << f;
  }
  fs::remove_all(whole.output_dir);
  fs::remove_all(split.output_dir);
}
