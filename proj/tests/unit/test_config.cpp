#include <gtest/gtest.h>

#include <fstream>

#include "microevent/config.hpp"
#include "microevent/error.hpp"

using namespace microevent;

TEST(Config, DefaultsFilledAndHashStable) {
  const auto a = resolve_config(Json::object());
  EXPECT_EQ(a.pipeline.topics.k_grid, (std::vector<int>{6, 10, 14, 18, 22, 26, 30}));
  EXPECT_EQ(a.pipeline.models.n_permutations, 1000);
  EXPECT_EQ(a.formats, (std::vector<std::string>{"json", "markdown"}));
  EXPECT_EQ(a.hash.size(), 16u);
  EXPECT_EQ(resolve_config(Json::object()).hash, a.hash);
  EXPECT_NE(resolve_config(Json{{"seed", 43}}).hash, a.hash);
  // spelling out a default does not change the hash
  EXPECT_EQ(resolve_config(Json{{"seed", 42}}).hash, a.hash);
}

TEST(Config, SchemaRejectsBadValues) {
  EXPECT_THROW(resolve_config(Json{{"sede", 1}}), ConfigError);
  EXPECT_THROW(resolve_config(Json{{"lda", {{"burn_in", -1}}}}), ConfigError);
  EXPECT_THROW(resolve_config(Json{{"dataset", {{"design", "daily"}}}}), ConfigError);
  EXPECT_THROW(resolve_config(Json{{"models", {{"grids", {{"RF", {{"max_depth", Json::array()}}}}}}}}), ConfigError);
  try {
    resolve_config(Json{{"lda", {{"top_n", "ten"}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lda"), std::string::npos) << e.what();
  }
}

TEST(Config, GridsReplaceDefaults) {
  const auto c = resolve_config(Json{{"models", {{"grids", {{"RF", {{"max_depth", {4}}}}}}}}});
  ASSERT_EQ(c.pipeline.models.grids.count("RF"), 1u);
  EXPECT_EQ(c.pipeline.models.grids.at("RF").size(), 1u);
  EXPECT_EQ(c.pipeline.models.grids.count("GBDT"), 0u);
}

TEST(Config, EnvironmentOverrides) {
  const std::map<std::string, std::string> env{
      {"MICROEVENT_LDA__BURN_IN", "100"}, {"MICROEVENT_OUTPUT_DIR", "elsewhere"}, {"OTHER", "x"}};
  const auto doc = apply_env_overrides(Json{{"lda", {{"burn_in", 5}}}}, env);
  EXPECT_EQ(doc["lda"]["burn_in"], 100);
  EXPECT_EQ(doc["output_dir"], "elsewhere");
  EXPECT_FALSE(doc.contains("other"));
}

TEST(Config, ShippedConfigsResolve) {
  const std::filesystem::path dir = std::filesystem::path(MICROEVENT_SOURCE_DIR) / "config";
  const auto fixture = load_config(dir / "fixture.json");
  EXPECT_EQ(fixture.dataset.packages, (std::vector<std::string>{"django", "selenium"}));
  EXPECT_EQ(fixture.dataset.design, StepDesign::calendar_week);
  EXPECT_TRUE(std::filesystem::exists(*fixture.inputs.messages));
  const auto sweep = load_config(dir / "sweep.json");
  EXPECT_EQ(sweep.sweep.synthetic.f_grid, (std::vector<double>{0.10, 0.25, 0.45}));
  EXPECT_EQ(sweep.pipeline.topics.fixed_k, 10);
  EXPECT_TRUE(sweep.pipeline.models.grids.empty());
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

TEST(Config, ParamFromJson) {
  EXPECT_EQ(format_param(param_from_json(Json(4))), format_param(ParamValue{4.0}));
  EXPECT_EQ(std::get<std::string>(param_from_json(Json("balanced"))), "balanced");
  EXPECT_EQ(std::get<bool>(param_from_json(Json(true))), true);
}
