#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../common/report_sample.hpp"
#include "microevent/error.hpp"

using namespace microevent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("microevent_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Report, MarkdownMatchesGolden) {
  const auto md = render_markdown(report_sample::make());
  const fs::path golden = fs::path(MICROEVENT_GOLDEN_DIR) / "report.md";
  if (std::getenv("MICROEVENT_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << md;
  }
  ASSERT_TRUE(fs::exists(golden)) << "missing golden file; rerun with MICROEVENT_UPDATE_GOLDEN=1";
  EXPECT_EQ(md, slurp(golden));
  EXPECT_EQ(report_sample::missing_field(md), "");
}

TEST(Report, PerformanceRowsAndStar) {
  const auto md = render_markdown(report_sample::make());
  EXPECT_NE(md.find("| multiple minor c.w.-based | LR* | 0.663 | 0.0049 | 0.612 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| RF | 0.591 | 0.0619 | 0.552 |"), std::string::npos);
  EXPECT_NE(md.find("rfecv"), std::string::npos);
}

TEST(Report, JsonRoundTrip) {
  const auto r = report_sample::make();
  const auto doc = report_to_json(r, nlohmann::ordered_json{{"elapsed_seconds", 1.5}});
  EXPECT_EQ(doc["run_info"]["elapsed_seconds"], 1.5);
  EXPECT_TRUE(doc["estimators"][0]["diagnostics"]["coefficients"][0]["vif"].is_null());
  const auto back = report_from_json(doc);
  EXPECT_EQ(render_markdown(back), render_markdown(r));
  EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
}

TEST(Report, FormatsValidated) {
  EXPECT_NO_THROW(validate_formats({"json", "markdown", "svg"}));
  try {
    validate_formats({"json", "pdf"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "unknown report format: pdf");
  }
}

TEST(Report, EmitWritesRequestedFilesOnly) {
  const auto dir = scratch("emit");
  const auto r = report_sample::make();
  const auto json_only = emit_report(r, {"json"}, dir / "a");
  ASSERT_EQ(json_only.size(), 1u);
  EXPECT_EQ(json_only[0].filename(), "report.json");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "a"), fs::directory_iterator{}), 1);
  const auto all = emit_report(r, {"json", "markdown", "svg"}, dir / "b");
  EXPECT_TRUE(fs::exists(dir / "b" / "report.md"));
  EXPECT_TRUE(fs::exists(dir / "b" / "odds_ratios_LR.svg"));
  EXPECT_NE(slurp(dir / "b" / "coherence.svg").find("<!-- config 0123456789abcdef -->"), std::string::npos);
  EXPECT_THROW(emit_report(r, {"html"}, dir / "c"), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "c"));
  fs::remove_all(dir);
}

TEST(Report, SvgForestIsWellFormed) {
  const auto svg = svg_forest("Odds ratios", {{"a", 1.5, 1.1, 2.0}, {"b", 0.7, 0.4, 1.2}}, 1.0, true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find(">a<"), std::string::npos);
}
