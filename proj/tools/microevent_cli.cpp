// microevent: reproducible micro-event detection runs from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "microevent/config.hpp"
#include "microevent/error.hpp"
#include "microevent/report.hpp"
#include "microevent/runner.hpp"
#include "microevent/strings.hpp"

namespace me = microevent;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string formats;
  std::optional<int> jobs;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)");
  cmd->add_option("--out", c.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--format", c.formats, "report formats, comma separated: json,markdown,svg");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("-q,--quiet", c.quiet, "no progress lines on stderr");
}

// File, then MICROEVENT_* environment variables, then flags.
me::ExperimentConfig resolve(const Common& c) {
  me::Json raw = me::Json::object();
  fs::path base;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw me::InputError("missing input: config " + c.config);
    raw = me::Json::parse(in, nullptr, false);
    if (raw.is_discarded()) throw me::ConfigError("config " + c.config + ": not valid JSON");
    base = fs::path(c.config).parent_path();
  }
  raw = me::apply_env_overrides(std::move(raw), me::environment_with_prefix());
  if (!c.out.empty()) raw["output_dir"] = c.out;
  if (c.seed) raw["seed"] = *c.seed;
  if (c.jobs) raw["jobs"] = *c.jobs;
  if (!c.formats.empty()) {
    std::vector<std::string> list;
    for (const auto& f : me::split(c.formats, ',')) {
      const auto t = std::string(me::trim(f));
      if (!t.empty()) list.push_back(t);
    }
    me::validate_formats(list);
    raw["report"]["formats"] = list;
  }
  return me::resolve_config(raw, base);
}

me::Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect software release micro-events in developer forum messages"};
  app.require_subcommand(1);
  app.set_version_flag("--version", me::kVersion);
  Common common;
  double synth_f = 0.25;
  std::size_t synth_instance = 0;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"run", "all stages, ingest through report"},
      {"ingest", "read the dump, filter by package, classify releases"},
      {"timesteps", "build labeled time steps and the train/test partition"},
      {"features", "text preparation, topic model, sentiment, feature matrix"},
      {"train", "feature selection, tuning and final fits"},
      {"evaluate", "test metrics, permutation tests, Holm decisions"},
      {"diagnose", "LR diagnostics, effect sizes, permutation importance"},
      {"report", "write report files from the persisted stages"},
      {"synth", "write one synthetic instance"},
      {"sweep", "detectability sweep over synthetic instances"},
  };
  std::map<std::string, CLI::App*> cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, common);
    cmds[s.name] = cmd;
  }
  cmds["synth"]->add_option("--f", synth_f, "fraction of event messages per positive step")->check(CLI::Range(0.0, 1.0));
  cmds["synth"]->add_option("--instance", synth_instance, "instance index");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(common);
    const auto log = logger(common);
    auto with_dir = [&](auto&& fn) {
      me::RunDirectory dir(config.output_dir, config.hash);
      fn(dir);
    };
    if (cmds["run"]->parsed()) {
      const auto report = me::run_pipeline(config, log);
      std::cout << (config.output_dir / "report").string() << '\n';
    } else if (cmds["ingest"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_ingest(config, d, log); });
    } else if (cmds["timesteps"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_timesteps(config, d, log); });
    } else if (cmds["features"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_features(config, d, log); });
    } else if (cmds["train"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_train(config, d, log); });
    } else if (cmds["evaluate"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_evaluate(config, d, log); });
    } else if (cmds["diagnose"]->parsed()) {
      with_dir([&](me::RunDirectory& d) { me::stage_diagnose(config, d, log); });
    } else if (cmds["report"]->parsed()) {
      with_dir([&](me::RunDirectory& d) {
        for (const auto& p : me::stage_report(config, d, std::nullopt, log)) std::cout << p.string() << '\n';
      });
    } else if (cmds["synth"]->parsed()) {
      for (const auto& p : me::run_synth(config, synth_f, synth_instance, log)) std::cout << p.string() << '\n';
    } else if (cmds["sweep"]->parsed()) {
      for (const auto& p : me::run_synth_sweep(config, log).files) std::cout << p.string() << '\n';
    }
  } catch (const me::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
