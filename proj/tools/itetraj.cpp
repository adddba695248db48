// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "itetraj/experiment.hpp"

namespace ex = itetraj::experiment;
namespace fs = std::filesystem;

namespace
{

struct Common
{
  std::string config;
  std::string preset;
  std::string out;
  int threads = 1;
  std::vector<std::string> tolerances;
};

void add_common(CLI::App *cmd, Common &c)
{
  auto *cfg = cmd->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  auto *pre = cmd->add_option("--preset", c.preset, "named figure preset, see list-presets");
  cfg->excludes(pre);
  cmd->add_option("--out", c.out, "output directory (default: out/<name>)");
  cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--tolerance", c.tolerances, "property tolerance override KEY=VAL")->take_all();
}

ex::ExperimentConfig resolve(const Common &c)
{
  if (c.config.empty() && c.preset.empty())
    throw ex::ConfigError("one of --config or --preset is required");
  auto cfg = c.config.empty() ? ex::preset(c.preset) : ex::load_config(c.config);
  for (const auto &t : c.tolerances)
    ex::apply_tolerance(cfg, t);
  return cfg;
}

fs::path out_dir(const Common &c, const ex::ExperimentConfig &cfg)
{
  return c.out.empty() ? fs::path("out") / cfg.name : fs::path(c.out);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Interior transmission eigenvalue trajectories"};
  app.set_version_flag("--version", std::string("itetraj ") + ex::tool_version);
  app.require_subcommand(1);

  Common run_opts, verify_opts;
  auto *run = app.add_subcommand("run", "compute trajectories and write data files");
  add_common(run, run_opts);
  auto *verify = app.add_subcommand("verify", "check trajectory properties and print a JSON report");
  add_common(verify, verify_opts);
  app.add_subcommand("list-presets", "list the figure presets");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (app.got_subcommand("list-presets"))
    {
      for (const auto &name : ex::preset_names())
        std::cout << name << "  " << ex::preset_description(name) << "\n";
      return 0;
    }
    if (app.got_subcommand(run))
    {
      const auto cfg = resolve(run_opts);
      const auto dir = out_dir(run_opts, cfg);
      fs::create_directories(dir);
      {
        std::ofstream(dir / "config.json") << ex::to_json(cfg).dump(2) << "\n";
      }
      const auto result = ex::run(cfg, dir, run_opts.threads);
      for (const auto &f : result.files)
        std::cout << f.string() << "\n";
      for (const auto &f : result.failures)
        std::cerr << "failed: " << f << "\n";
      return result.failures.empty() ? 0 : 2;
    }
    const auto cfg = resolve(verify_opts);
    const auto dir = out_dir(verify_opts, cfg);
    const auto report = ex::verify(cfg, dir, verify_opts.threads);
    const auto doc = ex::to_json(report);
    std::cout << doc.dump(2) << "\n";
    if (fs::is_directory(dir))
      std::ofstream(dir / "verify.json") << doc.dump(2) << "\n";
    return doc.at("pass").get<bool>() ? 0 : 1;
  }
  catch (const ex::ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 64;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
