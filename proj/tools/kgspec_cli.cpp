// SPDX-License-Identifier: Apache-2.0
//
// kgspec command line. Subcommands run one pipeline stage (plus the stages it
// depends on) from a JSON config; KGSPEC_OUT overrides the output directory
// when --out is not given.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <sstream>
#include "CLI11.hpp"
#include "kgspec/config.hpp"
#include "kgspec/errors.hpp"
#include "kgspec/io.hpp"
#include "kgspec/lapack.hpp"
#include "kgspec/pipeline.hpp"

using namespace kgspec;

namespace
{

std::vector<int> parse_grid(const std::string &s)
{
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
  {
    std::size_t used = 0;
    int v = 0;
    try
    {
      v = std::stoi(tok, &used);
    }
    catch (const std::exception &)
    {
      used = 0;
    }
    if (used != tok.size() || v < 4)
      throw ConfigError("--grid", "expected comma-separated point counts >= 4, got '" + s + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char **argv)
{
  ensure_sound_blas(argv);

  CLI::App app{"Spectral analysis of the Klein-Gordon Killing generator on stationary tori"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, grid, what, format, dest;
  bool no_cache = false, quick = false;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--no-cache", no_cache, "recompute every stage");
  auto *seed_opt = app.add_option("--seed", seed, "seed for orbit search jitter");
  app.add_option("--grid", grid, "points per axis, M[,M...]");
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);

  std::map<std::string, Stage> stage_cmds = {{"spectrum", Stage::Spectrum}, {"weyl", Stage::Weyl},
                                             {"orbits", Stage::Orbits},     {"trace", Stage::Trace},
                                             {"forms", Stage::Forms}};
  for (const auto &[name, stage] : stage_cmds)
    app.add_subcommand(name, "run the " + name + " stage and its prerequisites");
  auto *verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_flag("--quick", quick, "smaller grids and horizons");
  auto *exp = app.add_subcommand("export", "copy an artifact of the latest run");
  exp->add_option("what", what, "spectrum | orbits | trace | peaks | weyl | counting | forms | verify | manifest")
      ->required();
  exp->add_option("--format", format, "csv | json")->default_val("csv");
  exp->add_option("--dest", dest, "destination file")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try
  {
    const std::string cmd = app.get_subcommands().front()->get_name();
    nlohmann::json j;
    if (!config_path.empty())
    {
      j = nlohmann::json::parse(read_file(config_path));
    }
    else if (cmd == "verify" || cmd == "export")
    {
      j = {{"model", {{"n", 2}, {"lengths", {2.0 * std::numbers::pi}}}}};
    }
    else
    {
      throw ConfigError("--config", "a configuration file is required for '" + cmd + "'");
    }
    RunConfig cfg = parse_config_json(j);
    if (!out_dir.empty())
      cfg.output = out_dir;
    else if (const char *env = std::getenv("KGSPEC_OUT"); env && *env)
      cfg.output = env;
    if (no_cache)
      cfg.cache = false;
    if (seed_opt->count() > 0)
    {
      cfg.seed = seed;
      cfg.orbits.rng_seed = seed;
    }
    if (threads > 0)
      cfg.threads = threads;
    if (!grid.empty())
    {
      cfg.grid = parse_grid(grid);
      cfg.forms_grid = cfg.grid;
    }

    if (cmd == "export")
    {
      export_artifact(cfg.output, what, format, dest);
      return 0;
    }
    if (cmd == "verify")
    {
      cfg.stages = {Stage::Verify};
      if (quick)
        cfg.verify_suite = "quick";
    }
    else
    {
      cfg.stages = {stage_cmds.at(cmd)};
    }
    const PipelineResult res = run_pipeline(cfg, [](const std::string &s) {
      std::cerr << s;
      if (!s.empty() && s.back() != '\n')
        std::cerr << '\n';
    });
    if (cmd == "verify")
    {
      std::ifstream is(std::filesystem::path(cfg.output) / "verify.txt");
      if (is)
        std::cout << is.rdbuf();
    }
    std::cout << res.summary;
    return res.exit_code;
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  catch (const nlohmann::json::exception &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
