// Command-line front end: one subcommand per experiment, one CSV per run.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dpolymer/config.hpp"
#include "dpolymer/dispatch.hpp"
#include "dpolymer/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for the Brownian directed polymer in a Gaussian environment"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<std::string> mode;
  std::optional<int> threads;
  bool quiet = false;

  for (auto name : dpolymer::kSubcommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--mode", mode, "environment sampler (overrides env.mode)")
        ->check(CLI::IsMember({"exact-cholesky", "spectral"}));
    sub->add_option("--threads", threads, "worker threads (overrides run.threads)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress the summary table");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dpolymer::kExitConfig;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  dpolymer::ExperimentConfig cfg;
  try {
    cfg = dpolymer::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (mode) cfg.env_mode = dpolymer::parse_env_mode(*mode);
    if (threads) cfg.threads = *threads;
    cfg.validate();
  } catch (const dpolymer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dpolymer::kExitConfig;
  }
  return dpolymer::dispatch(subcommand, cfg, out_dir, std::cerr, quiet);
}
