#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace dista::cli;

  CLI::App app{"Distributed sparse recovery simulator (DISTA, ISTA, DSM, consensus ADMM)"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> output;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--workers", workers, "Worker threads (also DISTA_WORKERS)");
    sub->add_option("-o,--output", output, "Output CSV path");
  };

  auto* solve = app.add_subcommand("solve", "Solve one generated instance and write its trace");
  auto* phase = app.add_subcommand("phase", "Recovery-rate grid over (m, nodes)");
  auto* snr = app.add_subcommand("snr", "Mean MSE versus SNR for several solvers");
  auto* validate = app.add_subcommand("validate", "Check stepsizes, consensus matrix and memory");
  for (auto* sub : {solve, phase, snr, validate}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  RunConfig config;
  try {
    config = load_config(config_path);
    Overrides ov{seed, workers, std::nullopt};
    if (output) ov.output = *output;
    apply_overrides(config, ov);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (config.experiment && *config.experiment != name) {
    std::cerr << "error: config is for '" << *config.experiment << "' but '" << name
              << "' was requested\n";
    return kInvalidConfig;
  }

  if (name == "solve") return cmd_solve(config, std::cout, std::cerr);
  if (name == "phase") return cmd_phase(config, std::cout, std::cerr);
  if (name == "snr") return cmd_snr(config, std::cout, std::cerr);
  return cmd_validate(config, std::cout, std::cerr);
}
