#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fvpopt/config.hpp"
#include "fvpopt/errors.hpp"
#include "fvpopt/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Batch runner for stochastic hybrid steepest descent over fixed-value-point sets"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<std::size_t> iters;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "Experiment config (INI)")->required();
  app.add_option("--seed", seed, "Override [algorithm] seed");
  app.add_option("--realizations", realizations, "Override [ensemble] realizations");
  app.add_option("--iters", iters, "Override [algorithm] max_iters");
  app.add_option("--out", out_dir, "Directory for relative output paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return fvpopt::kExitUsage;
  }

  try {
    fvpopt::ExperimentConfig config = fvpopt::load_config(config_path);
    fvpopt::Overrides overrides;
    overrides.seed = seed;
    overrides.realizations = realizations;
    overrides.iters = iters;
    if (out_dir) overrides.out_dir = *out_dir;
    fvpopt::apply_overrides(config, overrides);
    return fvpopt::run_experiment(config, std::cerr);
  } catch (const fvpopt::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fvpopt::kExitDivergence;
  } catch (const fvpopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fvpopt::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fvpopt::kExitUsage;
  }
}
