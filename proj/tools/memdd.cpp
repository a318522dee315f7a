// memdd <experiment> --config <path> [--out <dir>] [--nodes N] [--steps M]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "memdd/config.hpp"
#include "memdd/errors.hpp"
#include "memdd/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"1D drift-diffusion memristor simulator"};
  std::string experiment;
  std::string config_path;
  std::string out_dir;
  int nodes = 0;
  int steps = 0;
  app.add_option("experiment", experiment,
                 "transient-full | transient-reduced | steady | limit-study | de-sweep | "
                 "bias-sweep | iv-sweep | verify-lemmas")
      ->required();
  app.add_option("--config", config_path, "config file")->required();
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  app.add_option("--nodes", nodes, "number of grid nodes (overrides [grid] N)")
      ->check(CLI::Range(3, 1 << 24));
  app.add_option("--steps", steps, "number of time steps (overrides [time] M)")
      ->check(CLI::Range(1, 1 << 24));
  CLI11_PARSE(app, argc, argv);

  try {
    memdd::ExperimentConfig cfg = memdd::parse_config(config_path);
    cfg.experiment = memdd::parse_experiment(experiment);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (nodes > 0) cfg.N = nodes;
    if (steps > 0) cfg.M = steps;
    cfg.validate();
    return memdd::run_experiment(cfg);
  } catch (const memdd::Error& e) {
    std::cerr << "memdd: " << e.what() << "\n";
    return 1;
  }
}
