#pragma once

// Experiment configuration: INI-style text with sections [device], [grid],
// [time], [bias] and [output]. An optional `experiment = <name>` line may
// precede the first section.

#include <optional>
#include <string>
#include <vector>

#include "memdd/device_model.hpp"
#include "memdd/solver.hpp"

namespace memdd {

enum class Experiment {
  transient_full,
  transient_reduced,
  steady,
  limit_study,
  de_sweep,
  bias_sweep,
  iv_sweep,
  verify_lemmas,
};

/// "transient-full", "limit-study", ...
std::string to_string(Experiment e);
/// Throws InvalidConfig for an unknown name.
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
  std::optional<Experiment> experiment;

  // [device]
  std::optional<double> lambda2;  ///< computed from the scaling block when unset
  double eps = 1e-2;
  double A = 0.25;
  double D_init = 2.5;
  double D_e = 25.0;
  ScalingBlock scaling;
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> de_ratios{0.1, 0.5, 1.0, 2.0, 10.0};

  // [grid]
  int N = 501;

  // [time]; the I-V sweep defaults to T_f = 0.03 with 600 steps, every other
  // experiment to T_f = 0.1 with 200 steps.
  std::optional<double> T_f;
  std::optional<int> M;
  int max_halvings = 8;

  // [bias]; the I-V sweep defaults to a 100 U_T, three-period sine.
  std::optional<BiasKind> bias_kind;
  double U0 = 0.0;
  double UL = 0.0;
  double UL_end = 0.0;
  double amplitude = 100.0;
  double periods = 3.0;
  std::vector<double> voltages{0.0, 10.0, 20.0, 40.0};

  // [output]
  std::string out_dir = "out";
  int stride = 1;

  double lambda2_value() const;
  TimeGrid time_grid() const;
  BiasProgram bias() const;
  Grid grid() const;
  DeviceConfig device(const Grid& grid) const;
  Problem problem() const;

  /// Range checks; throws InvalidConfig.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError (with line number) for malformed lines, unknown
/// sections or keys, and values of the wrong type; IoError if the file
/// cannot be read. The result is validated.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Text that parse_config_text maps back to an equal config.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace memdd
