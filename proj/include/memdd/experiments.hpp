#pragma once

// Experiment drivers behind the CLI subcommands. Each returns its data so
// tests can check the same code path that writes the CSV files.

#include <string>
#include <vector>

#include "memdd/analysis.hpp"
#include "memdd/config.hpp"
#include "memdd/solver.hpp"

namespace memdd {

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< log10 of the prefactor
};

/// Least-squares line through (log10 x, log10 y). Throws DomainError for
/// fewer than two points or nonpositive data.
LoglogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct LimitStudyResult {
  std::vector<double> eps;
  std::vector<double> l1_distance;  ///< ||D_eps - D_0|| in L1 over space-time
  LoglogFit fit;
  Trajectory reduced;
  std::vector<Trajectory> full;  ///< one per eps, same order
};

/// Full model for every eps in cfg.eps_list and the reduced model, all on
/// the same grid, time grid and initial data. Runs in parallel if asked.
LimitStudyResult limit_study(const ExperimentConfig& cfg, bool parallel = true);

struct SweepMember {
  double parameter = 0.0;  ///< D_e / D^I or applied voltage in U_T
  DeviceConfig device;
  BiasProgram bias;
  State final_state;
};

/// Zero-bias reduced runs to T_f with D_e = ratio * D^I for each ratio.
std::vector<SweepMember> de_sweep(const ExperimentConfig& cfg, bool parallel = true);

/// Reduced runs to T_f under constant bias U0 = cfg.U0, UL = U0 + voltage.
std::vector<SweepMember> bias_sweep(const ExperimentConfig& cfg, bool parallel = true);

/// V - V_bi - V_applied(x) with V_applied(x) = (U_L - U_0) x / L - U_0.
std::vector<double> zero_bias_potential(const Grid& grid, const SweepMember& member);

struct IvSample {
  double t = 0.0;
  double voltage = 0.0;  ///< U_L - U_0 in U_T
  double current = 0.0;  ///< scaled terminal current
};

/// Reduced run under the configured (default sinusoidal) bias.
std::vector<IvSample> iv_sweep(const ExperimentConfig& cfg);

struct LoopMetrics {
  double peak_current = 0.0;
  /// largest |I| interpolated at the zero crossings of the voltage
  double max_current_at_zero_voltage = 0.0;
  int zero_crossings = 0;
  /// sum over half periods of |closed integral I dU|
  double loop_area = 0.0;
  /// smallest relative rising/falling current gap at |U| = probe over all lobes
  double min_branch_gap = 0.0;
  int lobes_probed = 0;
};

LoopMetrics analyze_loop(const std::vector<IvSample>& trace, double probe_voltage = 50.0);

/// Runs the named experiment and writes its CSV files into cfg.out_dir
/// (created if needed). Returns 0 on success, nonzero on failed checks or
/// solver failure (reported on stderr with the failing time).
int run_experiment(const ExperimentConfig& cfg);

}  // namespace memdd
