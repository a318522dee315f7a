#pragma once

// Implicit Euler time stepping with dt-halving retries, stationary solves by
// pseudo-transient continuation, and full trajectory runs.

#include <vector>

#include "memdd/assembly.hpp"
#include "memdd/device_model.hpp"
#include "memdd/diagnostics.hpp"
#include "memdd/numerics.hpp"

namespace memdd {

struct TimeGrid {
  double T_f = 0.1;
  int M = 200;
  int max_halvings = 8;

  double dt() const { return M > 0 ? T_f / M : 0.0; }
  double time(int m) const { return T_f * m / M; }
  void validate() const;
};

/// Everything a simulation needs besides the time grid.
struct Problem {
  Grid grid;
  DeviceConfig device;
  BiasProgram bias;
  Model model;
  NewtonOptions newton;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> snapshots;
  std::vector<DiagnosticsRecord> records;  ///< one per step, plus t = 0
};

struct StepResult {
  State state;
  int newton_iters = 0;
  int substeps = 1;
};

/// Initial state: V^I from initial_potential at t = 0, n^I = exp(V^I) and
/// p^I = exp(-V^I) in the interior (phi_n = phi_p = 0 there, U at the
/// contacts), D = D_init. Throws InvalidConfig if D_init has a zero entry.
State initial_state(const Problem& problem);

/// One implicit Euler step from t_old to t_old + dt with the previous state
/// as Newton's initial guess. On failure, dt is halved (two sub-steps
/// reaching the same end time) up to max_halvings levels deep.
StepResult step(const Problem& problem, const State& state, double t_old, double dt,
                int max_halvings = 8);

/// Time-independent solution at the bias of time t: implicit Euler with a
/// geometrically growing step from the initial state, which keeps the
/// vacancy mass of D_init. Throws StationaryError when it fails to settle.
State solve_stationary(const Problem& problem, double t = 0.0);

struct RunOptions {
  int snapshot_stride = 1;
  bool record_diagnostics = true;
};

/// Integrates from initial_state to T_f on the uniform time grid. T_f = 0
/// gives the initial snapshot only. Step failures propagate as StepError.
Trajectory run(const Problem& problem, const TimeGrid& time, const RunOptions& opts = {});

/// Same as run() from a caller-provided initial state.
Trajectory run_from(const Problem& problem, const State& initial, const TimeGrid& time,
                    const RunOptions& opts = {});

}  // namespace memdd
