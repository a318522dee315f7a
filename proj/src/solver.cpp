#include "memdd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memdd/errors.hpp"

namespace memdd {

void TimeGrid::validate() const {
  if (!(T_f >= 0.0) || !std::isfinite(T_f)) throw InvalidConfig("T_f must be nonnegative");
  if (M < 1) throw InvalidConfig("number of time steps must be at least 1");
  if (max_halvings < 0) throw InvalidConfig("max_halvings must be nonnegative");
}

namespace {

State equilibrium_start(const Problem& problem, const BoundaryData& bc) {
  State s(problem.grid.size());
  s.V = initial_potential(problem.grid, problem.device, bc);
  s.phi_n.front() = bc.U_left;
  s.phi_p.front() = bc.U_left;
  s.phi_n.back() = bc.U_right;
  s.phi_p.back() = bc.U_right;
  set_vacancy_density(s, problem.device.D_init);
  return s;
}

// Electron, hole and potential fields for a fixed vacancy profile at the
// given contact data; Newton from `guess`.
State quasi_static(const Problem& problem, const State& guess, const BoundaryData& bc) {
  StepContext ctx;
  ctx.prev = &guess;
  ctx.dt = 1.0;
  ctx.bc = bc;
  ctx.model = Model::reduced();
  ctx.freeze_vacancies = true;
  auto res = [&](std::span<const double> x, std::vector<double>& r) {
    r = residual(State::unpack(x), ctx, problem.grid, problem.device);
  };
  auto jac = [&](std::span<const double> x) {
    return jacobian(State::unpack(x), ctx, problem.grid, problem.device);
  };
  return State::unpack(newton_solve(res, jac, guess.pack(), problem.newton).x);
}

// Bias continuation from zero to the contact values at t = 0, keeping D.
State ramp_to_bias(const Problem& problem, const BoundaryData& target) {
  const BoundaryData zero = boundary_data(problem.device, BiasProgram::constant(0.0, 0.0), 0.0);
  State current = equilibrium_start(problem, zero);
  double s = 0.0;
  double ds = 1.0;
  while (s < 1.0) {
    const double s_try = std::min(1.0, s + ds);
    const BoundaryData bc = boundary_data(
        problem.device, BiasProgram::constant(s_try * target.U_left, s_try * target.U_right), 0.0);
    try {
      current = quasi_static(problem, current, bc);
      s = s_try;
      ds *= 2.0;
    } catch (const NoConvergence&) {
      ds *= 0.5;
    } catch (const LinearSolveError&) {
      ds *= 0.5;
    }
    if (ds < 1e-4) {
      throw StepError("bias continuation for the initial state failed", 0.0, 0.0, HUGE_VAL);
    }
  }
  return current;
}

}  // namespace

State initial_state(const Problem& problem) {
  const DeviceConfig& device = problem.device;
  device.validate(problem.grid);
  for (double d : device.D_init) {
    if (!(d > 0.0)) {
      throw InvalidConfig("initial vacancy density must be strictly positive in quasi-Fermi form");
    }
  }
  const BoundaryData bc = boundary_data(device, problem.bias, 0.0);
  // The reduced model carries no initial data for n and p; they follow D and
  // the bias, so a biased start is reached by continuation.
  if (problem.model.kind == ModelKind::reduced && (bc.U_left != 0.0 || bc.U_right != 0.0)) {
    return ramp_to_bias(problem, bc);
  }
  return equilibrium_start(problem, bc);
}

namespace {

struct Attempt {
  State state;
  int iterations = 0;
  int substeps = 0;
};

Attempt solve_one(const Problem& problem, const State& prev, double t_new, double dt) {
  StepContext ctx;
  ctx.prev = &prev;
  ctx.dt = dt;
  ctx.t_new = t_new;
  ctx.bc = boundary_data(problem.device, problem.bias, t_new);
  ctx.model = problem.model;

  auto res = [&](std::span<const double> x, std::vector<double>& r) {
    r = residual(State::unpack(x), ctx, problem.grid, problem.device);
  };
  auto jac = [&](std::span<const double> x) {
    return jacobian(State::unpack(x), ctx, problem.grid, problem.device);
  };
  NewtonResult nr = newton_solve(res, jac, prev.pack(), problem.newton);
  return {State::unpack(nr.x), nr.stats.iterations, 1};
}

Attempt advance(const Problem& problem, const State& prev, double t_old, double t_new,
                int budget) {
  try {
    return solve_one(problem, prev, t_new, t_new - t_old);
  } catch (const NoConvergence& e) {
    if (budget <= 0) {
      throw StepError("time step failed after exhausting dt halvings: " + std::string(e.what()),
                      t_new, t_new - t_old, e.final_residual());
    }
  } catch (const LinearSolveError& e) {
    if (budget <= 0) {
      throw StepError("time step failed after exhausting dt halvings: " + std::string(e.what()),
                      t_new, t_new - t_old, HUGE_VAL);
    }
  }
  const double t_mid = 0.5 * (t_old + t_new);
  Attempt first = advance(problem, prev, t_old, t_mid, budget - 1);
  Attempt second = advance(problem, first.state, t_mid, t_new, budget - 1);
  second.iterations += first.iterations;
  second.substeps += first.substeps;
  return second;
}

}  // namespace

StepResult step(const Problem& problem, const State& state, double t_old, double dt,
                int max_halvings) {
  if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
  Attempt a = advance(problem, state, t_old, t_old + dt, max_halvings);
  return {std::move(a.state), a.iterations, a.substeps};
}

State solve_stationary(const Problem& problem, double t) {
  // Constant bias: evaluate the program at t for the whole continuation.
  Problem frozen = problem;
  frozen.bias = BiasProgram::constant(problem.bias.U0(t), problem.bias.UL(t));

  State current = initial_state(frozen);
  double dt = 1e-3;
  constexpr double kMaxDt = 1e12;
  constexpr double kChangeTol = 1e-12;
  for (int it = 0; it < 400; ++it) {
    StepResult r;
    try {
      r = step(frozen, current, 0.0, dt, 12);
    } catch (const StepError& e) {
      throw StationaryError(std::string("stationary continuation failed: ") + e.what());
    }
    const std::vector<double> a = current.pack();
    const std::vector<double> b = r.state.pack();
    double change = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) change = std::max(change, std::fabs(a[i] - b[i]));
    current = std::move(r.state);
    if (dt >= kMaxDt && change <= kChangeTol) return current;
    dt = std::min(dt * 4.0, kMaxDt);
  }
  throw StationaryError("stationary continuation did not settle");
}

Trajectory run(const Problem& problem, const TimeGrid& time, const RunOptions& opts) {
  return run_from(problem, initial_state(problem), time, opts);
}

Trajectory run_from(const Problem& problem, const State& initial, const TimeGrid& time,
                    const RunOptions& opts) {
  time.validate();
  if (opts.snapshot_stride < 1) throw InvalidConfig("snapshot stride must be at least 1");
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(initial);
  if (opts.record_diagnostics) {
    traj.records.push_back(make_record(0.0, initial, boundary_data(problem.device, problem.bias, 0.0),
                                       problem.grid, problem.device, problem.model, 0));
  }
  if (time.T_f == 0.0) return traj;

  State current = initial;
  for (int m = 1; m <= time.M; ++m) {
    const double t_old = time.time(m - 1);
    const double t_new = time.time(m);
    StepResult r = step(problem, current, t_old, t_new - t_old, time.max_halvings);
    current = std::move(r.state);
    if (opts.record_diagnostics) {
      traj.records.push_back(make_record(t_new, current,
                                         boundary_data(problem.device, problem.bias, t_new),
                                         problem.grid, problem.device, problem.model,
                                         r.newton_iters));
    }
    if (m % opts.snapshot_stride == 0 || m == time.M) {
      traj.times.push_back(t_new);
      traj.snapshots.push_back(current);
    }
  }
  return traj;
}

}  // namespace memdd
