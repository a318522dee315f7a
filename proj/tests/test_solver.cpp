#include <cmath>

#include "doctest.h"
#include "memdd/errors.hpp"
#include "memdd/solver.hpp"

using namespace memdd;

namespace {

Problem make_problem(int N, Model model, BiasProgram bias = BiasProgram::constant(0.0, 0.0),
                     double D_e = 25.0) {
  Grid g = build_uniform_grid(N);
  DeviceConfig d = make_constant_device(g, 2.5, 0.25, D_e, model.eps);
  return Problem{std::move(g), std::move(d), bias, model, NewtonOptions{}};
}

double max_diff(const State& a, const State& b) {
  const auto x = a.pack();
  const auto y = b.pack();
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(x[i] - y[i]));
  return m;
}

double D_diff(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a.D(k) - b.D(k)));
  return m;
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid tg{0.1, 200, 8};
  CHECK(tg.dt() == doctest::Approx(5e-4));
  CHECK(tg.time(0) == 0.0);
  CHECK(tg.time(200) == 0.1);
  CHECK_THROWS_AS((TimeGrid{-1.0, 10, 8}).validate(), InvalidConfig);
  CHECK_THROWS_AS((TimeGrid{1.0, 0, 8}).validate(), InvalidConfig);
}

TEST_CASE("initial state at zero bias") {
  const Problem p = make_problem(101, Model::reduced());
  const State s = initial_state(p);
  const BoundaryData bc = boundary_data(p.device, p.bias, 0.0);
  CHECK(s.V.front() == bc.V_left);
  CHECK(s.V.back() == bc.V_right);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s.D(k) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(s.phi_n[k] == 0.0);
    CHECK(s.phi_p[k] == 0.0);
    CHECK(s.n(k) == doctest::Approx(std::exp(s.V[k])));
  }
}

TEST_CASE("initial state rejects zero vacancy density") {
  Problem p = make_problem(21, Model::reduced());
  p.device.D_init[4] = 0.0;
  CHECK_THROWS_AS(initial_state(p), InvalidConfig);
}

TEST_CASE("biased reduced start keeps D and satisfies the quasi-static rows") {
  const Problem p = make_problem(201, Model::reduced(), BiasProgram::constant(0.0, 40.0));
  const State s = initial_state(p);
  const BoundaryData bc = boundary_data(p.device, p.bias, 0.0);
  CHECK(s.V.back() == doctest::Approx(bc.V_right));
  CHECK(s.phi_n.back() == doctest::Approx(40.0));
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.D(k) == doctest::Approx(2.5).epsilon(1e-10));
  StepContext ctx;
  ctx.prev = &s;
  ctx.dt = 1.0;
  ctx.bc = bc;
  ctx.model = Model::reduced();
  ctx.freeze_vacancies = true;
  CHECK(max_norm(residual(s, ctx, p.grid, p.device)) <= 1e-10);
}

TEST_CASE("reduced steps converge within 8 Newton iterations") {
  const Problem p = make_problem(501, Model::reduced());
  const Trajectory t = run(p, TimeGrid{0.1, 200, 8}, RunOptions{200, true});
  int worst = 0;
  for (const auto& r : t.records) worst = std::max(worst, r.newton_iters);
  CHECK(worst <= 8);
  CHECK(t.records.size() == 201);
  CHECK(t.snapshots.size() == 2);
}

TEST_CASE("vacancy mass is conserved step by step") {
  for (Model m : {Model::reduced(), Model::full(1e-2)}) {
    const Problem p = make_problem(101, m, BiasProgram::constant(0.0, 5.0));
    const Trajectory t = run(p, TimeGrid{0.05, 100, 8});
    double worst = 0.0;
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      worst = std::max(worst, std::fabs(t.records[i].mass_D - t.records[i - 1].mass_D) / t.records[i - 1].mass_D);
    }
    CHECK(worst <= 1e-12);
    CHECK(t.records.back().mass_D == doctest::Approx(2.5).epsilon(1e-10));
  }
}

TEST_CASE("zero final time returns the initial snapshot") {
  const Problem p = make_problem(51, Model::reduced());
  const Trajectory t = run(p, TimeGrid{0.0, 10, 8});
  REQUIRE(t.snapshots.size() == 1);
  CHECK(t.times.front() == 0.0);
  CHECK(t.snapshots.front() == initial_state(p));
  CHECK(t.records.size() == 1);
}

TEST_CASE("snapshot stride keeps the final state") {
  const Problem p = make_problem(51, Model::reduced());
  const Trajectory t = run(p, TimeGrid{0.01, 10, 8}, RunOptions{3, false});
  CHECK(t.times == std::vector<double>{0.0, 0.003, 0.006, 0.009, 0.01});
  CHECK(t.records.empty());
  CHECK_THROWS_AS(run(p, TimeGrid{0.01, 10, 8}, RunOptions{0, true}), InvalidConfig);
}

TEST_CASE("runs are bitwise reproducible") {
  const Problem p = make_problem(81, Model::full(1e-2), BiasProgram::sinusoidal(0.0, 10.0, 1.0, 0.01));
  const Trajectory a = run(p, TimeGrid{0.01, 20, 8});
  const Trajectory b = run(p, TimeGrid{0.01, 20, 8});
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) CHECK(a.snapshots[i] == b.snapshots[i]);
}

TEST_CASE("steady state is a fixed point of the time step") {
  const Problem p = make_problem(201, Model::reduced());
  const State s = solve_stationary(p);
  const StepResult r = step(p, s, 0.0, 5e-4);
  CHECK(max_diff(r.state, s) <= 1e-12);
  double mass = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) mass += p.grid.width(k) * s.D(k);
  CHECK(mass == doctest::Approx(2.5).epsilon(1e-11));
}

TEST_CASE("step failure after exhausting halvings is reported") {
  Problem p = make_problem(101, Model::reduced(), BiasProgram::constant(0.0, 0.0));
  p.newton.max_iter = 1;
  p.newton.tol_residual = 1e-300;  // unreachable
  p.newton.tol_step = 1e-300;
  const State s = initial_state(make_problem(101, Model::reduced(), BiasProgram::constant(0.0, 30.0)));
  try {
    step(p, s, 0.2, 1e-3, 2);
    FAIL("expected StepError");
  } catch (const StepError& e) {
    CHECK(e.time() > 0.2);
    CHECK(e.dt() == doctest::Approx(2.5e-4));
  }
}

TEST_CASE("halving reaches the same end time") {
  Problem p = make_problem(101, Model::reduced(), BiasProgram::sinusoidal(0.0, 100.0, 1.0, 0.01));
  p.newton.max_iter = 6;
  const State s = initial_state(p);
  const StepResult r = step(p, s, 0.0, 2.5e-3, 10);
  CHECK(r.substeps > 1);
  // sub-stepping lands at t = 2.5e-3 and, being finer, sits closer to a
  // 256-step reference than one full step with a generous Newton budget
  Problem ref = p;
  ref.newton.max_iter = 50;
  const StepResult coarse = step(ref, s, 0.0, 2.5e-3, 10);
  CHECK(coarse.substeps == 1);
  State fine = s;
  for (int i = 0; i < 256; ++i) fine = step(ref, fine, 2.5e-3 * i / 256, 2.5e-3 / 256, 10).state;
  CHECK(D_diff(r.state, fine) < D_diff(coarse.state, fine));
  CHECK(mass_D(r.state, p.grid) == doctest::Approx(mass_D(s, p.grid)).epsilon(1e-12));
}

TEST_CASE("implicit Euler is first order in time") {
  const Problem p = make_problem(101, Model::reduced(), BiasProgram::constant(0.0, 2.0));
  const State s0 = initial_state(p);
  const double T = 0.004;
  auto run_to = [&](int M) { return run_from(p, s0, TimeGrid{T, M, 8}, RunOptions{M, false}).snapshots.back(); };
  const State a = run_to(8), b = run_to(16), c = run_to(32), d = run_to(64);
  const double e1 = D_diff(a, b), e2 = D_diff(b, c), e3 = D_diff(c, d);
  CAPTURE(e1);
  CAPTURE(e2);
  CAPTURE(e3);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.1));

  // one step against two half steps: local difference O(dt^2), measured
  // away from the initial layer where the solution is smooth in time
  const double t0 = 0.004;
  const State s1 = run_from(p, s0, TimeGrid{t0, 40, 8}, RunOptions{40, false}).snapshots.back();
  auto local = [&](double dt) {
    const State one = step(p, s1, t0, dt).state;
    const State half = step(p, step(p, s1, t0, dt / 2).state, t0 + dt / 2, dt / 2).state;
    return D_diff(one, half);
  };
  const double l1 = local(2e-5), l2 = local(1e-5);
  CAPTURE(l1);
  CAPTURE(l2);
  CHECK(l1 / l2 == doctest::Approx(4.0).epsilon(0.15));
}
