#include "memdd/diagnostics.hpp"

#include <cmath>
#include <string>

#include "memdd/errors.hpp"
#include "memdd/numerics.hpp"
#include "memdd/solver.hpp"

namespace memdd {

double f0(double s) {
  if (std::fabs(s) < 0.1) {
    // sum_{k>=2} (k-1) s^k / k!
    double term = s;
    double sum = 0.0;
    for (int k = 2; k <= 16; ++k) {
      term *= s / k;
      sum += (k - 1) * term;
    }
    return sum;
  }
  return (s - 1.0) * std::exp(s) + 1.0;
}

namespace {

void require_finite(const State& x, const Grid& grid) {
  if (x.size() != grid.size()) throw DiagnosticError("state size does not match the grid");
  if (!x.all_finite()) throw DiagnosticError("non-finite state in diagnostics");
}

double electric_energy(const State& x, const BoundaryData& bc, const Grid& grid,
                       double lambda2) {
  const double L = grid.length();
  double sum = 0.0;
  for (std::size_t e = 0; e < grid.num_edges(); ++e) {
    const double w_a = x.V[e] - bc.V_bar(grid.x(e), L);
    const double w_b = x.V[e + 1] - bc.V_bar(grid.x(e + 1), L);
    const double d = w_b - w_a;
    sum += d * d / grid.edge(e);
  }
  return 0.5 * lambda2 * sum;
}

double harmonic_mean(double a, double b) {
  const double s = a + b;
  return s > 0.0 ? 2.0 * a * b / s : 0.0;
}

}  // namespace

double free_energy_full(const State& x, const BoundaryData& bc, const Grid& grid,
                        const DeviceConfig& device) {
  require_finite(x, grid);
  const double L = grid.length();
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double xk = grid.x(k);
    const double log_n = x.V[k] - x.phi_n[k];
    const double log_p = x.phi_p[k] - x.V[k];
    const double log_D = x.phi_D[k] - x.V[k];
    const double entropy = x.n(k) * (log_n - std::log(bc.n_bar_at(xk, L)) - 1.0) +
                           x.p(k) * (log_p - std::log(bc.p_bar_at(xk, L)) - 1.0) +
                           x.D(k) * (log_D - 1.0 + bc.V_bar(xk, L));
    sum += grid.width(k) * entropy;
  }
  return sum + electric_energy(x, bc, grid, device.lambda2);
}

double free_energy_reduced(const State& x, const BoundaryData& bc, const Grid& grid,
                           const DeviceConfig& device) {
  require_finite(x, grid);
  const double L = grid.length();
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double xk = grid.x(k);
    const double vbar = bc.V_bar(xk, L);
    const double D = x.D(k);
    // D log(D / D_bar) with D_bar = exp(-V_bar).
    const double term = D * (x.phi_D[k] - x.V[k] + vbar) - D +
                        bc.n_bar_at(xk, L) * f0(x.V[k] - vbar) +
                        bc.p_bar_at(xk, L) * f0(vbar - x.V[k]);
    sum += grid.width(k) * term;
  }
  return sum + electric_energy(x, bc, grid, device.lambda2);
}

double relative_free_energy(const State& x, const State& reference, const BoundaryData& bc,
                            const Grid& grid, const DeviceConfig& device) {
  require_finite(x, grid);
  require_finite(reference, grid);
  double h1 = 0.0;
  double h2_cells = 0.0;
  double grad = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.width(k);
    const double D = x.D(k);
    const double D0 = reference.D(k);
    const double log_ratio = (x.phi_D[k] - x.V[k]) - (reference.phi_D[k] - reference.V[k]);
    h1 += w * (D * log_ratio - D + D0);
    const double dv = x.V[k] - reference.V[k];
    h2_cells += w * (bc.c_n * std::exp(reference.V[k]) * f0(dv) +
                     bc.c_p * std::exp(-reference.V[k]) * f0(-dv));
  }
  for (std::size_t e = 0; e < grid.num_edges(); ++e) {
    const double d = (x.V[e + 1] - reference.V[e + 1]) - (x.V[e] - reference.V[e]);
    grad += d * d / grid.edge(e);
  }
  return h1 + h2_cells + 0.5 * device.lambda2 * grad;
}

double entropy_production_D(const State& x, const Grid& grid) {
  require_finite(x, grid);
  double sum = 0.0;
  for (std::size_t e = 0; e < grid.num_edges(); ++e) {
    const double d = x.phi_D[e + 1] - x.phi_D[e];
    sum += harmonic_mean(x.D(e), x.D(e + 1)) * d * d / grid.edge(e);
  }
  return sum;
}

double entropy_production_np(const State& x, const Grid& grid) {
  require_finite(x, grid);
  double sum = 0.0;
  for (std::size_t e = 0; e < grid.num_edges(); ++e) {
    const double dn = x.phi_n[e + 1] - x.phi_n[e];
    const double dp = x.phi_p[e + 1] - x.phi_p[e];
    sum += (harmonic_mean(x.n(e), x.n(e + 1)) * dn * dn +
            harmonic_mean(x.p(e), x.p(e + 1)) * dp * dp) /
           grid.edge(e);
  }
  return sum;
}

double mass_D(const State& x, const Grid& grid) {
  require_finite(x, grid);
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) sum += grid.width(k) * x.D(k);
  return sum;
}

std::vector<double> current_profile(const State& x, const Grid& grid) {
  require_finite(x, grid);
  const EdgeFluxes f = edge_fluxes(x, grid);
  std::vector<double> j(f.n.size());
  for (std::size_t e = 0; e < j.size(); ++e) j[e] = -f.n[e] + f.p[e];
  return j;
}

double terminal_current(const State& x, const Grid& grid) {
  require_finite(x, grid);
  const double h = grid.edge(0);
  const double fn = sg_flux_n(x.V[0], x.V[1], x.phi_n[0], x.phi_n[1], h).value;
  const double fp = sg_flux_pD(x.V[0], x.V[1], x.phi_p[0], x.phi_p[1], h).value;
  return -fn + fp;
}

double lambda_eps(const BoundaryData& bc, double eps, double length) {
  if (!(eps > 0.0)) throw DiagnosticError("lambda_eps needs eps > 0");
  const double dV = (bc.V_right - bc.V_left) / length;
  const double dn = (bc.n_bar_right - bc.n_bar) / length;
  const double dp = (bc.p_bar_right - bc.p_bar) / length;
  double best = 0.0;
  for (double x : {0.0, length}) {
    const double gn = dn / bc.n_bar_at(x, length) - dV;
    const double gp = dp / bc.p_bar_at(x, length) + dV;
    best = std::max(best, gn * gn + gp * gp);
  }
  return best / (2.0 * eps);
}

DiagnosticsRecord make_record(double t, const State& x, const BoundaryData& bc,
                              const Grid& grid, const DeviceConfig& device, const Model& model,
                              int newton_iters) {
  DiagnosticsRecord r;
  r.t = t;
  r.H_full = free_energy_full(x, bc, grid, device);
  r.H_reduced = free_energy_reduced(x, bc, grid, device);
  r.entropy_production_D = entropy_production_D(x, grid);
  r.entropy_production_np = entropy_production_np(x, grid);
  if (model.kind == ModelKind::full) r.entropy_production_np /= model.eps;
  r.mass_D = mass_D(x, grid);
  r.current = terminal_current(x, grid);
  r.applied_voltage = bc.applied_voltage();
  r.newton_iters = newton_iters;
  return r;
}

double l1_trajectory_distance(const Trajectory& a, const Trajectory& b, const Grid& grid,
                              Species species) {
  if (a.times.size() != b.times.size() || a.snapshots.size() != b.snapshots.size() ||
      a.times.size() != a.snapshots.size()) {
    throw ComparisonError("trajectories have different numbers of snapshots");
  }
  for (std::size_t m = 0; m < a.times.size(); ++m) {
    if (a.times[m] != b.times[m]) throw ComparisonError("trajectories use different time grids");
    if (a.snapshots[m].size() != grid.size() || b.snapshots[m].size() != grid.size()) {
      throw ComparisonError("snapshot size does not match the grid");
    }
  }
  auto density = [species](const State& s, std::size_t k) {
    switch (species) {
      case Species::n:
        return s.n(k);
      case Species::p:
        return s.p(k);
      case Species::D:
        return s.D(k);
    }
    return 0.0;
  };
  double total = 0.0;
  for (std::size_t m = 1; m < a.times.size(); ++m) {
    double spatial = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      spatial += grid.width(k) * std::fabs(density(a.snapshots[m], k) - density(b.snapshots[m], k));
    }
    total += (a.times[m] - a.times[m - 1]) * spatial;
  }
  return total;
}

}  // namespace memdd
