#pragma once

// Discrete free energies, entropy production, relative free energy, masses,
// terminal current and trajectory distances. Cell terms use the control
// volume measures; gradient terms use edge differences weighted by 1/h. The
// reference extensions V_bar, n_bar, p_bar are affine in x between the
// contact values, and D_bar = exp(-V_bar).

#include <span>
#include <vector>

#include "memdd/assembly.hpp"
#include "memdd/device_model.hpp"

namespace memdd {

struct Trajectory;

struct DiagnosticsRecord {
  double t = 0.0;
  double H_full = 0.0;
  double H_reduced = 0.0;
  double entropy_production_D = 0.0;
  /// sum of n|grad phi_n|^2 + p|grad phi_p|^2, divided by eps for the full
  /// model; reported only.
  double entropy_production_np = 0.0;
  double mass_D = 0.0;
  double current = 0.0;
  double applied_voltage = 0.0;
  int newton_iters = 0;
};

/// f0(s) = (s - 1) e^s + 1, evaluated without cancellation near 0.
double f0(double s);

double free_energy_full(const State& x, const BoundaryData& bc, const Grid& grid,
                        const DeviceConfig& device);

double free_energy_reduced(const State& x, const BoundaryData& bc, const Grid& grid,
                           const DeviceConfig& device);

/// H1[D|D0] + H2[V|V0] with the weights c_n, c_p from the boundary data.
double relative_free_energy(const State& x, const State& reference, const BoundaryData& bc,
                            const Grid& grid, const DeviceConfig& device);

/// sum_e h * D_harm * (dphi_D / h)^2 with the harmonic mean of the end values.
double entropy_production_D(const State& x, const Grid& grid);

/// Electron and hole analogue of entropy_production_D (no 1/eps factor).
double entropy_production_np(const State& x, const Grid& grid);

double mass_D(const State& x, const Grid& grid);

/// Total current J_n + J_p on each edge, where J_n = n' - n V' is the
/// negative of the electron particle flux and J_p equals the hole flux.
std::vector<double> current_profile(const State& x, const Grid& grid);

/// J_n + J_p on the first edge (at the left contact), scaled units.
double terminal_current(const State& x, const Grid& grid);

/// (1/2 eps)(|grad(log n_bar - V_bar)|^2 + |grad(log p_bar + V_bar)|^2),
/// maximised over the domain. Zero for boundary data in thermal equilibrium.
double lambda_eps(const BoundaryData& bc, double eps, double length = 1.0);

DiagnosticsRecord make_record(double t, const State& x, const BoundaryData& bc,
                              const Grid& grid, const DeviceConfig& device, const Model& model,
                              int newton_iters);

enum class Species { n, p, D };

/// sum_m (t_m - t_{m-1}) sum_k |w_k| |u^A_k - u^B_k| over the snapshots
/// after t = 0. Throws ComparisonError for mismatched snapshot times or sizes.
double l1_trajectory_distance(const Trajectory& a, const Trajectory& b, const Grid& grid,
                              Species species = Species::D);

}  // namespace memdd
