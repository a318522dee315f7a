#pragma once

// Finite-volume residuals and analytic Jacobians of the reduced and full
// models in quasi-Fermi variables. Unknowns are interleaved per node as
// (phi_n, phi_p, phi_D, V), which makes the Jacobian block tridiagonal.

#include <cmath>
#include <span>
#include <vector>

#include "memdd/device_model.hpp"
#include "memdd/numerics.hpp"

namespace memdd {

inline constexpr int kUnknownsPerNode = 4;
inline constexpr int kPhiN = 0;
inline constexpr int kPhiP = 1;
inline constexpr int kPhiD = 2;
inline constexpr int kPot = 3;

/// Per-node potentials in thermal-voltage units. Densities are
/// n = e^{V - phi_n}, p = e^{phi_p - V}, D = e^{phi_D - V}.
struct State {
  std::vector<double> phi_n;
  std::vector<double> phi_p;
  std::vector<double> phi_D;
  std::vector<double> V;

  State() = default;
  explicit State(std::size_t num_nodes)
      : phi_n(num_nodes, 0.0), phi_p(num_nodes, 0.0), phi_D(num_nodes, 0.0), V(num_nodes, 0.0) {}

  std::size_t size() const noexcept { return V.size(); }
  double n(std::size_t k) const { return std::exp(V[k] - phi_n[k]); }
  double p(std::size_t k) const { return std::exp(phi_p[k] - V[k]); }
  double D(std::size_t k) const { return std::exp(phi_D[k] - V[k]); }

  std::vector<double> n_values() const;
  std::vector<double> p_values() const;
  std::vector<double> D_values() const;

  /// Interleaved (phi_n, phi_p, phi_D, V) per node.
  std::vector<double> pack() const;
  static State unpack(std::span<const double> x);

  bool all_finite() const;

  friend bool operator==(const State&, const State&) = default;
};

/// Sets phi_D so that D = values at the current V.
void set_vacancy_density(State& s, std::span<const double> values);

enum class ModelKind { reduced, full };

struct Model {
  ModelKind kind = ModelKind::reduced;
  double eps = 1.0;  ///< relaxation parameter, full model only

  static Model reduced() { return {ModelKind::reduced, 1.0}; }
  static Model full(double eps) { return {ModelKind::full, eps}; }
};

/// One implicit Euler step from prev (at t_new - dt) to t_new; the boundary
/// data are evaluated at t_new.
struct StepContext {
  const State* prev = nullptr;
  double dt = 0.0;
  double t_new = 0.0;
  BoundaryData bc;
  Model model;
  /// Vacancy rows become D = D_prev (no transport). Used to build
  /// quasi-static electron/hole states for a given vacancy profile.
  bool freeze_vacancies = false;
};

/// Length 4N residual: continuity rows for n, p and D, then the flux-form
/// Poisson row, per node. Contacts carry Dirichlet rows for phi_n, phi_p and
/// V; D has zero flux through both end faces. Throws AssemblyError for
/// non-finite input or an invalid context.
std::vector<double> residual(const State& x, const StepContext& ctx, const Grid& grid,
                             const DeviceConfig& device);

/// Analytic Jacobian of residual() in the interleaved ordering.
BlockTridiagonalSystem jacobian(const State& x, const StepContext& ctx, const Grid& grid,
                                const DeviceConfig& device);

/// Residual of the reduced model rows; equivalent to residual() with a
/// reduced context.
std::vector<double> residual_reduced(const State& x, const StepContext& ctx, const Grid& grid,
                                     const DeviceConfig& device);

/// Residual of the full eps-scaled model.
std::vector<double> residual_full(const State& x, const StepContext& ctx, const Grid& grid,
                                  const DeviceConfig& device);

/// Electron and hole edge fluxes (sg_flux_n, sg_flux_pD) on every edge.
struct EdgeFluxes {
  std::vector<double> n;
  std::vector<double> p;
  std::vector<double> D;
};
EdgeFluxes edge_fluxes(const State& x, const Grid& grid);

}  // namespace memdd
