#pragma once

// Bernoulli function, Scharfetter-Gummel edge fluxes in quasi-Fermi
// variables, block-tridiagonal direct solver and damped Newton iteration.

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace memdd {

/// B(s) = s / (exp(s) - 1), continuously extended by B(0) = 1.
double bernoulli(double s);

/// dB/ds.
double bernoulli_derivative(double s);

/// Scaled flux on an edge and its partial derivatives with respect to the
/// four endpoint unknowns.
struct EdgeFlux {
  double value = 0.0;
  double d_V_left = 0.0;
  double d_V_right = 0.0;
  double d_phi_left = 0.0;
  double d_phi_right = 0.0;
};

/// Electron edge flux
///   (1/h) (B(V_k - V_k1) e^{V_k - phi_k} - B(V_k1 - V_k) e^{V_k1 - phi_k1}).
/// This is the particle flux of n, i.e. the negative of J_n = n' - n V'.
/// Throws InvalidEdge for h <= 0.
EdgeFlux sg_flux_n(double V_k, double V_k1, double phi_k, double phi_k1, double h);

/// Flux for species u = e^{phi - V} transported by -(u' + u V') (holes and
/// vacancies):
///   (1/h) (B(V_k1 - V_k) e^{phi_k - V_k} - B(V_k - V_k1) e^{phi_k1 - V_k1}).
EdgeFlux sg_flux_pD(double V_k, double V_k1, double phi_k, double phi_k1, double h);

/// Block-tridiagonal matrix with N diagonal blocks of size m x m plus a
/// right-hand side. lower[k] couples row block k+1 to column block k,
/// upper[k] couples row block k to column block k+1.
struct BlockTridiagonalSystem {
  int block_size = 0;
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::MatrixXd> lower;
  std::vector<Eigen::MatrixXd> upper;
  std::vector<double> rhs;

  BlockTridiagonalSystem() = default;
  /// Zero-initialised system with num_blocks diagonal blocks.
  BlockTridiagonalSystem(int num_blocks, int block_size);

  int num_blocks() const noexcept { return static_cast<int>(diag.size()); }
  int dimension() const noexcept { return num_blocks() * block_size; }

  /// Entry access in global (row, col) indices; only the tridiagonal band
  /// is addressable.
  double& at(int row, int col);
  double at(int row, int col) const;

  /// y = A x.
  std::vector<double> multiply(std::span<const double> x) const;
  /// Max-norm row sum of A.
  double norm_inf() const;
  void validate() const;
};

/// Block-Thomas elimination with partially pivoted LU on each pivot block.
/// Throws LinearSolveError on a singular or badly conditioned pivot block.
std::vector<double> factor_solve_block_tridiagonal(BlockTridiagonalSystem sys);

struct NewtonOptions {
  double tol_residual = 1e-11;
  double tol_step = 1e-13;
  int max_iter = 50;
  double damping_factor = 0.5;
  double min_step_fraction = 1.0 / 64.0;

  void validate() const;
};

struct NewtonStats {
  int iterations = 0;
  double residual_norm = 0.0;
  double last_step_norm = 0.0;
  int damped_steps = 0;
  /// Accepted because the full Newton correction fell below tol_step while
  /// the residual sat above tol_residual (round-off floor).
  bool stagnated = false;
};

struct NewtonResult {
  std::vector<double> x;
  NewtonStats stats;
};

using ResidualFn = std::function<void(std::span<const double> x, std::vector<double>& r)>;
/// Returns the Jacobian at x; its rhs is ignored and overwritten by Newton.
using JacobianFn = std::function<BlockTridiagonalSystem(std::span<const double> x)>;

/// Damped Newton: full step first, then backtracking by damping_factor while
/// the residual max-norm fails to decrease, down to min_step_fraction (which
/// is then accepted). Stops once the residual is below tol_residual, or when
/// a full correction is below tol_step. Throws NoConvergence after max_iter
/// iterations.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          std::vector<double> x0, const NewtonOptions& opts = {});

double max_norm(std::span<const double> v);

}  // namespace memdd
