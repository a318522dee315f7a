#pragma once

// Grids, scaled device parameters, built-in potential and contact data for
// the 1D memristor model on the scaled domain (0, 1).

#include <cstddef>
#include <span>
#include <vector>

namespace memdd {

/// Node positions x_1 = 0 < ... < x_N = length with finite-volume cell
/// measures |w_k|; w_k spans the midpoints to the neighbouring nodes, so the
/// two boundary cells are half cells.
class Grid {
 public:
  /// Builds the control volumes for the given node positions.
  /// Throws InvalidGrid for fewer than three nodes or non-increasing positions.
  explicit Grid(std::vector<double> nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return nodes_.size() - 1; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> cell_widths() const noexcept { return widths_; }
  double x(std::size_t k) const { return nodes_[k]; }
  double width(std::size_t k) const { return widths_[k]; }
  /// Length of edge (k, k+1).
  double edge(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  double length() const noexcept { return nodes_.back() - nodes_.front(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::vector<double> nodes_;
  std::vector<double> widths_;
};

Grid build_uniform_grid(int num_nodes, double length = 1.0);

/// Physical constants used to build the scaled parameters and to convert
/// outputs back to volts and A/cm^2.
struct ScalingBlock {
  double eps_s = 8.85e-13;  ///< permittivity [As/Vcm]
  double U_T = 0.026;       ///< thermal voltage [V]
  double q = 1.6e-19;       ///< elementary charge [As]
  double L = 5e-6;          ///< device length [cm]
  double n_i = 2e19;        ///< intrinsic density [cm^-3]
  double J0 = 400.0;        ///< reference current density [A/cm^2]

  void validate() const;
  friend bool operator==(const ScalingBlock&, const ScalingBlock&) = default;
};

/// lambda^2 = eps_s U_T / (q L^2 n_i).
double scaled_debye_length(const ScalingBlock& s);

/// Contact potential for which exp(V) - exp(-V) = D_e - A.
double built_in_potential(double D_e, double A);

struct DeviceConfig {
  double lambda2 = 0.0;         ///< scaled squared Debye length
  double eps = 1.0;             ///< relaxation parameter of the full model
  std::vector<double> A;        ///< acceptor doping per node
  std::vector<double> D_init;   ///< initial vacancy density per node
  double D_e = 25.0;            ///< electrode dopant concentration
  ScalingBlock scaling;

  /// Checks positivity constraints and that the profiles match the grid.
  void validate(const Grid& grid) const;
};

std::vector<double> constant_profile(const Grid& grid, double value);

/// Piecewise-constant profile: values[i] on [breaks[i-1], breaks[i]), with
/// breaks strictly increasing and values.size() == breaks.size() + 1.
std::vector<double> piecewise_profile(const Grid& grid, std::span<const double> breaks,
                                      std::span<const double> values);

/// Device with constant doping; lambda2 taken from the scaling block.
DeviceConfig make_constant_device(const Grid& grid, double D_init, double A, double D_e,
                                  double eps = 1.0, const ScalingBlock& scaling = {});

enum class BiasKind { constant, ramp, sinusoidal };

/// Contact potentials in thermal-voltage units. U0 is held constant; UL is
/// constant, a linear ramp from UL to UL_end over [0, T_f], or
/// amplitude * sin(2 pi periods t / T_f).
struct BiasProgram {
  BiasKind kind = BiasKind::constant;
  double U0_value = 0.0;
  double UL_value = 0.0;
  double UL_end = 0.0;
  double amplitude = 0.0;
  double periods = 1.0;
  double T_f = 1.0;

  double U0(double t) const;
  double UL(double t) const;

  static BiasProgram constant(double U0, double UL);
  static BiasProgram ramp(double U0, double UL_start, double UL_end, double T_f);
  static BiasProgram sinusoidal(double U0, double amplitude, double periods, double T_f);
};

/// Dirichlet data at one instant. phi_n = phi_p = U and V = V_bi + U at each
/// contact, i.e. n = exp(V_bi), p = exp(-V_bi) there.
struct BoundaryData {
  double U_left = 0.0;
  double U_right = 0.0;
  double Vbi_left = 0.0;
  double Vbi_right = 0.0;
  double V_left = 0.0;
  double V_right = 0.0;
  double n_bar = 1.0;  ///< contact electron density, left contact
  double p_bar = 1.0;  ///< contact hole density, left contact
  double n_bar_right = 1.0;
  double p_bar_right = 1.0;
  double c_n = 1.0;    ///< n_bar exp(-V_bar) at the left contact
  double c_p = 1.0;    ///< p_bar exp(V_bar) at the left contact

  double applied_voltage() const noexcept { return U_right - U_left; }
  /// Affine-in-x extension of the potential contact values.
  double V_bar(double x, double length = 1.0) const noexcept {
    return V_left + (V_right - V_left) * x / length;
  }
  double n_bar_at(double x, double length = 1.0) const noexcept {
    return n_bar + (n_bar_right - n_bar) * x / length;
  }
  double p_bar_at(double x, double length = 1.0) const noexcept {
    return p_bar + (p_bar_right - p_bar) * x / length;
  }
};

BoundaryData boundary_data(const DeviceConfig& device, const BiasProgram& bias, double t);

/// Solves lambda^2 V'' = exp(V) - exp(-V) - D_init + A with V = V_bi + U at
/// the contacts (Newton, 1x1 blocks). Returns V per node.
std::vector<double> initial_potential(const Grid& grid, const DeviceConfig& device,
                                      const BoundaryData& bc);

/// Nodewise residual of the discrete nonlinear Poisson problem solved by
/// initial_potential (Dirichlet rows are V - V_contact).
std::vector<double> initial_potential_residual(const Grid& grid, const DeviceConfig& device,
                                               const BoundaryData& bc,
                                               std::span<const double> V);

}  // namespace memdd
