#include "memdd/device_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "memdd/errors.hpp"
#include "memdd/numerics.hpp"

namespace memdd {

Grid::Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n < 3) throw InvalidGrid("grid needs at least 3 nodes, got " + std::to_string(n));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(nodes_[k + 1] > nodes_[k])) {
      throw InvalidGrid("grid nodes must be strictly increasing (index " + std::to_string(k) + ")");
    }
  }
  widths_.resize(n);
  widths_[0] = 0.5 * (nodes_[1] - nodes_[0]);
  widths_[n - 1] = 0.5 * (nodes_[n - 1] - nodes_[n - 2]);
  for (std::size_t k = 1; k + 1 < n; ++k) widths_[k] = 0.5 * (nodes_[k + 1] - nodes_[k - 1]);
}

Grid build_uniform_grid(int num_nodes, double length) {
  if (num_nodes < 3) {
    throw InvalidGrid("grid needs at least 3 nodes, got " + std::to_string(num_nodes));
  }
  if (!(length > 0.0)) throw InvalidGrid("grid length must be positive");
  std::vector<double> x(static_cast<std::size_t>(num_nodes));
  const double h = length / (num_nodes - 1);
  for (int k = 0; k < num_nodes; ++k) x[k] = k * h;
  x.back() = length;
  return Grid(std::move(x));
}

void ScalingBlock::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidConfig(std::string("scaling parameter ") + name + " must be positive");
    }
  };
  positive(eps_s, "eps_s");
  positive(U_T, "U_T");
  positive(q, "q");
  positive(L, "L");
  positive(n_i, "n_i");
  positive(J0, "J0");
}

double scaled_debye_length(const ScalingBlock& s) {
  s.validate();
  return s.eps_s * s.U_T / (s.q * s.L * s.L * s.n_i);
}

double built_in_potential(double D_e, double A) {
  const double c = D_e - A;
  // log((c + sqrt(c^2 + 4)) / 2) = asinh(c / 2), without cancellation for c < 0.
  return std::asinh(0.5 * c);
}

void DeviceConfig::validate(const Grid& grid) const {
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) {
    throw InvalidConfig("lambda2 must be positive");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidConfig("eps must be positive");
  if (!std::isfinite(D_e)) throw InvalidConfig("D_e must be finite");
  if (A.size() != grid.size() || D_init.size() != grid.size()) {
    throw InvalidConfig("doping profiles must have one value per grid node");
  }
  for (double a : A) {
    if (!std::isfinite(a)) throw InvalidConfig("acceptor doping must be finite");
  }
  for (double d : D_init) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw InvalidConfig("initial vacancy density must be nonnegative");
    }
  }
  scaling.validate();
}

std::vector<double> constant_profile(const Grid& grid, double value) {
  return std::vector<double>(grid.size(), value);
}

std::vector<double> piecewise_profile(const Grid& grid, std::span<const double> breaks,
                                      std::span<const double> values) {
  if (values.size() != breaks.size() + 1) {
    throw InvalidConfig("piecewise profile needs one more value than breakpoints");
  }
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) {
      throw InvalidConfig("piecewise profile breakpoints must be increasing");
    }
  }
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::size_t piece = 0;
    while (piece < breaks.size() && grid.x(k) >= breaks[piece]) ++piece;
    out[k] = values[piece];
  }
  return out;
}

DeviceConfig make_constant_device(const Grid& grid, double D_init, double A, double D_e,
                                  double eps, const ScalingBlock& scaling) {
  DeviceConfig d;
  d.scaling = scaling;
  d.lambda2 = scaled_debye_length(scaling);
  d.eps = eps;
  d.A = constant_profile(grid, A);
  d.D_init = constant_profile(grid, D_init);
  d.D_e = D_e;
  d.validate(grid);
  return d;
}

double BiasProgram::U0(double /*t*/) const { return U0_value; }

double BiasProgram::UL(double t) const {
  switch (kind) {
    case BiasKind::constant:
      return UL_value;
    case BiasKind::ramp:
      return UL_value + (UL_end - UL_value) * (t / T_f);
    case BiasKind::sinusoidal:
      return amplitude * std::sin(2.0 * std::numbers::pi * periods * t / T_f);
  }
  return UL_value;
}

BiasProgram BiasProgram::constant(double U0, double UL) {
  BiasProgram b;
  b.kind = BiasKind::constant;
  b.U0_value = U0;
  b.UL_value = UL;
  return b;
}

BiasProgram BiasProgram::ramp(double U0, double UL_start, double UL_end, double T_f) {
  if (!(T_f > 0.0)) throw InvalidConfig("ramp bias needs a positive final time");
  BiasProgram b;
  b.kind = BiasKind::ramp;
  b.U0_value = U0;
  b.UL_value = UL_start;
  b.UL_end = UL_end;
  b.T_f = T_f;
  return b;
}

BiasProgram BiasProgram::sinusoidal(double U0, double amplitude, double periods, double T_f) {
  if (!(T_f > 0.0)) throw InvalidConfig("sinusoidal bias needs a positive final time");
  BiasProgram b;
  b.kind = BiasKind::sinusoidal;
  b.U0_value = U0;
  b.amplitude = amplitude;
  b.periods = periods;
  b.T_f = T_f;
  return b;
}

BoundaryData boundary_data(const DeviceConfig& device, const BiasProgram& bias, double t) {
  BoundaryData bc;
  bc.U_left = bias.U0(t);
  bc.U_right = bias.UL(t);
  bc.Vbi_left = built_in_potential(device.D_e, device.A.front());
  bc.Vbi_right = built_in_potential(device.D_e, device.A.back());
  bc.V_left = bc.Vbi_left + bc.U_left;
  bc.V_right = bc.Vbi_right + bc.U_right;
  bc.n_bar = std::exp(bc.Vbi_left);
  bc.p_bar = std::exp(-bc.Vbi_left);
  bc.n_bar_right = std::exp(bc.Vbi_right);
  bc.p_bar_right = std::exp(-bc.Vbi_right);
  bc.c_n = bc.n_bar * std::exp(-bc.V_left);
  bc.c_p = bc.p_bar * std::exp(bc.V_left);
  return bc;
}

namespace {

double poisson_row(const Grid& grid, const DeviceConfig& device, std::span<const double> V,
                   std::size_t k) {
  const double flux_right = (V[k + 1] - V[k]) / grid.edge(k);
  const double flux_left = (V[k] - V[k - 1]) / grid.edge(k - 1);
  const double charge = std::exp(V[k]) - std::exp(-V[k]) - device.D_init[k] + device.A[k];
  return device.lambda2 * (flux_right - flux_left) - grid.width(k) * charge;
}

}  // namespace

std::vector<double> initial_potential_residual(const Grid& grid, const DeviceConfig& device,
                                               const BoundaryData& bc,
                                               std::span<const double> V) {
  const std::size_t n = grid.size();
  std::vector<double> r(n);
  r[0] = V[0] - bc.V_left;
  r[n - 1] = V[n - 1] - bc.V_right;
  for (std::size_t k = 1; k + 1 < n; ++k) r[k] = poisson_row(grid, device, V, k);
  return r;
}

std::vector<double> initial_potential(const Grid& grid, const DeviceConfig& device,
                                      const BoundaryData& bc) {
  device.validate(grid);
  const std::size_t n = grid.size();

  // Start from the local charge-neutral potential, clamped to the contacts.
  std::vector<double> V0(n);
  for (std::size_t k = 0; k < n; ++k) {
    V0[k] = std::asinh(0.5 * (device.D_init[k] - device.A[k]));
  }
  V0.front() = bc.V_left;
  V0.back() = bc.V_right;

  auto residual = [&](std::span<const double> V, std::vector<double>& r) {
    r = initial_potential_residual(grid, device, bc, V);
  };
  auto jacobian = [&](std::span<const double> V) {
    BlockTridiagonalSystem J(static_cast<int>(n), 1);
    J.diag[0](0, 0) = 1.0;
    J.diag[n - 1](0, 0) = 1.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double a = device.lambda2 / grid.edge(k - 1);
      const double c = device.lambda2 / grid.edge(k);
      J.lower[k - 1](0, 0) = a;
      J.upper[k](0, 0) = c;
      J.diag[k](0, 0) = -a - c - grid.width(k) * (std::exp(V[k]) + std::exp(-V[k]));
    }
    return J;
  };
  NewtonOptions opts;
  opts.max_iter = 200;
  return newton_solve(residual, jacobian, std::move(V0), opts).x;
}

}  // namespace memdd
