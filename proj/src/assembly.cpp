#include "memdd/assembly.hpp"

#include <cmath>
#include <string>

#include "memdd/errors.hpp"

namespace memdd {

std::vector<double> State::n_values() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = n(k);
  return out;
}

std::vector<double> State::p_values() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = p(k);
  return out;
}

std::vector<double> State::D_values() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = D(k);
  return out;
}

std::vector<double> State::pack() const {
  std::vector<double> x(size() * kUnknownsPerNode);
  for (std::size_t k = 0; k < size(); ++k) {
    x[kUnknownsPerNode * k + kPhiN] = phi_n[k];
    x[kUnknownsPerNode * k + kPhiP] = phi_p[k];
    x[kUnknownsPerNode * k + kPhiD] = phi_D[k];
    x[kUnknownsPerNode * k + kPot] = V[k];
  }
  return x;
}

State State::unpack(std::span<const double> x) {
  if (x.size() % kUnknownsPerNode != 0) {
    throw AssemblyError("packed state length is not a multiple of 4");
  }
  State s(x.size() / kUnknownsPerNode);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s.phi_n[k] = x[kUnknownsPerNode * k + kPhiN];
    s.phi_p[k] = x[kUnknownsPerNode * k + kPhiP];
    s.phi_D[k] = x[kUnknownsPerNode * k + kPhiD];
    s.V[k] = x[kUnknownsPerNode * k + kPot];
  }
  return s;
}

bool State::all_finite() const {
  for (std::size_t k = 0; k < size(); ++k) {
    if (!std::isfinite(phi_n[k]) || !std::isfinite(phi_p[k]) || !std::isfinite(phi_D[k]) ||
        !std::isfinite(V[k])) {
      return false;
    }
  }
  return true;
}

void set_vacancy_density(State& s, std::span<const double> values) {
  if (values.size() != s.size()) throw AssemblyError("vacancy profile size mismatch");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!(values[k] > 0.0)) {
      throw AssemblyError("vacancy density must be positive in quasi-Fermi form");
    }
    s.phi_D[k] = std::log(values[k]) + s.V[k];
  }
}

EdgeFluxes edge_fluxes(const State& x, const Grid& grid) {
  EdgeFluxes f;
  const std::size_t ne = grid.num_edges();
  f.n.resize(ne);
  f.p.resize(ne);
  f.D.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const double h = grid.edge(e);
    f.n[e] = sg_flux_n(x.V[e], x.V[e + 1], x.phi_n[e], x.phi_n[e + 1], h).value;
    f.p[e] = sg_flux_pD(x.V[e], x.V[e + 1], x.phi_p[e], x.phi_p[e + 1], h).value;
    f.D[e] = sg_flux_pD(x.V[e], x.V[e + 1], x.phi_D[e], x.phi_D[e + 1], h).value;
  }
  return f;
}

namespace {

void check_inputs(const State& x, const StepContext& ctx, const Grid& grid,
                  const DeviceConfig& device) {
  if (x.size() != grid.size()) throw AssemblyError("state size does not match the grid");
  if (ctx.prev == nullptr) throw AssemblyError("step context has no previous state");
  if (ctx.prev->size() != grid.size()) {
    throw AssemblyError("previous state size does not match the grid");
  }
  if (!(ctx.dt > 0.0) || !std::isfinite(ctx.dt)) {
    throw AssemblyError("time step must be positive and finite");
  }
  if (ctx.model.kind == ModelKind::full && !(ctx.model.eps > 0.0)) {
    throw AssemblyError("full model needs eps > 0");
  }
  if (device.A.size() != grid.size()) throw AssemblyError("doping profile size mismatch");
  if (!x.all_finite()) throw AssemblyError("non-finite entry in the state");
  if (!ctx.prev->all_finite()) throw AssemblyError("non-finite entry in the previous state");
}

// Row/column index of component c at node k.
inline int idx(std::size_t k, int c) { return static_cast<int>(k) * kUnknownsPerNode + c; }

void assemble(const State& x, const StepContext& ctx, const Grid& grid,
              const DeviceConfig& device, std::vector<double>* r, BlockTridiagonalSystem* J) {
  check_inputs(x, ctx, grid, device);
  const std::size_t N = grid.size();
  const State& prev = *ctx.prev;
  const bool full = ctx.model.kind == ModelKind::full;
  const double eps = full ? ctx.model.eps : 0.0;
  const double inv_dt = 1.0 / ctx.dt;
  const double lambda2 = device.lambda2;

  if (r) r->assign(N * kUnknownsPerNode, 0.0);
  if (J) *J = BlockTridiagonalSystem(static_cast<int>(N), kUnknownsPerNode);

  auto add_J = [&](std::size_t row_node, int row_c, std::size_t col_node, int col_c, double v) {
    J->at(idx(row_node, row_c), idx(col_node, col_c)) += v;
  };
  auto is_contact = [&](std::size_t k) { return k == 0 || k == N - 1; };

  // Edge fluxes enter with + at the left node and - at the right node.
  // Dirichlet rows (n, p, V at contacts) take no flux contributions.
  for (std::size_t e = 0; e + 1 < N; ++e) {
    const double h = grid.edge(e);
    const std::size_t a = e;
    const std::size_t b = e + 1;
    struct Species {
      int component;
      EdgeFlux flux;
      bool dirichlet_at_contacts;
    };
    const Species species[3] = {
        {kPhiN, sg_flux_n(x.V[a], x.V[b], x.phi_n[a], x.phi_n[b], h), true},
        {kPhiP, sg_flux_pD(x.V[a], x.V[b], x.phi_p[a], x.phi_p[b], h), true},
        {kPhiD, sg_flux_pD(x.V[a], x.V[b], x.phi_D[a], x.phi_D[b], h), false},
    };
    for (const Species& s : species) {
      if (s.component == kPhiD && ctx.freeze_vacancies) continue;
      const std::pair<std::size_t, double> targets[2] = {{a, 1.0}, {b, -1.0}};
      for (const auto& [node, sign] : targets) {
        if (s.dirichlet_at_contacts && is_contact(node)) continue;
        if (r) (*r)[idx(node, s.component)] += sign * s.flux.value;
        if (J) {
          add_J(node, s.component, a, kPot, sign * s.flux.d_V_left);
          add_J(node, s.component, b, kPot, sign * s.flux.d_V_right);
          add_J(node, s.component, a, s.component, sign * s.flux.d_phi_left);
          add_J(node, s.component, b, s.component, sign * s.flux.d_phi_right);
        }
      }
    }
  }

  for (std::size_t k = 0; k < N; ++k) {
    const double w = grid.width(k);
    const double n = x.n(k);
    const double p = x.p(k);
    const double D = x.D(k);

    // Vacancy storage term, present at every node including the contacts.
    const double storage = ctx.freeze_vacancies ? w : w * inv_dt;
    if (r) (*r)[idx(k, kPhiD)] += storage * (D - prev.D(k));
    if (J) {
      add_J(k, kPhiD, k, kPhiD, storage * D);
      add_J(k, kPhiD, k, kPot, -storage * D);
    }

    if (is_contact(k)) {
      const double U = k == 0 ? ctx.bc.U_left : ctx.bc.U_right;
      const double Vc = k == 0 ? ctx.bc.V_left : ctx.bc.V_right;
      if (r) {
        (*r)[idx(k, kPhiN)] = x.phi_n[k] - U;
        (*r)[idx(k, kPhiP)] = x.phi_p[k] - U;
        (*r)[idx(k, kPot)] = x.V[k] - Vc;
      }
      if (J) {
        add_J(k, kPhiN, k, kPhiN, 1.0);
        add_J(k, kPhiP, k, kPhiP, 1.0);
        add_J(k, kPot, k, kPot, 1.0);
      }
      continue;
    }

    if (full) {
      const double c = eps * w * inv_dt;
      if (r) {
        (*r)[idx(k, kPhiN)] += c * (n - prev.n(k));
        (*r)[idx(k, kPhiP)] += c * (p - prev.p(k));
      }
      if (J) {
        add_J(k, kPhiN, k, kPhiN, -c * n);
        add_J(k, kPhiN, k, kPot, c * n);
        add_J(k, kPhiP, k, kPhiP, c * p);
        add_J(k, kPhiP, k, kPot, -c * p);
      }
    }

    const double hl = grid.edge(k - 1);
    const double hr = grid.edge(k);
    if (r) {
      const double laplace = lambda2 * ((x.V[k + 1] - x.V[k]) / hr - (x.V[k] - x.V[k - 1]) / hl);
      (*r)[idx(k, kPot)] = laplace - w * (n - p - D + device.A[k]);
    }
    if (J) {
      add_J(k, kPot, k - 1, kPot, lambda2 / hl);
      add_J(k, kPot, k + 1, kPot, lambda2 / hr);
      add_J(k, kPot, k, kPot, -lambda2 / hl - lambda2 / hr - w * (n + p + D));
      add_J(k, kPot, k, kPhiN, w * n);
      add_J(k, kPot, k, kPhiP, w * p);
      add_J(k, kPot, k, kPhiD, w * D);
    }
  }

  if (r) {
    for (double v : *r) {
      if (!std::isfinite(v)) {
        // Overflowing densities; report as infinite so Newton backtracks.
        for (double& u : *r) u = HUGE_VAL;
        break;
      }
    }
  }
}

}  // namespace

std::vector<double> residual(const State& x, const StepContext& ctx, const Grid& grid,
                             const DeviceConfig& device) {
  std::vector<double> r;
  assemble(x, ctx, grid, device, &r, nullptr);
  return r;
}

BlockTridiagonalSystem jacobian(const State& x, const StepContext& ctx, const Grid& grid,
                                const DeviceConfig& device) {
  BlockTridiagonalSystem J;
  assemble(x, ctx, grid, device, nullptr, &J);
  return J;
}

std::vector<double> residual_reduced(const State& x, const StepContext& ctx, const Grid& grid,
                                     const DeviceConfig& device) {
  if (ctx.model.kind != ModelKind::reduced) {
    throw AssemblyError("residual_reduced called with a full-model context");
  }
  return residual(x, ctx, grid, device);
}

std::vector<double> residual_full(const State& x, const StepContext& ctx, const Grid& grid,
                                  const DeviceConfig& device) {
  if (ctx.model.kind != ModelKind::full) {
    throw AssemblyError("residual_full called with a reduced-model context");
  }
  return residual(x, ctx, grid, device);
}

}  // namespace memdd
