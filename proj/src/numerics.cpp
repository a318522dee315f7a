#include "memdd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "memdd/errors.hpp"

namespace memdd {

double bernoulli(double s) {
  if (std::fabs(s) < 1e-5) {
    const double s2 = s * s;
    return 1.0 - 0.5 * s + s2 / 12.0 - s2 * s2 / 720.0;
  }
  return s / std::expm1(s);
}

double bernoulli_derivative(double s) {
  if (std::fabs(s) < 1e-2) {
    const double s2 = s * s;
    return -0.5 + s / 6.0 - s * s2 / 180.0 + s * s2 * s2 / 5040.0;
  }
  // B'(s) = B(s) (1 - B(-s)) / s, using B(-s) = B(s) + s.
  return bernoulli(s) * (1.0 - bernoulli(-s)) / s;
}

EdgeFlux sg_flux_n(double V_k, double V_k1, double phi_k, double phi_k1, double h) {
  if (!(h > 0.0)) {
    throw InvalidEdge("edge length must be positive, got " + std::to_string(h));
  }
  const double delta = V_k1 - V_k;
  const double dphi = phi_k1 - phi_k;
  const double b_plus = bernoulli(delta);
  const double b_minus = bernoulli(-delta);
  const double n_k = std::exp(V_k - phi_k);
  const double n_k1 = std::exp(V_k1 - phi_k1);

  EdgeFlux f;
  // Factored through expm1 of the quasi-Fermi jump so that equal phi gives
  // an exact zero; pick the branch whose expm1 argument is nonpositive.
  if (dphi >= 0.0) {
    f.value = -b_minus * n_k * std::expm1(-dphi) / h;
  } else {
    f.value = b_plus * n_k1 * std::expm1(dphi) / h;
  }
  const double db_plus = bernoulli_derivative(delta);
  const double db_minus = bernoulli_derivative(-delta);
  f.d_V_left = (db_minus * n_k + b_minus * n_k + db_plus * n_k1) / h;
  f.d_V_right = -(db_minus * n_k + db_plus * n_k1 + b_plus * n_k1) / h;
  f.d_phi_left = -b_minus * n_k / h;
  f.d_phi_right = b_plus * n_k1 / h;
  return f;
}

EdgeFlux sg_flux_pD(double V_k, double V_k1, double phi_k, double phi_k1, double h) {
  // Mirror of the electron flux under (V, phi) -> (-V, -phi).
  EdgeFlux f = sg_flux_n(-V_k, -V_k1, -phi_k, -phi_k1, h);
  f.d_V_left = -f.d_V_left;
  f.d_V_right = -f.d_V_right;
  f.d_phi_left = -f.d_phi_left;
  f.d_phi_right = -f.d_phi_right;
  return f;
}

BlockTridiagonalSystem::BlockTridiagonalSystem(int num_blocks, int block_size_)
    : block_size(block_size_) {
  if (num_blocks < 1 || block_size_ < 1) {
    throw LinearSolveError("block-tridiagonal system needs at least one block of size >= 1");
  }
  diag.assign(num_blocks, Eigen::MatrixXd::Zero(block_size_, block_size_));
  lower.assign(num_blocks - 1, Eigen::MatrixXd::Zero(block_size_, block_size_));
  upper.assign(num_blocks - 1, Eigen::MatrixXd::Zero(block_size_, block_size_));
  rhs.assign(static_cast<std::size_t>(num_blocks) * block_size_, 0.0);
}

double& BlockTridiagonalSystem::at(int row, int col) {
  const int bi = row / block_size;
  const int bj = col / block_size;
  const int i = row % block_size;
  const int j = col % block_size;
  if (bi == bj) return diag[bi](i, j);
  if (bj == bi + 1) return upper[bi](i, j);
  if (bj == bi - 1) return lower[bj](i, j);
  throw LinearSolveError("entry outside the block-tridiagonal band");
}

double BlockTridiagonalSystem::at(int row, int col) const {
  const int bi = row / block_size;
  const int bj = col / block_size;
  if (std::abs(bi - bj) > 1) return 0.0;
  return const_cast<BlockTridiagonalSystem*>(this)->at(row, col);
}

std::vector<double> BlockTridiagonalSystem::multiply(std::span<const double> x) const {
  const int m = block_size;
  const int nb = num_blocks();
  std::vector<double> y(static_cast<std::size_t>(nb) * m, 0.0);
  for (int k = 0; k < nb; ++k) {
    Eigen::Map<Eigen::VectorXd> yk(y.data() + k * m, m);
    yk += diag[k] * Eigen::Map<const Eigen::VectorXd>(x.data() + k * m, m);
    if (k > 0) yk += lower[k - 1] * Eigen::Map<const Eigen::VectorXd>(x.data() + (k - 1) * m, m);
    if (k + 1 < nb) yk += upper[k] * Eigen::Map<const Eigen::VectorXd>(x.data() + (k + 1) * m, m);
  }
  return y;
}

double BlockTridiagonalSystem::norm_inf() const {
  const int m = block_size;
  const int nb = num_blocks();
  double best = 0.0;
  for (int k = 0; k < nb; ++k) {
    Eigen::VectorXd rows = diag[k].cwiseAbs().rowwise().sum();
    if (k > 0) rows += lower[k - 1].cwiseAbs().rowwise().sum();
    if (k + 1 < nb) rows += upper[k].cwiseAbs().rowwise().sum();
    best = std::max(best, rows.maxCoeff());
  }
  (void)m;
  return best;
}

void BlockTridiagonalSystem::validate() const {
  const int nb = num_blocks();
  if (nb < 1 || block_size < 1) throw LinearSolveError("empty block-tridiagonal system");
  if (static_cast<int>(lower.size()) != nb - 1 || static_cast<int>(upper.size()) != nb - 1) {
    throw LinearSolveError("off-diagonal block count must be num_blocks - 1");
  }
  if (static_cast<int>(rhs.size()) != nb * block_size) {
    throw LinearSolveError("right-hand side length does not match the system dimension");
  }
  auto check = [&](const Eigen::MatrixXd& b) {
    if (b.rows() != block_size || b.cols() != block_size) {
      throw LinearSolveError("inconsistent block dimensions");
    }
  };
  for (const auto& b : diag) check(b);
  for (const auto& b : lower) check(b);
  for (const auto& b : upper) check(b);
}

namespace {

constexpr double kMinPivotRcond = 1e-14;

Eigen::PartialPivLU<Eigen::MatrixXd> factor_pivot(const Eigen::MatrixXd& block, int k) {
  if (!block.allFinite()) {
    throw LinearSolveError("non-finite pivot block at node " + std::to_string(k));
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
  const double rc = lu.rcond();
  if (!(rc > kMinPivotRcond)) {
    throw LinearSolveError("singular or ill-conditioned pivot block at node " +
                           std::to_string(k) + " (rcond " + std::to_string(rc) + ")");
  }
  return lu;
}

}  // namespace

std::vector<double> factor_solve_block_tridiagonal(BlockTridiagonalSystem sys) {
  sys.validate();
  const int m = sys.block_size;
  const int nb = sys.num_blocks();
  std::vector<Eigen::MatrixXd> c_prime(static_cast<std::size_t>(std::max(nb - 1, 0)));
  std::vector<Eigen::VectorXd> d_prime(static_cast<std::size_t>(nb));

  // Row equilibration: density rows carry factors exp(+-V) that can differ
  // by many orders of magnitude from the Poisson rows.
  for (int k = 0; k < nb; ++k) {
    for (int i = 0; i < m; ++i) {
      double scale = sys.diag[k].row(i).cwiseAbs().maxCoeff();
      if (k > 0) scale = std::max(scale, sys.lower[k - 1].row(i).cwiseAbs().maxCoeff());
      if (k + 1 < nb) scale = std::max(scale, sys.upper[k].row(i).cwiseAbs().maxCoeff());
      if (!(scale > 0.0) || !std::isfinite(scale)) continue;
      const double inv = 1.0 / scale;
      sys.diag[k].row(i) *= inv;
      if (k > 0) sys.lower[k - 1].row(i) *= inv;
      if (k + 1 < nb) sys.upper[k].row(i) *= inv;
      sys.rhs[static_cast<std::size_t>(k) * m + i] *= inv;
    }
  }

  auto rhs_block = [&](int k) {
    return Eigen::Map<const Eigen::VectorXd>(sys.rhs.data() + k * m, m);
  };

  for (int k = 0; k < nb; ++k) {
    Eigen::MatrixXd pivot = sys.diag[k];
    Eigen::VectorXd b = rhs_block(k);
    if (k > 0) {
      pivot.noalias() -= sys.lower[k - 1] * c_prime[k - 1];
      b.noalias() -= sys.lower[k - 1] * d_prime[k - 1];
    }
    const auto lu = factor_pivot(pivot, k);
    if (k + 1 < nb) c_prime[k] = lu.solve(sys.upper[k]);
    d_prime[k] = lu.solve(b);
  }

  std::vector<double> x(static_cast<std::size_t>(nb) * m);
  Eigen::VectorXd next = d_prime[nb - 1];
  Eigen::Map<Eigen::VectorXd>(x.data() + (nb - 1) * m, m) = next;
  for (int k = nb - 2; k >= 0; --k) {
    Eigen::VectorXd xk = d_prime[k] - c_prime[k] * next;
    Eigen::Map<Eigen::VectorXd>(x.data() + k * m, m) = xk;
    next = std::move(xk);
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw LinearSolveError("non-finite solution of the linear system");
  }
  return x;
}

void NewtonOptions::validate() const {
  if (!(tol_residual > 0.0) || !(tol_step > 0.0)) {
    throw InvalidConfig("Newton tolerances must be positive");
  }
  if (max_iter < 1) throw InvalidConfig("Newton max_iter must be at least 1");
  if (!(damping_factor > 0.0 && damping_factor < 1.0)) {
    throw InvalidConfig("Newton damping factor must lie in (0, 1)");
  }
  if (!(min_step_fraction > 0.0 && min_step_fraction <= 1.0)) {
    throw InvalidConfig("Newton minimum step fraction must lie in (0, 1]");
  }
}

double max_norm(std::span<const double> v) {
  double best = 0.0;
  for (double a : v) {
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    best = std::max(best, std::fabs(a));
  }
  return best;
}

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                          std::vector<double> x0, const NewtonOptions& opts) {
  opts.validate();
  NewtonResult out;
  out.x = std::move(x0);
  std::vector<double> r;
  residual(out.x, r);
  double rnorm = max_norm(r);
  out.stats.residual_norm = rnorm;
  if (rnorm <= opts.tol_residual) return out;

  std::vector<double> trial(out.x.size());
  std::vector<double> r_trial;
  for (int it = 1; it <= opts.max_iter; ++it) {
    BlockTridiagonalSystem jac = jacobian(out.x);
    jac.rhs.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) jac.rhs[i] = -r[i];
    const std::vector<double> delta = factor_solve_block_tridiagonal(std::move(jac));
    const double step_norm = max_norm(delta);

    if (step_norm <= opts.tol_step) {
      // Correction below tolerance: the residual sits at its round-off floor.
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.x[i] + delta[i];
      residual(trial, r_trial);
      const double trial_norm = max_norm(r_trial);
      if (std::isfinite(trial_norm)) {
        out.x.swap(trial);
        rnorm = trial_norm;
      }
      out.stats.iterations = it;
      out.stats.residual_norm = rnorm;
      out.stats.last_step_norm = step_norm;
      out.stats.stagnated = rnorm > opts.tol_residual;
      return out;
    }

    double fraction = 1.0;
    double trial_norm = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.x[i] + fraction * delta[i];
      residual(trial, r_trial);
      trial_norm = max_norm(r_trial);
      if (trial_norm < rnorm || fraction * opts.damping_factor < opts.min_step_fraction) break;
      fraction *= opts.damping_factor;
    }
    if (fraction < 1.0) ++out.stats.damped_steps;
    if (!std::isfinite(trial_norm)) {
      throw NoConvergence("Newton trial iterate produced a non-finite residual", rnorm, it);
    }
    out.x.swap(trial);
    r.swap(r_trial);
    rnorm = trial_norm;
    out.stats.iterations = it;
    out.stats.residual_norm = rnorm;
    out.stats.last_step_norm = fraction * step_norm;

    if (rnorm <= opts.tol_residual) return out;
  }
  throw NoConvergence("Newton did not converge in " + std::to_string(opts.max_iter) +
                          " iterations (residual " + std::to_string(rnorm) + ")",
                      rnorm, opts.max_iter);
}

}  // namespace memdd
