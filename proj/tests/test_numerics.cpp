#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "memdd/errors.hpp"
#include "memdd/numerics.hpp"

using namespace memdd;

namespace {

long double bernoulli_ref(long double s) {
  if (s == 0.0L) return 1.0L;
  return s / std::expm1(s);
}

long double bernoulli_deriv_ref(long double s) {
  if (std::fabs(s) < 1e-4L) return -0.5L + s / 6.0L - s * s * s / 180.0L;
  const long double e = std::exp(s);
  const long double d = std::expm1(s);
  return (d - s * e) / (d * d);
}

}  // namespace

TEST_CASE("Bernoulli values") {
  CHECK(bernoulli(0.0) == 1.0);
  // 20-digit reference value of 1 / (e - 1)
  CHECK(bernoulli(1.0) == doctest::Approx(0.58197670686932642438).epsilon(1e-15));
  CHECK(bernoulli(-1.0) == doctest::Approx(1.58197670686932642438).epsilon(1e-15));
  CHECK(bernoulli(-800.0) == doctest::Approx(800.0));
  CHECK(bernoulli(800.0) == 0.0);
  CHECK(std::isfinite(bernoulli(1e4)));
  CHECK(bernoulli_derivative(0.0) == -0.5);
}

TEST_CASE("Bernoulli agrees with an extended-precision oracle") {
  for (double s = -40.0; s <= 40.0; s += 0.013) {
    CHECK(bernoulli(s) == doctest::Approx(static_cast<double>(bernoulli_ref(s))).epsilon(1e-14));
  }
  // across the series switch
  for (double s : {-2e-5, -1.0001e-5, -9.999e-6, 1e-9, 9.999e-6, 1.0001e-5, 2e-5}) {
    CHECK(bernoulli(s) == doctest::Approx(static_cast<double>(bernoulli_ref(s))).epsilon(1e-15));
  }
}

TEST_CASE("Bernoulli derivative agrees with the oracle") {
  for (double s = -30.0; s <= 30.0; s += 0.0173) {
    const double ref = static_cast<double>(bernoulli_deriv_ref(s));
    CHECK(bernoulli_derivative(s) == doctest::Approx(ref).epsilon(1e-10).scale(1e-300));
  }
  for (double s : {-0.0101, -0.0099, 0.0099, 0.0101, 1e-7}) {
    const double ref = static_cast<double>(bernoulli_deriv_ref(s));
    CHECK(bernoulli_derivative(s) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("Bernoulli reflection identity on 1e5 samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> expo(-12.0, std::log10(700.0));
  std::bernoulli_distribution sign(0.5);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double s = (sign(rng) ? 1.0 : -1.0) * std::pow(10.0, expo(rng));
    const double b_plus = bernoulli(s);
    const double b_minus = bernoulli(-s);
    const double err = std::fabs(b_minus - b_plus - s) / (std::fabs(b_plus) + std::fabs(b_minus));
    worst = std::max(worst, err);
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("electron edge flux example") {
  // (B(-1) e^0 - B(1) e^{0.5}) / 1
  const EdgeFlux f = sg_flux_n(0.0, 1.0, 0.0, 0.5, 1.0);
  const long double ref = bernoulli_ref(-1.0L) - bernoulli_ref(1.0L) * std::exp(0.5L);
  CHECK(f.value == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
  CHECK(f.value == doctest::Approx(0.62245933120185456464).epsilon(1e-14));
  // halving h doubles the flux
  CHECK(sg_flux_n(0.0, 1.0, 0.0, 0.5, 0.5).value == doctest::Approx(2.0 * f.value));
}

TEST_CASE("hole/vacancy edge flux mirrors the electron flux") {
  const double V0 = 0.3, V1 = -1.2, p0 = 0.1, p1 = 0.7, h = 0.02;
  const EdgeFlux f = sg_flux_pD(V0, V1, p0, p1, h);
  const long double ref = (bernoulli_ref(V1 - V0) * std::exp((long double)(p0 - V0)) -
                           bernoulli_ref(V0 - V1) * std::exp((long double)(p1 - V1))) /
                          h;
  CHECK(f.value == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
}

TEST_CASE("fluxes vanish for equal quasi-Fermi potentials") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  std::uniform_real_distribution<double> hs(1e-4, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double Va = u(rng), Vb = u(rng), phi = u(rng), h = hs(rng);
    const EdgeFlux fn = sg_flux_n(Va, Vb, phi, phi, h);
    const EdgeFlux fp = sg_flux_pD(Va, Vb, phi, phi, h);
    // scale: the size of the individual drift-diffusion terms
    const double sn = (std::exp(Va - phi) + std::exp(Vb - phi)) * (1.0 + std::fabs(Va - Vb)) / h;
    const double sp = (std::exp(phi - Va) + std::exp(phi - Vb)) * (1.0 + std::fabs(Va - Vb)) / h;
    CHECK(std::fabs(fn.value) <= 1e-13 * sn);
    CHECK(std::fabs(fp.value) <= 1e-13 * sp);
  }
}

TEST_CASE("edge flux derivatives match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    double a[4] = {u(rng), u(rng), u(rng), u(rng)};  // V_k, V_k1, phi_k, phi_k1
    const double h = 0.1;
    for (int which = 0; which < 2; ++which) {
      auto eval = [&](const double* x) {
        return which == 0 ? sg_flux_n(x[0], x[1], x[2], x[3], h) : sg_flux_pD(x[0], x[1], x[2], x[3], h);
      };
      const EdgeFlux f = eval(a);
      const double analytic[4] = {f.d_V_left, f.d_V_right, f.d_phi_left, f.d_phi_right};
      for (int j = 0; j < 4; ++j) {
        const double step = 1e-6 * (1.0 + std::fabs(a[j]));
        double p[4], m[4];
        std::copy(a, a + 4, p);
        std::copy(a, a + 4, m);
        p[j] += step;
        m[j] -= step;
        const double fd = (eval(p).value - eval(m).value) / (2.0 * step);
        CHECK(analytic[j] == doctest::Approx(fd).epsilon(1e-6).scale(1e-8 * (1.0 + std::fabs(f.value))));
      }
    }
  }
}

TEST_CASE("edge flux rejects nonpositive lengths") {
  CHECK_THROWS_AS(sg_flux_n(0, 1, 0, 0, 0.0), InvalidEdge);
  CHECK_THROWS_AS(sg_flux_pD(0, 1, 0, 0, -1.0), InvalidEdge);
}

namespace {

Eigen::MatrixXd dense_of(const BlockTridiagonalSystem& s) {
  const int n = s.dimension();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const int m = s.block_size;
  for (int k = 0; k < s.num_blocks(); ++k) {
    A.block(k * m, k * m, m, m) = s.diag[k];
    if (k + 1 < s.num_blocks()) {
      A.block(k * m, (k + 1) * m, m, m) = s.upper[k];
      A.block((k + 1) * m, k * m, m, m) = s.lower[k];
    }
  }
  return A;
}

BlockTridiagonalSystem random_system(std::mt19937_64& rng, int nb, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BlockTridiagonalSystem s(nb, m);
  auto fill = [&](Eigen::MatrixXd& b) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) b(i, j) = u(rng);
  };
  for (auto& b : s.lower) fill(b);
  for (auto& b : s.upper) fill(b);
  for (auto& b : s.diag) {
    fill(b);
    b += Eigen::MatrixXd::Identity(m, m) * (3.0 * m);
  }
  for (double& r : s.rhs) r = u(rng);
  return s;
}

}  // namespace

TEST_CASE("block-tridiagonal solve matches a dense LU oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nb_dist(1, 8);
  std::uniform_int_distribution<int> m_dist(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const BlockTridiagonalSystem s = random_system(rng, nb_dist(rng), m_dist(rng));
    const Eigen::MatrixXd A = dense_of(s);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(s.rhs.data(), s.dimension());
    const Eigen::VectorXd ref = A.partialPivLu().solve(b);
    const std::vector<double> x = factor_solve_block_tridiagonal(s);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), s.dimension());
    CHECK((xv - ref).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("block-tridiagonal multiply and norm match the dense matrix") {
  std::mt19937_64 rng(5);
  const BlockTridiagonalSystem s = random_system(rng, 6, 3);
  const Eigen::MatrixXd A = dense_of(s);
  std::vector<double> x(s.dimension());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(1.0 + i);
  const auto y = s.multiply(x);
  const Eigen::VectorXd ref = A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-14));
  CHECK(s.norm_inf() == doctest::Approx(A.cwiseAbs().rowwise().sum().maxCoeff()));
  CHECK(s.at(4, 7) == A(4, 7));
  CHECK(s.at(0, 17) == 0.0);
}

TEST_CASE("row scaling does not change the solution of badly scaled systems") {
  std::mt19937_64 rng(11);
  BlockTridiagonalSystem s = random_system(rng, 5, 4);
  // oracle from the unscaled system; row scaling leaves the solution alone
  const Eigen::MatrixXd A = dense_of(s);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(s.rhs.data(), s.dimension());
  const Eigen::VectorXd ref = A.partialPivLu().solve(b);
  // scale whole rows by very different factors
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 4; ++i) {
      const double f = std::pow(10.0, 30.0 * ((k + i) % 3) - 30.0);
      s.diag[k].row(i) *= f;
      if (k > 0) s.lower[k - 1].row(i) *= f;
      if (k + 1 < 5) s.upper[k].row(i) *= f;
      s.rhs[k * 4 + i] *= f;
    }
  }
  const auto x = factor_solve_block_tridiagonal(s);
  for (int i = 0; i < s.dimension(); ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("singular pivot blocks are reported") {
  BlockTridiagonalSystem s(3, 2);
  s.diag[0] << 1, 2, 2, 4;
  s.diag[1] = Eigen::MatrixXd::Identity(2, 2);
  s.diag[2] = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(factor_solve_block_tridiagonal(s), LinearSolveError);
  BlockTridiagonalSystem bad(2, 2);
  bad.rhs.pop_back();
  CHECK_THROWS_AS(factor_solve_block_tridiagonal(bad), LinearSolveError);
  CHECK_THROWS_AS(BlockTridiagonalSystem(0, 2), LinearSolveError);
}

namespace {

JacobianFn scalar_jacobian(std::function<double(double)> d) {
  return [d](std::span<const double> x) {
    BlockTridiagonalSystem J(1, 1);
    J.diag[0](0, 0) = d(x[0]);
    return J;
  };
}

}  // namespace

TEST_CASE("Newton converges quadratically on x^2 - 4") {
  ResidualFn r = [](std::span<const double> x, std::vector<double>& out) {
    out.assign(1, x[0] * x[0] - 4.0);
  };
  const NewtonResult res = newton_solve(r, scalar_jacobian([](double x) { return 2.0 * x; }), {1.0});
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(res.stats.iterations <= 7);
  CHECK(res.stats.residual_norm <= 1e-11);
}

TEST_CASE("Newton solves an affine problem in one step") {
  // tridiagonal affine residual A x - b with a known solution
  const int n = 6;
  ResidualFn r = [&](std::span<const double> x, std::vector<double>& out) {
    out.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      out[i] = 4.0 * x[i] - (i > 0 ? x[i - 1] : 0.0) - (i + 1 < n ? x[i + 1] : 0.0) - (i + 1.0);
    }
  };
  JacobianFn J = [&](std::span<const double>) {
    BlockTridiagonalSystem s(n, 1);
    for (int i = 0; i < n; ++i) s.diag[i](0, 0) = 4.0;
    for (int i = 0; i + 1 < n; ++i) {
      s.lower[i](0, 0) = -1.0;
      s.upper[i](0, 0) = -1.0;
    }
    return s;
  };
  const NewtonResult res = newton_solve(r, J, std::vector<double>(n, 0.0));
  CHECK(res.stats.iterations == 1);
  std::vector<double> out;
  r(res.x, out);
  CHECK(max_norm(out) <= 1e-12);
}

TEST_CASE("Newton returns immediately at a root") {
  ResidualFn r = [](std::span<const double> x, std::vector<double>& out) { out.assign(1, x[0] - 3.0); };
  const NewtonResult res = newton_solve(r, scalar_jacobian([](double) { return 1.0; }), {3.0});
  CHECK(res.stats.iterations == 0);
  CHECK(res.x[0] == 3.0);
}

TEST_CASE("Newton reports failure without a root") {
  ResidualFn r = [](std::span<const double> x, std::vector<double>& out) {
    out.assign(1, x[0] * x[0] + 1.0);
  };
  NewtonOptions opts;
  opts.max_iter = 30;
  CHECK_THROWS_AS(newton_solve(r, scalar_jacobian([](double x) { return 2.0 * x; }), {0.7}, opts),
                  NoConvergence);
}

TEST_CASE("Newton damping handles overshooting steps") {
  // atan has a tiny basin for undamped Newton
  ResidualFn r = [](std::span<const double> x, std::vector<double>& out) { out.assign(1, std::atan(x[0])); };
  const NewtonResult res =
      newton_solve(r, scalar_jacobian([](double x) { return 1.0 / (1.0 + x * x); }), {3.0});
  CHECK(std::fabs(res.x[0]) <= 1e-11);
  CHECK(res.stats.damped_steps > 0);
}

TEST_CASE("Newton options are validated") {
  NewtonOptions o;
  o.tol_residual = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidConfig);
  o = NewtonOptions{};
  o.damping_factor = 1.0;
  CHECK_THROWS_AS(o.validate(), InvalidConfig);
  o = NewtonOptions{};
  o.max_iter = 0;
  CHECK_THROWS_AS(o.validate(), InvalidConfig);
}

TEST_CASE("max norm flags non-finite entries") {
  const std::vector<double> a{1.0, -3.0, 2.0};
  CHECK(max_norm(a) == 3.0);
  const std::vector<double> b{1.0, NAN};
  CHECK(std::isinf(max_norm(b)));
}
