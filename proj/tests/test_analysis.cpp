#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "memdd/analysis.hpp"
#include "memdd/errors.hpp"

using namespace memdd;

TEST_CASE("truncation") {
  CHECK(T_k(-1.0, 2.0) == 0.0);
  CHECK(T_k(1.0, 2.0) == 1.0);
  CHECK(T_k(5.0, 2.0) == 2.0);
}

TEST_CASE("g_k closed form") {
  for (double k : {1.5, 2.0, 10.0, 100.0}) CHECK(g_k(1.0, k) == doctest::Approx(-1.0));
  CHECK(g_k(0.0, 3.0) == 0.0);
  CHECK(g_k(1e-300, 3.0) <= 0.0);
  CHECK_THROWS_AS(g_k(-0.1, 2.0), DomainError);
  CHECK_THROWS_AS(g_k(1.0, 0.5), DomainError);
}

TEST_CASE("g_k and h_k are continuous and C1 at s = k") {
  for (double k : {1.0, 2.0, 7.5, 100.0, 1e4}) {
    const double left = k * (std::log(k) - 1.0);
    CHECK(std::fabs(g_k(k, k) - left) <= 1e-12 * std::max(1.0, std::fabs(left)));
    const double d = 1e-6 * k;
    const double slope_lo = (g_k(k, k) - g_k(k - d, k)) / d;
    const double slope_hi = (g_k(k + d, k) - g_k(k, k)) / d;
    // one-sided quotients are off by d g''/2 = d / (2k) on either side
    CHECK(std::fabs(slope_lo - std::log(k)) <= d / k);
    CHECK(std::fabs(slope_hi - std::log(k)) <= d / k);
    // h_k: both branches give 2 sqrt(k) at s = k
    const double rk = std::sqrt(k);
    CHECK(std::fabs(h_k(k, k) - 2.0 * rk) <= 1e-12 * rk);
    CHECK(std::fabs(k / rk + rk - 2.0 * rk) <= 1e-12 * rk);
  }
}

TEST_CASE("h_k values") {
  CHECK(h_k(0.0, 3.0) == 0.0);
  CHECK(h_k(4.0, 4.0) == doctest::Approx(4.0));
  CHECK(h_k(9.0, 4.0) == doctest::Approx(6.5));
  CHECK_THROWS_AS(h_k(-1.0, 4.0), DomainError);
}

TEST_CASE("g_2(5) matches a double tanh-sinh quadrature") {
  boost::math::quadrature::tanh_sinh<double> q;
  auto inv_T = [](double z) { return 1.0 / T_k(z, 2.0); };
  // inner(y) = int_1^y dz / T_2(z), split at the kink z = 2
  auto inner = [&](double y) {
    if (y <= 1.0) return -q.integrate(inv_T, y, 1.0);
    if (y <= 2.0) return q.integrate(inv_T, 1.0, y);
    return q.integrate(inv_T, 1.0, 2.0) + q.integrate(inv_T, 2.0, y);
  };
  const double oracle =
      q.integrate(inner, 0.0, 1.0) + q.integrate(inner, 1.0, 2.0) + q.integrate(inner, 2.0, 5.0);
  CHECK(std::fabs(g_k(5.0, 2.0) - oracle) <= 1e-10);
  // closed value 5 log 2 - 2 + 9/4
  CHECK(g_k(5.0, 2.0) == doctest::Approx(3.7157359027997265471).epsilon(1e-15));
}

TEST_CASE("g_k matches quadrature on further points") {
  boost::math::quadrature::tanh_sinh<double> q;
  for (double k : {2.0, 10.0}) {
    auto inv_T = [k](double z) { return 1.0 / T_k(z, k); };
    auto inner = [&](double y) {
      if (y <= 1.0) return -q.integrate(inv_T, y, 1.0);
      if (y <= k) return q.integrate(inv_T, 1.0, y);
      return q.integrate(inv_T, 1.0, k) + q.integrate(inv_T, k, y);
    };
    for (double s : {0.3, 1.7, 2.5, 12.0, 40.0}) {
      double oracle = q.integrate(inner, 0.0, std::min(s, 1.0));
      if (s > 1.0) oracle += q.integrate(inner, 1.0, std::min(s, k));
      if (s > k) oracle += q.integrate(inner, k, s);
      CHECK(std::fabs(g_k(s, k) - oracle) <= 1e-10 * std::max(1.0, std::fabs(oracle)));
    }
  }
}

namespace {

// max over x in [0, 50] of x y - g_xi(x): dense grid, then golden section.
double conjugate_oracle(double y, double xi) {
  auto f = [&](double x) { return x * y - g_xi(x, xi); };
  const int n = 200000;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i <= n; ++i) {
    const double v = f(50.0 * i / n);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = 50.0 * std::max(best - 1, 0) / n;
  double b = 50.0 * std::min(best + 1, n) / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return std::max(best_val, f(0.5 * (a + b)));
}

}  // namespace

TEST_CASE("convex conjugate of g_xi") {
  CHECK(conjugate_g_xi(0.0, 0.5) == 0.0);
  for (double xi : {1e-2, 0.3, 1.0, 10.0}) {
    for (double y : {1e-3, 0.5, 3.0, 70.0, 1e3}) {
      const double ref = conjugate_oracle(y, xi);
      CHECK(conjugate_g_xi(y, xi) == doctest::Approx(ref).epsilon(1e-8).scale(1e-8));
    }
  }
  CHECK_THROWS_AS(conjugate_g_xi(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(conjugate_g_xi(1.0, 0.0), DomainError);
}

TEST_CASE("convex conjugate bound on a 100 x 100 grid") {
  int violations = 0;
  for (int j = 0; j < 100; ++j) {
    const double xi = 1e-2 * std::pow(1e3, j / 99.0);
    for (int i = 1; i <= 100; ++i) {
      const double y = 10.0 * i;
      if (conjugate_g_xi(y, xi) > conjugate_g_xi_bound(y, xi)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("convex conjugate is midpoint convex in y") {
  for (double xi : {0.01, 1.0, 10.0}) {
    for (double y = 0.0; y < 1e3; y += 7.3) {
      const double mid = conjugate_g_xi(y + 3.0, xi);
      const double avg = 0.5 * (conjugate_g_xi(y, xi) + conjugate_g_xi(y + 6.0, xi));
      CHECK(mid <= avg + 1e-12 * std::max(1.0, avg));
    }
  }
}

TEST_CASE("truncation lemma report") {
  const LemmaReport r = verify_truncation_lemmas();
  CHECK(r.truncation_samples == 3 * TruncationSample::standard().s_values.size());
  CHECK(r.max_h_excess <= 1e-12);
  CHECK(r.truncation_ok);
  CHECK(std::isfinite(r.empirical_C_g));
  CHECK(r.empirical_C_g > 0.0);
  CHECK(r.empirical_C_h <= 0.5 + 1e-12);
  CHECK(r.conjugate_samples == 10000);
  CHECK(r.conjugate_ok);
  CHECK(r.convexity_ok);
  CHECK(r.all_ok());
}

TEST_CASE("half-root bound: equality below k, slack above") {
  for (double k : {2.0, 10.0, 100.0}) {
    for (double s = 0.0; s <= k; s += k / 50.0) {
      CHECK(std::sqrt(T_k(s, k)) == doctest::Approx(0.5 * h_k(s, k)).epsilon(1e-14));
    }
    const double s = 4.0 * k;
    CHECK(0.5 * h_k(s, k) == doctest::Approx(2.5 * std::sqrt(k)));
    CHECK(std::sqrt(T_k(s, k)) <= 2.5 * std::sqrt(k));
  }
}

TEST_CASE("report flags a violating sample set") {
  TruncationSample s;
  s.s_values = {0.0, 1.0, 4.0};
  s.k_values = {2.0};
  const LemmaReport r = verify_truncation_lemmas(s);
  CHECK(r.truncation_samples == 3);
  CHECK(r.truncation_ok);
  TruncationSample empty;
  CHECK_FALSE(verify_truncation_lemmas(empty).truncation_ok);
}
