#pragma once

// Truncation and entropy helper functions from the existence analysis, with
// numerical checks of the inequalities they satisfy. Not used by the solver.

#include <vector>

namespace memdd {

/// max(0, min(k, s)).
double T_k(double s, double k);

/// g_k(s) = int_0^s int_1^y dz / T_k(z) dy, in closed form:
/// s(log s - 1) for s <= k, and k(log k - 1) + (s - k) log k + (s - k)^2/(2k)
/// beyond. Throws DomainError for s < 0 or k < 1.
double g_k(double s, double k);

/// h_k(s) = 2 sqrt(s) for s <= k, s / sqrt(k) + sqrt(k) for s >= k.
/// Throws DomainError for s < 0 or k < 1.
double h_k(double s, double k);

/// g_xi(x) = xi x (e^x - 1).
double g_xi(double x, double xi);

/// Convex conjugate sup_{x > 0} (x y - g_xi(x)) for y >= 0, xi > 0. The
/// maximiser solves (1 + x) e^x = 1 + y / xi and is found by Newton steps
/// safeguarded by bisection on [0, log(1 + y / xi)].
double conjugate_g_xi(double y, double xi);

/// Upper bound xi (log(1 + y/xi))^2 / (1 + log(1 + y/xi)) (1 + y/xi).
double conjugate_g_xi_bound(double y, double xi);

struct TruncationSample {
  std::vector<double> s_values;
  std::vector<double> k_values;

  /// s on [0, 1e6] (dense near 0, log-spaced above), k in {2, 10, 100}.
  static TruncationSample standard();
};

struct LemmaReport {
  std::size_t truncation_samples = 0;
  /// max over samples of sqrt(T_k(s)) - h_k(s)/2
  double max_h_excess = 0.0;
  /// smallest C with sqrt(T_k) <= C (1 + sqrt|g_k|) on the sample
  double empirical_C_g = 0.0;
  /// smallest C with sqrt(T_k) <= C h_k where h_k > 0
  double empirical_C_h = 0.0;
  bool truncation_ok = false;

  std::size_t conjugate_samples = 0;
  /// max over the (y, xi) grid of g*_xi(y) - bound(y, xi), relative to the bound
  double max_conjugate_excess = 0.0;
  bool conjugate_ok = false;
  /// max midpoint-convexity defect of y -> g*_xi(y) on the grid
  double max_convexity_defect = 0.0;
  bool convexity_ok = false;

  bool all_ok() const { return truncation_ok && conjugate_ok && convexity_ok; }
};

/// Checks sqrt(T_k) <= h_k / 2 (+1e-12) on the sample and reports the
/// empirical constant of the g_k bound; also checks the conjugate bound and
/// midpoint convexity on a 100 x 100 grid (y, xi) in (0, 1e3] x [1e-2, 10].
LemmaReport verify_truncation_lemmas(const TruncationSample& sample = TruncationSample::standard());

}  // namespace memdd
