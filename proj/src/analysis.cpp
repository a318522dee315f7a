#include "memdd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memdd/errors.hpp"

namespace memdd {

namespace {

void check_domain(double s, double k, const char* name) {
  if (!(s >= 0.0)) throw DomainError(std::string(name) + ": s must be nonnegative");
  if (!(k >= 1.0)) throw DomainError(std::string(name) + ": k must be at least 1");
}

}  // namespace

double T_k(double s, double k) { return std::max(0.0, std::min(k, s)); }

double g_k(double s, double k) {
  check_domain(s, k, "g_k");
  if (s <= k) return s > 0.0 ? s * (std::log(s) - 1.0) : 0.0;
  const double d = s - k;
  const double lk = std::log(k);
  return k * (lk - 1.0) + d * lk + d * d / (2.0 * k);
}

double h_k(double s, double k) {
  check_domain(s, k, "h_k");
  if (s <= k) return 2.0 * std::sqrt(s);
  const double rk = std::sqrt(k);
  return s / rk + rk;
}

double g_xi(double x, double xi) { return xi * x * std::expm1(x); }

double conjugate_g_xi(double y, double xi) {
  if (!(y >= 0.0)) throw DomainError("conjugate_g_xi: y must be nonnegative");
  if (!(xi > 0.0)) throw DomainError("conjugate_g_xi: xi must be positive");
  if (y == 0.0) return 0.0;
  const double r = y / xi;
  // F(x) = (1 + x) e^x - 1 - r, increasing and convex on [0, inf);
  // F(0) = -r < 0 and F(log(1 + r)) = (1 + r) log(1 + r) >= 0.
  auto F = [r](double x) { return x * std::exp(x) + std::expm1(x) - r; };
  double lo = 0.0;
  double hi = std::log1p(r);
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double f = F(x);
    if (f == 0.0) break;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double df = (2.0 + x) * std::exp(x);
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-16 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x * y - g_xi(x, xi);
}

double conjugate_g_xi_bound(double y, double xi) {
  if (!(y >= 0.0)) throw DomainError("conjugate_g_xi_bound: y must be nonnegative");
  if (!(xi > 0.0)) throw DomainError("conjugate_g_xi_bound: xi must be positive");
  const double r = y / xi;
  const double l = std::log1p(r);
  return xi * l * l / (1.0 + l) * (1.0 + r);
}

TruncationSample TruncationSample::standard() {
  TruncationSample out;
  for (int i = 0; i <= 1000; ++i) out.s_values.push_back(0.01 * i);  // [0, 10]
  for (int i = 1; i <= 2000; ++i) {
    out.s_values.push_back(10.0 * std::pow(1e5, i / 2000.0));  // (10, 1e6]
  }
  out.k_values = {2.0, 10.0, 100.0};
  return out;
}

LemmaReport verify_truncation_lemmas(const TruncationSample& sample) {
  LemmaReport rep;
  rep.max_h_excess = -HUGE_VAL;
  for (double k : sample.k_values) {
    for (double s : sample.s_values) {
      const double root = std::sqrt(T_k(s, k));
      const double h = h_k(s, k);
      rep.max_h_excess = std::max(rep.max_h_excess, root - 0.5 * h);
      rep.empirical_C_g = std::max(rep.empirical_C_g, root / (1.0 + std::sqrt(std::fabs(g_k(s, k)))));
      if (h > 0.0) rep.empirical_C_h = std::max(rep.empirical_C_h, root / h);
      ++rep.truncation_samples;
    }
  }
  rep.truncation_ok = rep.truncation_samples > 0 && rep.max_h_excess <= 1e-12;

  constexpr int kGrid = 100;
  rep.max_conjugate_excess = -HUGE_VAL;
  for (int j = 0; j < kGrid; ++j) {
    const double xi = 1e-2 * std::pow(1e3, j / double(kGrid - 1));
    std::vector<double> ys(kGrid);
    std::vector<double> vals(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      ys[i] = 1e3 * (i + 1) / kGrid;
      vals[i] = conjugate_g_xi(ys[i], xi);
      const double b = conjugate_g_xi_bound(ys[i], xi);
      rep.max_conjugate_excess = std::max(rep.max_conjugate_excess, (vals[i] - b) / b);
      ++rep.conjugate_samples;
    }
    // Uniform y spacing: midpoint convexity on consecutive triples.
    for (int i = 1; i + 1 < kGrid; ++i) {
      const double defect = vals[i] - 0.5 * (vals[i - 1] + vals[i + 1]);
      const double scale = std::max(1.0, std::fabs(vals[i]));
      rep.max_convexity_defect = std::max(rep.max_convexity_defect, defect / scale);
    }
  }
  rep.conjugate_ok = rep.max_conjugate_excess <= 1e-12;
  rep.convexity_ok = rep.max_convexity_defect <= 1e-12;
  return rep;
}

}  // namespace memdd
