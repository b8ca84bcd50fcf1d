#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"

namespace rmtlab::semicircle {

inline double density(double x) {
  const double s = 4.0 - x * x;
  return s > 0.0 ? std::sqrt(s) / (2.0 * std::numbers::pi) : 0.0;
}

// Closed-form distribution function on [-2, 2], clamped outside.
inline double cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double pi = std::numbers::pi;
  const double v = 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * pi) + std::asin(0.5 * x) / pi;
  return std::clamp(v, 0.0, 1.0);
}

// 1 - cdf(x), computed without cancellation near the upper edge.
inline double tail(double x) { return cdf(-x); }

// Stieltjes transform m(z) = (-z + sqrt(z^2 - 4)) / 2; Im m has the sign of Im z.
inline cplx stieltjes(cplx z) {
  if (z.imag() == 0.0) throw DomainError("m_sc: real argument, take the limit explicitly");
  return 0.5 * (-z + sqrt_z2m4(z));
}

// Boundary value m(E + i0) for real E.
inline cplx stieltjes_upper(double e) { return 0.5 * (cplx(-e, 0.0) + sqrt_z2m4(cplx(e, 0.0))); }

// gamma_k solving cdf(gamma_k) = (k - 1/2) / N, by bisection.
inline double quantile(std::size_t n, std::size_t k) {
  if (n == 0 || k < 1 || k > n) throw DomainError("semicircle quantile: k out of range");
  if (2 * k - 1 == n) return 0.0;
  // Solve on the lower half and reflect, which keeps gamma_k = -gamma_{N+1-k} exact.
  const bool reflect = 2 * k - 1 > n;
  const std::size_t kk = reflect ? n + 1 - k : k;
  const double p = (static_cast<double>(kk) - 0.5) / static_cast<double>(n);
  double lo = -2.0, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return reflect ? -x : x;
}

// Log potential U(z) = int log(z - x) rho_sc(x) dx for Im z >= 0 (real axis as the
// limit from above); U(z) - log z -> 0 at infinity.
inline cplx log_potential(cplx z) {
  if (z.imag() < 0.0) throw DomainError("log_potential: Im z < 0, conjugate externally");
  const cplx b = sqrt_z2m4(z);
  return z * z / 4.0 - z * b / 4.0 + log_upper(0.5 * (z + b)) - 0.5;
}

}  // namespace rmtlab::semicircle
