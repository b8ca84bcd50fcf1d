#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace rmtlab {

using cplx = std::complex<double>;

// Principal square root with the negative real axis approached from above:
// sqrt(-x) = i*sqrt(x) for x > 0, independent of the sign of a zero imaginary part.
inline cplx sqrt_upper(cplx z) {
  if (z.imag() == 0.0) {
    if (z.real() >= 0.0) return {std::sqrt(z.real()), 0.0};
    return {0.0, std::sqrt(-z.real())};
  }
  return std::sqrt(z);
}

// Principal logarithm, arg in (-pi, pi], negative reals mapped to arg = pi.
inline cplx log_upper(cplx z) {
  if (z.imag() == 0.0 && z.real() < 0.0) return {std::log(-z.real()), std::numbers::pi};
  return std::log(z);
}

// sqrt(z - 2) * sqrt(z + 2), the branch used for the semicircle law.
inline cplx sqrt_z2m4(cplx z) { return sqrt_upper(z - 2.0) * sqrt_upper(z + 2.0); }

}  // namespace rmtlab
