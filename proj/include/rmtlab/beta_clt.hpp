#pragma once

#include <cmath>
#include <limits>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/potential.hpp"
#include "rmtlab/quadrature.hpp"

namespace rmtlab {

// Maps attached to a one-cut support [A, B]:
//   tau(s) = sqrt((s-A)(B-s)),  b(z) = sqrt(z-A) sqrt(z-B),
//   v(z) = ((A+B)/2 - z + b(z)) / 2,  gamma = (A-B)^2 / 16.
// v sends the complement of [A, B] into the disk of radius sqrt(gamma).
struct EdgeMaps {
  double a = -2.0;
  double b = 2.0;

  static EdgeMaps of(const Potential& p) { return {p.a, p.b}; }

  double gamma_const() const { return (a - b) * (a - b) / 16.0; }
  double center() const { return 0.5 * (a + b); }
};

// Side of the cut for evaluations on [A, B] itself.
enum class CutSide { none, upper, lower };

struct TauBV {
  double tau = 0.0;
  cplx b;
  cplx v;
};

inline double tau_of(double s, const EdgeMaps& m) {
  if (s < m.a || s > m.b) throw DomainError("tau: s outside [A, B]");
  return std::sqrt((s - m.a) * (m.b - s));
}

inline cplx b_of(cplx z, const EdgeMaps& m, CutSide side = CutSide::none) {
  if (z.imag() == 0.0 && z.real() >= m.a && z.real() <= m.b) {
    if (side == CutSide::none) throw DomainError("b(z): z on the cut needs a side");
    const double t = std::sqrt((z.real() - m.a) * (m.b - z.real()));
    return side == CutSide::upper ? cplx(0.0, t) : cplx(0.0, -t);
  }
  return std::sqrt(z - m.a) * std::sqrt(z - m.b);
}

inline cplx b_prime(cplx z, const EdgeMaps& m) { return (z - m.center()) / b_of(z, m); }

inline cplx v_of(cplx z, const EdgeMaps& m, CutSide side = CutSide::none) {
  return 0.5 * (m.center() - z + b_of(z, m, side));
}

// Evaluates tau at Re z when it lies in [A, B] (NaN otherwise), and b, v at z.
inline TauBV tau_b_v(cplx z, const EdgeMaps& m, CutSide side = CutSide::none) {
  TauBV out;
  const double s = z.real();
  out.tau = (s >= m.a && s <= m.b) ? tau_of(s, m) : std::numeric_limits<double>::quiet_NaN();
  out.b = b_of(z, m, side);
  out.v = 0.5 * (m.center() - z + out.b);
  return out;
}

// m_V(z) from r and b: 2 m_V + V' = 2 r b.
inline cplx stieltjes_equilibrium(cplx z, const Potential& p) {
  const EdgeMaps m = EdgeMaps::of(p);
  return p.r(z) * b_of(z, m) - 0.5 * p.derivative(z);
}

// Stieltjes transform of rho_V by direct quadrature, independent of r*b.
inline cplx stieltjes_equilibrium_quadrature(cplx z, const Potential& p) {
  auto g = [&](double s) { return p.r(cplx(s, 0.0)) / (std::numbers::pi * (s - z)); };
  return quad::integrate_tau(g, p.a, p.b, 1e-13, z.real()).value;
}

// |2 m_V(z) + V'(z) - 2 r(z) b(z)|; `mv` supplies the transform to test.
inline double relation_check(cplx z, const Potential& p, cplx mv) {
  return std::abs(2.0 * mv + p.derivative(z) - 2.0 * p.r(z) * b_of(z, EdgeMaps::of(p)));
}

inline double relation_check(cplx z, const Potential& p) {
  return relation_check(z, p, stieltjes_equilibrium(z, p));
}

// int_A^B tau(s)/(s - z) ds by quadrature and the closed form pi((A+B)/2 - z + b(z)).
inline cplx tau_transform_quadrature(cplx z, const EdgeMaps& m) {
  return quad::integrate_tau([&](double s) { return 1.0 / (s - z); }, m.a, m.b, 1e-14, z.real()).value;
}
inline cplx tau_transform_closed(cplx z, const EdgeMaps& m) {
  return std::numbers::pi * (m.center() - z + b_of(z, m));
}

// c(z, w) = log(1 - v(z) v(w) / gamma), principal branch.
inline cplx c_kernel(cplx z, cplx w, const EdgeMaps& m = {}) {
  const cplx q = v_of(z, m) * v_of(w, m) / m.gamma_const();
  if (!(std::abs(q) < 1.0)) throw DomainError("c_kernel: |v(z) v(w)| >= gamma (argument on the cut?)");
  const cplx arg = 1.0 - q;
  if (arg.imag() == 0.0 && arg.real() <= 0.0) throw DomainError("c_kernel: argument on the log branch cut");
  return std::log(arg);
}

// Asymptotic covariance quadratic form sigma(zeta, xi, z):
// -1/(2 beta) sum_{i,j} [ (zj - i xj)(zi - i xi) c(z_j, z_i) + (zj - i xj)(zi + i xi) c(z_j, conj z_i)
//                       + (zj + i xj)(zi - i xi) c(conj z_j, z_i) + (zj + i xj)(zi + i xi) c(conj z_j, conj z_i) ].
inline cplx sigma_cov(const std::vector<cplx>& zeta, const std::vector<cplx>& xi, const std::vector<cplx>& z,
                      double beta, const EdgeMaps& m = {}) {
  if (zeta.size() != z.size() || xi.size() != z.size()) throw DomainError("sigma_cov: length mismatch");
  if (!(beta > 0.0)) throw DomainError("sigma_cov: beta must be positive");
  for (const auto& p : z)
    if (!(p.imag() > 0.0)) throw DomainError("sigma_cov: points must lie in the upper half plane");
  const cplx I(0.0, 1.0);
  cplx acc = 0.0;
  const std::size_t p = z.size();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const cplx mj = zeta[j] - I * xi[j], pj = zeta[j] + I * xi[j];
      const cplx mi = zeta[i] - I * xi[i], pi = zeta[i] + I * xi[i];
      acc += mj * mi * c_kernel(z[j], z[i], m) + mj * pi * c_kernel(z[j], std::conj(z[i]), m) +
             pj * mi * c_kernel(std::conj(z[j]), z[i], m) + pj * pi * c_kernel(std::conj(z[j]), std::conj(z[i]), m);
    }
  }
  return -acc / (2.0 * beta);
}

struct ShiftEstimate {
  cplx value;
  double error = 0.0;  // quadrature error plus the truncated-tail bound
};

inline constexpr double kShiftContourHeight = 1e3;

namespace detail {

// (b'(w) - 1) + (1/pi) int_A^B r'(s) tau(s) / (r(s)(s - w)) ds, divided by b(w).
inline cplx shift_integrand(cplx w, const Potential& p, const EdgeMaps& m) {
  cplx g = b_prime(w, m) - 1.0;
  if (!p.quadratic) {
    auto h = [&](double s) {
      const cplx rs(s, 0.0);
      return p.dr(rs) / (p.r(rs) * (s - w) * std::numbers::pi);
    };
    g += quad::integrate_tau(h, p.a, p.b, 1e-12, w.real()).value;
  }
  return g / b_of(w, m);
}

// int_{z0}^{z0 + i T} f(w) dw along the vertical ray (f evaluated at w or at conj w).
template <typename F>
ShiftEstimate vertical_ray(cplx z0, F&& f) {
  const cplx I(0.0, 1.0);
  auto h = [&](double t) { return f(z0 + I * t) * I; };
  std::vector<double> breaks{0.0};
  for (double t = std::max(z0.imag(), 1e-3); t < kShiftContourHeight; t *= 4.0) breaks.push_back(t);
  breaks.push_back(kShiftContourHeight);
  auto est = quad::integrate_panels(h, breaks, 1e-10);
  // integrand decays like |w|^-2, so the neglected tail is about T |f(z0 + iT)|
  const double tail = kShiftContourHeight * std::abs(h(kShiftContourHeight));
  return {est.value, est.error + tail};
}

}  // namespace detail

// Asymptotic shift mu(zeta, xi, z) for the potential p at inverse temperature beta.
inline ShiftEstimate mu_shift(const std::vector<cplx>& zeta, const std::vector<cplx>& xi, const std::vector<cplx>& z,
                              const Potential& p, double beta) {
  if (zeta.size() != z.size() || xi.size() != z.size()) throw DomainError("mu_shift: length mismatch");
  if (!(beta > 0.0)) throw DomainError("mu_shift: beta must be positive");
  if (!p.r_analytic) throw ConfigError("mu_shift: r must be analytic");
  const EdgeMaps m = EdgeMaps::of(p);
  const double kappa = 0.25 - 0.5 / beta;
  ShiftEstimate out{0.0, 0.0};
  if (kappa == 0.0) return out;
  const cplx I(0.0, 1.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(z[j].imag() > 0.0)) throw DomainError("mu_shift: points must lie in the upper half plane");
    auto up = detail::vertical_ray(z[j], [&](cplx w) { return detail::shift_integrand(w, p, m); });
    auto down = detail::vertical_ray(z[j], [&](cplx w) { return detail::shift_integrand(std::conj(w), p, m); });
    out.value += kappa * ((zeta[j] - I * xi[j]) * up.value - (zeta[j] + I * xi[j]) * down.value);
    out.error += std::abs(kappa) * (std::abs(zeta[j] - I * xi[j]) * up.error + std::abs(zeta[j] + I * xi[j]) * down.error);
  }
  return out;
}

struct CltPrediction {
  std::vector<cplx> points;
  std::vector<cplx> zeta;
  std::vector<cplx> xi;
  cplx sigma;
  cplx mu;
  double beta = 2.0;
  double quadrature_error = 0.0;
};

inline CltPrediction clt_prediction(std::vector<cplx> zeta, std::vector<cplx> xi, std::vector<cplx> z,
                                    const Potential& p, double beta) {
  CltPrediction out;
  out.sigma = sigma_cov(zeta, xi, z, beta, EdgeMaps::of(p));
  const auto shift = mu_shift(zeta, xi, z, p, beta);
  out.mu = shift.value;
  out.quadrature_error = shift.error;
  out.points = std::move(z);
  out.zeta = std::move(zeta);
  out.xi = std::move(xi);
  out.beta = beta;
  return out;
}

}  // namespace rmtlab
