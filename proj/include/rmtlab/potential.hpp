#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/quadrature.hpp"

namespace rmtlab {

// One-cut external potential with analytically supplied equilibrium data:
// rho_V(E) = (1/pi) sqrt((E-A)(B-E)) r(E) on [A, B].
struct Potential {
  std::string name;
  std::function<double(double)> value;   // V
  std::function<cplx(cplx)> derivative;  // V', analytically continued
  double a = -2.0;
  double b = 2.0;
  std::function<cplx(cplx)> r;
  std::function<cplx(cplx)> dr;
  bool r_analytic = true;
  bool quadratic = false;  // mu_V is exactly the semicircle law

  double density(double x) const {
    if (x <= a || x >= b) return 0.0;
    return std::sqrt((x - a) * (b - x)) * r(cplx(x, 0.0)).real() / std::numbers::pi;
  }

  // V(x) = x^2 / 2 on [-2, 2] with r = 1/2.
  static Potential quadratic_potential() {
    Potential p;
    p.name = "quadratic";
    p.value = [](double x) { return 0.5 * x * x; };
    p.derivative = [](cplx z) { return z; };
    p.r = [](cplx) { return cplx(0.5, 0.0); };
    p.dr = [](cplx) { return cplx(0.0, 0.0); };
    p.quadratic = true;
    return p;
  }

  // V(x) = x^2/2 + g x^4/4, g > 0. Matching 2 m_V + V' = 2 r b at infinity gives
  // r(z) = (1 + g a^2/2)/2 + (g/2) z^2 with 3 g a^4 + 4 a^2 - 16 = 0, support [-a, a].
  static Potential quartic_potential(double g) {
    if (!(g > 0.0)) throw ConfigError("quartic potential needs g > 0");
    const double a2 = (-4.0 + std::sqrt(16.0 + 192.0 * g)) / (6.0 * g);
    const double c0 = 0.5 * (1.0 + 0.5 * g * a2);
    const double c2 = 0.5 * g;
    Potential p;
    p.name = "quartic:" + std::to_string(g);
    p.value = [g](double x) { return 0.5 * x * x + 0.25 * g * x * x * x * x; };
    p.derivative = [g](cplx z) { return z + g * z * z * z; };
    p.a = -std::sqrt(a2);
    p.b = std::sqrt(a2);
    p.r = [c0, c2](cplx z) { return c0 + c2 * z * z; };
    p.dr = [c2](cplx z) { return 2.0 * c2 * z; };
    return p;
  }
};

// Parses "quadratic" or "quartic:<g>".
inline Potential potential_from_name(const std::string& name) {
  if (name == "quadratic") return Potential::quadratic_potential();
  if (name.rfind("quartic:", 0) == 0) {
    double g = 0.0;
    try {
      g = std::stod(name.substr(8));
    } catch (const std::exception&) {
      throw ConfigError("bad quartic coupling in '" + name + "'");
    }
    return Potential::quartic_potential(g);
  }
  throw ConfigError("unknown potential '" + name + "'");
}

// Checks that r has no zero on [A, B] and that rho_V has unit mass.
inline void validate(const Potential& p) {
  if (!(p.a < p.b)) throw ConfigError("potential support needs A < B");
  if (!p.r || !p.dr || !p.derivative || !p.value) throw ConfigError("potential is missing analytic data");
  constexpr int kGrid = 1000;
  for (int i = 0; i <= kGrid; ++i) {
    const double x = p.a + (p.b - p.a) * i / kGrid;
    if (std::abs(p.r(cplx(x, 0.0))) <= 1e-12) throw ConfigError("r vanishes on the support of " + p.name);
  }
  auto mass = quad::integrate_tau([&](double s) { return p.r(cplx(s, 0.0)).real() / std::numbers::pi; }, p.a, p.b);
  if (std::abs(mass.value - 1.0) > 1e-8) {
    throw ConfigError("equilibrium density of " + p.name + " does not integrate to 1");
  }
}

}  // namespace rmtlab
