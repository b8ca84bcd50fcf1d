#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rmtlab::quad {

template <typename T>
struct Estimate {
  T value{};
  double error = 0.0;
};

// Adaptive 61-point Gauss-Kronrod on [a, b]; works for real or complex integrands.
template <typename F>
auto integrate(F&& f, double a, double b, double tol = 1e-13, unsigned max_depth = 16) {
  using R = decltype(f(a));
  Estimate<R> out;
  if (a == b) return out;
  double err = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol, &err);
  out.error = err;
  return out;
}

// Integrate over consecutive panels given by ascending breakpoints.
template <typename F>
auto integrate_panels(F&& f, const std::vector<double>& breaks, double tol = 1e-13) {
  using R = decltype(f(breaks.front()));
  Estimate<R> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto part = integrate(f, breaks[i], breaks[i + 1], tol);
    out.value += part.value;
    out.error += part.error;
  }
  return out;
}

// int_A^B g(s) tau(s) ds with tau(s) = sqrt((s-A)(B-s)), using s = A + (B-A) sin^2(theta)
// so the square-root edges become a smooth trigonometric weight. `split` (optional, inside
// (A, B)) marks a point where g is nearly singular and becomes a panel break.
template <typename G>
auto integrate_tau(G&& g, double a, double b, double tol = 1e-13, double split = NAN) {
  const double w = b - a;
  auto h = [&](double th) {
    const double s = std::sin(th), c = std::cos(th);
    return g(a + w * s * s) * (2.0 * w * w * s * s * c * c);
  };
  std::vector<double> breaks{0.0, 0.5 * std::numbers::pi};
  if (std::isfinite(split) && split > a && split < b) {
    breaks.insert(breaks.begin() + 1, std::asin(std::sqrt((split - a) / w)));
  }
  return integrate_panels(h, breaks, tol);
}

// Same substitution, restricted to s in [A, x].
template <typename G>
auto integrate_tau_upto(G&& g, double a, double b, double x, double tol = 1e-14) {
  const double w = b - a;
  auto h = [&](double th) {
    const double s = std::sin(th), c = std::cos(th);
    return g(a + w * s * s) * (2.0 * w * w * s * s * c * c);
  };
  const double th = std::asin(std::sqrt(std::clamp((x - a) / w, 0.0, 1.0)));
  return integrate(h, 0.0, th, tol);
}

}  // namespace rmtlab::quad
