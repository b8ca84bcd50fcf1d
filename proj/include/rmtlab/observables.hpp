#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "rmtlab/errors.hpp"
#include "rmtlab/measure.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab {

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace detail

// Regularized maximum F(w) = (1/delta) log sum_i exp(delta nu w_i).
inline double smoothed_max_F(std::span<const double> w, double nu, double delta) {
  if (w.empty()) throw DomainError("smoothed_max_F: empty vector");
  if (!(delta > 0.0)) throw DomainError("smoothed_max_F: delta must be positive");
  std::vector<double> x(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) throw DomainError("smoothed_max_F: non-finite entry");
    x[i] = delta * nu * w[i];
  }
  return detail::log_sum_exp(x) / delta;
}

// Smoothed maximal deviation of v from the classical locations:
// (1/delta) log sum_i [exp(delta nu_i (v_i - gamma_i)) + exp(delta nu_i (gamma_i - v_i))].
inline double smoothed_dev_Fhat(std::span<const double> values, std::span<const double> quantiles,
                                std::span<const double> weights, double delta) {
  if (values.empty()) throw DomainError("smoothed_dev_Fhat: empty vector");
  if (values.size() != quantiles.size() || values.size() != weights.size())
    throw DomainError("smoothed_dev_Fhat: length mismatch");
  if (!(delta > 0.0)) throw DomainError("smoothed_dev_Fhat: delta must be positive");
  std::vector<double> x;
  x.reserve(2 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = delta * weights[i] * (values[i] - quantiles[i]);
    if (!std::isfinite(d)) throw DomainError("smoothed_dev_Fhat: non-finite entry");
    x.push_back(d);
    x.push_back(-d);
  }
  return detail::log_sum_exp(x) / delta;
}

// Deviation weights sqrt(pi/2) N rho(gamma_k) / log N for the given indices (1-based).
inline std::vector<double> deviation_weights(const EquilibriumMeasure& nu, std::size_t n,
                                             std::span<const std::size_t> indices) {
  std::vector<double> w;
  w.reserve(indices.size());
  const double nd = static_cast<double>(n), c = std::sqrt(0.5 * std::numbers::pi) * nd / std::log(nd);
  for (std::size_t k : indices) w.push_back(c * nu.density(nu.quantile(n, k)));
  return w;
}

// Quintic smoothstep 6x^5 - 15x^4 + 10x^3 clamped to [0, 1]; C^2 with max slope 15/8.
inline double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

// Ramp f_E: 0 up to E, up on [E, E + eta1], 1 until 2.5, back down to 0 on [2.5, 3].
struct CountingRamp {
  double e;
  double eta1;
  static constexpr double kPlateauEnd = 2.5;
  static constexpr double kEnd = 3.0;

  double operator()(double x) const {
    if (x <= e || x >= kEnd) return 0.0;
    const double up = smoothstep5((x - e) / eta1);
    if (x <= kPlateauEnd) return up;
    return up * (1.0 - smoothstep5((x - kPlateauEnd) / (kEnd - kPlateauEnd)));
  }
};

// X = sum_i f_E(lambda_i) - N int f_E d nu.
inline double counting_statistic_X(const Spectrum& s, double e, double eta1,
                                   const EquilibriumMeasure& nu = EquilibriumMeasure::semicircle()) {
  if (!(eta1 > 0.0)) throw DomainError("counting_statistic_X: eta1 must be positive");
  if (!(e + eta1 < CountingRamp::kPlateauEnd)) throw DomainError("counting_statistic_X: E + eta1 must be below 2.5");
  const CountingRamp f{e, eta1};
  double x = 0.0;
  for (double l : s.values()) x += f(l);
  if (nu.is_none()) return x;
  const double lo = nu.lower_edge(), hi = nu.upper_edge();
  auto weighted = [&](double t) { return f(t) * nu.density(t); };
  double mass = 0.0;
  // rising ramp
  const double r0 = std::max(e, lo), r1 = std::min(e + eta1, hi);
  if (r1 > r0) mass += quad::integrate(weighted, r0, r1, 1e-12).value;
  // plateau
  const double p0 = std::max(e + eta1, lo), p1 = std::min(CountingRamp::kPlateauEnd, hi);
  if (p1 > p0) mass += nu.tail(p0) - nu.tail(p1);
  // falling ramp
  const double d0 = std::max(CountingRamp::kPlateauEnd, lo), d1 = std::min(CountingRamp::kEnd, hi);
  if (d1 > d0) mass += quad::integrate(weighted, d0, d1, 1e-12).value;
  return x - static_cast<double>(s.size()) * mass;
}

// X_p = X^{2p}.
inline double counting_moment_Xp(const Spectrum& s, double e, double eta1, double p,
                                 const EquilibriumMeasure& nu = EquilibriumMeasure::semicircle()) {
  if (!(p >= 1.0)) throw DomainError("counting_moment_Xp: p must be >= 1");
  return std::pow(std::abs(counting_statistic_X(s, e, eta1, nu)), 2.0 * p);
}

}  // namespace rmtlab
