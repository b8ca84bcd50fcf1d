#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/measure.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab {

enum class FieldPart { re, im };

// Values of L_N(E + i eta) on an energy grid.
struct FieldGrid {
  std::vector<double> energies;
  double eta = 0.0;
  std::vector<cplx> values;
  Centering centering = Centering::semicircle;
  std::size_t n = 0;
};

namespace detail {

// sum_j log(q_j) for q_j >= 0, multiplying in blocks and renormalizing the
// exponent so only one log is taken per block. Any q_j == 0 yields -inf.
template <typename Q>
double sum_log(std::size_t count, Q&& q) {
  constexpr double kSafeLo = 1e-30, kSafeHi = 1e30;
  double acc = 0.0, prod = 1.0;
  int exps = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double x = q(j);
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (x < kSafeLo || x > kSafeHi) {
      acc += std::log(x);
      continue;
    }
    prod *= x;
    if ((j & 7u) == 7u) {
      int e = 0;
      prod = std::frexp(prod, &e);
      exps += e;
    }
  }
  return acc + std::log(prod) + exps * std::numbers::ln2;
}

}  // namespace detail

inline cplx log_potential(cplx z, const EquilibriumMeasure& nu) { return nu.log_potential(z); }

// sum_j Re log(z - lambda_j), -inf when a real z hits an eigenvalue.
inline double sum_log_abs(std::span<const double> lam, cplx z) {
  const double e = z.real(), eta = z.imag();
  if (eta == 0.0) return detail::sum_log(lam.size(), [&](std::size_t j) { return std::abs(e - lam[j]); });
  const double eta2 = eta * eta;
  return 0.5 * detail::sum_log(lam.size(), [&](std::size_t j) {
           const double d = e - lam[j];
           return d * d + eta2;
         });
}

// sum_j Im log(z - lambda_j) with the branch conventions of the real-axis limit:
// pi * #{lambda_j > E} on the axis, pi/2 + atan((lambda_j - E)/eta) above it.
inline double sum_log_arg(std::span<const double> lam, cplx z) {
  const double e = z.real(), eta = z.imag();
  if (eta == 0.0) {
    const auto above = lam.end() - std::upper_bound(lam.begin(), lam.end(), e);
    return std::numbers::pi * static_cast<double>(above);
  }
  double s = 0.0;
  for (double l : lam) s += std::atan((l - e) / eta);
  return 0.5 * std::numbers::pi * static_cast<double>(lam.size()) + s;
}

// L_N(z) = sum_j log(z - lambda_j) - N U_nu(z) for Im z >= 0.
inline cplx log_char_poly(const Spectrum& s, cplx z, const EquilibriumMeasure& nu) {
  if (z.imag() < 0.0) throw DomainError("log_char_poly: Im z < 0, conjugate externally");
  const auto n = static_cast<double>(s.size());
  cplx l(sum_log_abs(s.values(), z), sum_log_arg(s.values(), z));
  if (!nu.is_none()) l -= n * nu.log_potential(z);
  return l;
}

// Single part of L_N(z).
inline double log_char_poly_part(const Spectrum& s, cplx z, const EquilibriumMeasure& nu, FieldPart part) {
  if (z.imag() < 0.0) throw DomainError("log_char_poly: Im z < 0, conjugate externally");
  const auto n = static_cast<double>(s.size());
  if (part == FieldPart::re) {
    const double v = sum_log_abs(s.values(), z);
    return nu.is_none() ? v : v - n * nu.log_potential(z).real();
  }
  const double v = sum_log_arg(s.values(), z);
  return nu.is_none() ? v : v - n * nu.log_potential(z).imag();
}

// s_N(z) = (1/N) sum_k 1/(lambda_k - z).
inline cplx stieltjes(const Spectrum& s, cplx z) {
  if (z.imag() == 0.0) throw DomainError("stieltjes: Im z must be nonzero");
  cplx acc = 0.0;
  for (double l : s.values()) acc += 1.0 / (l - z);
  return acc / static_cast<double>(s.size());
}

// Im L_N(E) - pi (#{lambda > E} - N nu((E, inf))); zero up to quadrature error.
inline double counting_residual(const Spectrum& s, double e, const EquilibriumMeasure& nu) {
  const double im_l = log_char_poly_part(s, cplx(e, 0.0), nu, FieldPart::im);
  const auto lam = s.values();
  const auto above = static_cast<double>(lam.end() - std::upper_bound(lam.begin(), lam.end(), e));
  const double centering = nu.is_none() ? 0.0 : static_cast<double>(s.size()) * nu.tail(e);
  return im_l - std::numbers::pi * (above - centering);
}

inline FieldGrid field_on_grid(const Spectrum& s, std::span<const double> energies, double eta,
                               const EquilibriumMeasure& nu) {
  if (eta < 0.0) throw DomainError("field_on_grid: eta must be >= 0");
  for (std::size_t i = 1; i < energies.size(); ++i)
    if (!(energies[i - 1] < energies[i])) throw DomainError("field_on_grid: energies must be strictly increasing");
  FieldGrid g;
  g.energies.assign(energies.begin(), energies.end());
  g.eta = eta;
  g.centering = nu.tag();
  g.n = s.size();
  g.values.reserve(energies.size());
  for (double e : energies) g.values.push_back(log_char_poly(s, cplx(e, eta), nu));
  return g;
}

// Uniform grid on [a, b] with spacing at most `spacing`, both ends included.
inline std::vector<double> uniform_grid(double a, double b, double spacing) {
  if (!(b > a)) throw DomainError("uniform_grid: empty interval");
  if (!(spacing > 0.0)) throw DomainError("uniform_grid: spacing must be positive");
  const auto cells = static_cast<std::size_t>(std::ceil((b - a) / spacing - 1e-12));
  std::vector<double> e(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) e[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(cells);
  e.back() = b;
  return e;
}

// |Re L_N(E + i eta0) - int_grid Re L_N(x) P_eta0(E - x) dx| with the Poisson kernel
// P_eta(y) = eta / (pi (eta^2 + y^2)) integrated over the real-axis grid by trapezoid.
inline double poisson_check(const Spectrum& s, const FieldGrid& axis, double eta0, double e,
                            const EquilibriumMeasure& nu, double kappa = 0.05) {
  if (axis.eta != 0.0) throw ConfigError("poisson_check: field must be sampled on the real axis");
  if (axis.energies.size() < 3) throw ConfigError("poisson_check: grid too small");
  if (!(eta0 > 0.0)) throw DomainError("poisson_check: eta0 must be positive");
  const auto& x = axis.energies;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] - x[i - 1] > eta0 / 20.0 * (1.0 + 1e-9)) throw ConfigError("poisson_check: grid spacing exceeds eta0/20");
  if (e - x.front() < kappa || x.back() - e < kappa) throw DomainError("poisson_check: E too close to the grid ends");
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    auto f = [&](std::size_t k) {
      const double y = e - x[k];
      const double v = axis.values[k].real();
      if (!std::isfinite(v)) throw ConfigError("poisson_check: grid point coincides with an eigenvalue");
      return v * eta0 / (std::numbers::pi * (eta0 * eta0 + y * y));
    };
    integral += 0.5 * (x[i + 1] - x[i]) * (f(i) + f(i + 1));
  }
  const double lifted = log_char_poly_part(s, cplx(e, eta0), nu, FieldPart::re);
  return std::abs(lifted - integral);
}

struct FieldMax {
  double argmax = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Maximum of Re or Im L_N(E + i eta) over E in [a, b] on a grid, refined by one
// golden-section pass on the winning cell. On the real axis the imaginary part is
// piecewise monotone with downward jumps at eigenvalues, so its supremum is taken
// over the grid together with the left limits at eigenvalues inside the window.
inline FieldMax field_sup(const Spectrum& s, double a, double b, double eta, FieldPart part, double spacing,
                          const EquilibriumMeasure& nu) {
  if (!(b > a)) throw DomainError("field_sup: empty interval");
  if (eta < 0.0) throw DomainError("field_sup: eta must be >= 0");
  const auto grid = uniform_grid(a, b, spacing);
  auto f = [&](double e) { return log_char_poly_part(s, cplx(e, eta), nu, part); };

  FieldMax best;
  std::size_t ibest = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best.value) {
      best = {grid[i], v};
      ibest = i;
    }
  }

  const auto lam = s.values();
  const auto n = static_cast<double>(s.size());
  if (part == FieldPart::im && eta == 0.0) {
    auto first = std::upper_bound(lam.begin(), lam.end(), a);
    for (auto it = first; it != lam.end() && *it <= b; ++it) {
      const auto above = static_cast<double>(lam.end() - it);  // includes *it itself
      const double u = nu.is_none() ? 0.0 : n * nu.log_potential(cplx(*it, 0.0)).imag();
      const double v = std::numbers::pi * above - u;
      if (v > best.value) best = {*it, v};
    }
    return best;
  }

  double lo = grid[ibest == 0 ? 0 : ibest - 1];
  double hi = grid[std::min(ibest + 1, grid.size() - 1)];
  if (eta == 0.0) {
    // stay between the eigenvalues that bracket the grid maximizer
    const double e0 = grid[ibest];
    auto up = std::upper_bound(lam.begin(), lam.end(), e0);
    if (up != lam.end()) hi = std::min(hi, *up);
    if (up != lam.begin() && *(up - 1) < e0) lo = std::max(lo, *(up - 1));
  }
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    }
  }
  if (f1 > best.value) best = {x1, f1};
  if (f2 > best.value) best = {x2, f2};
  return best;
}

// Per-sample normalized exponential field exp(sqrt(beta) gamma Re L_N(E + i eta0))
// divided by its cross-sample mean at each grid point, plus the trapezoid mass.
struct GmcField {
  std::vector<double> energies;
  std::vector<std::vector<double>> density;  // [sample][grid point]
  std::vector<double> mass;                  // per sample
};

inline constexpr std::size_t kMinGmcSamples = 100;

inline GmcField gmc_density(std::span<const Spectrum> samples, double gamma, double eta0,
                            std::span<const double> energies, const EquilibriumMeasure& nu) {
  if (!(std::abs(gamma) < std::numbers::sqrt2)) throw DomainError("gmc_density: |gamma| must be < sqrt(2)");
  if (!(eta0 > 0.0)) throw DomainError("gmc_density: eta0 must be positive");
  if (samples.size() < kMinGmcSamples) throw DomainError("gmc_density: at least 100 samples are required");
  if (energies.size() < 2) throw DomainError("gmc_density: grid needs two points");
  const std::size_t m = samples.size(), g = energies.size();
  GmcField out;
  out.energies.assign(energies.begin(), energies.end());
  out.density.assign(m, std::vector<double>(g));
  std::vector<std::vector<double>> expo(m, std::vector<double>(g));
  for (std::size_t s = 0; s < m; ++s) {
    const double coef = std::sqrt(samples[s].beta()) * gamma;
    for (std::size_t i = 0; i < g; ++i)
      expo[s][i] = coef * log_char_poly_part(samples[s], cplx(energies[i], eta0), nu, FieldPart::re);
  }
  for (std::size_t i = 0; i < g; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < m; ++s) top = std::max(top, expo[s][i]);
    double mean = 0.0;
    for (std::size_t s = 0; s < m; ++s) mean += std::exp(expo[s][i] - top);
    mean /= static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) out.density[s][i] = std::exp(expo[s][i] - top) / mean;
  }
  out.mass.resize(m);
  for (std::size_t s = 0; s < m; ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < g; ++i)
      acc += 0.5 * (energies[i + 1] - energies[i]) * (out.density[s][i] + out.density[s][i + 1]);
    out.mass[s] = acc;
  }
  return out;
}

}  // namespace rmtlab
