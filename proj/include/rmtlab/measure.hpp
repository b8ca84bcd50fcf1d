#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/potential.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/semicircle.hpp"

namespace rmtlab {

enum class Centering { semicircle, quadratic_mu_v, one_cut, none };

inline std::string to_string(Centering c) {
  switch (c) {
    case Centering::semicircle: return "semicircle";
    case Centering::quadratic_mu_v: return "quadratic-mu_v";
    case Centering::one_cut: return "one-cut";
    case Centering::none: return "none";
  }
  return "none";
}

// Equilibrium measure used to center the log-characteristic polynomial and to
// define classical locations. Semicircle-type measures use closed forms; a general
// one-cut measure is integrated numerically from its potential data.
class EquilibriumMeasure {
 public:
  static EquilibriumMeasure semicircle() { return EquilibriumMeasure(Centering::semicircle); }
  static EquilibriumMeasure none() { return EquilibriumMeasure(Centering::none); }

  static EquilibriumMeasure from_potential(const Potential& p) {
    if (p.quadratic) return EquilibriumMeasure(Centering::quadratic_mu_v);
    EquilibriumMeasure m(Centering::one_cut);
    m.potential_ = std::make_shared<const Potential>(p);
    return m;
  }

  Centering tag() const noexcept { return tag_; }
  bool closed_form() const noexcept { return tag_ == Centering::semicircle || tag_ == Centering::quadratic_mu_v; }
  bool is_none() const noexcept { return tag_ == Centering::none; }

  double lower_edge() const { return potential_ ? potential_->a : -2.0; }
  double upper_edge() const { return potential_ ? potential_->b : 2.0; }

  double density(double x) const {
    if (is_none()) return 0.0;
    if (closed_form()) return semicircle::density(x);
    return potential_->density(x);
  }

  double cdf(double x) const {
    if (is_none()) throw DomainError("cdf of the empty centering measure");
    if (closed_form()) return semicircle::cdf(x);
    const auto& p = *potential_;
    if (x <= p.a) return 0.0;
    if (x >= p.b) return 1.0;
    auto g = [&p](double s) { return p.r(cplx(s, 0.0)).real() / std::numbers::pi; };
    return std::clamp(quad::integrate_tau_upto(g, p.a, p.b, x).value, 0.0, 1.0);
  }

  // Mass of (x, infinity).
  double tail(double x) const {
    if (is_none()) return 0.0;
    if (closed_form()) return semicircle::tail(x);
    const auto& p = *potential_;
    if (x <= p.a) return 1.0;
    if (x >= p.b) return 0.0;
    // reflect s -> A + B - s so the tail is also an integral from the lower edge
    auto g = [&p](double s) { return p.r(cplx(p.a + p.b - s, 0.0)).real() / std::numbers::pi; };
    return std::clamp(quad::integrate_tau_upto(g, p.a, p.b, p.a + p.b - x).value, 0.0, 1.0);
  }

  // m(z) = int rho(x) / (x - z) dx.
  cplx stieltjes(cplx z) const {
    if (is_none()) return 0.0;
    if (z.imag() == 0.0) throw DomainError("Stieltjes transform at a real point");
    if (closed_form()) return semicircle::stieltjes(z);
    const auto& p = *potential_;
    const cplx b = sqrt_upper(z - p.a) * sqrt_upper(z - p.b);
    return p.r(z) * b - 0.5 * p.derivative(z);
  }

  // U(z) = int log(z - x) d nu(x) for Im z >= 0, real axis by the upper limit.
  cplx log_potential(cplx z) const {
    if (z.imag() < 0.0) throw DomainError("log_potential: Im z < 0, conjugate externally");
    if (is_none()) return 0.0;
    if (closed_form()) return semicircle::log_potential(z);
    const auto& p = *potential_;
    const double e = z.real();
    auto g = [&](double s) -> cplx {
      const double rr = p.r(cplx(s, 0.0)).real() / std::numbers::pi;
      if (z.imag() == 0.0) {
        return rr * cplx(std::log(std::abs(e - s)), s > e ? std::numbers::pi : 0.0);
      }
      return rr * std::log(z - s);
    };
    return quad::integrate_tau(g, p.a, p.b, 1e-13, e).value;
  }

  // Classical location gamma_k: cdf(gamma_k) = (k - 1/2) / N.
  double quantile(std::size_t n, std::size_t k) const {
    if (is_none()) throw DomainError("quantiles of the empty centering measure");
    if (closed_form()) return semicircle::quantile(n, k);
    if (n == 0 || k < 1 || k > n) throw DomainError("quantile: k out of range");
    const double target = (static_cast<double>(k) - 0.5) / static_cast<double>(n);
    double lo = lower_edge(), hi = upper_edge();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (cdf(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  const Potential* potential() const noexcept { return potential_.get(); }

 private:
  explicit EquilibriumMeasure(Centering tag) : tag_(tag) {}

  Centering tag_;
  std::shared_ptr<const Potential> potential_;
};

}  // namespace rmtlab
