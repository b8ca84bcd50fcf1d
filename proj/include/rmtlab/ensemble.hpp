#pragma once

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include <Eigen/Dense>

#include "rmtlab/errors.hpp"
#include "rmtlab/rng.hpp"

namespace rmtlab {

enum class EntryLaw { gaussian, rademacher, uniform };

inline EntryLaw entry_law_from_string(const std::string& s) {
  if (s == "gaussian") return EntryLaw::gaussian;
  if (s == "rademacher") return EntryLaw::rademacher;
  if (s == "uniform") return EntryLaw::uniform;
  throw ConfigError("unsupported entry law '" + s + "'");
}

inline std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform: return "uniform";
  }
  return "gaussian";
}

enum class EnsembleKind { goe, gue, wigner_real, wigner_complex, gaussian_divisible };

// Declarative Wigner-type ensemble: off-diagonal variance 1/N, diagonal C/N.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::goe;
  EntryLaw entry_law = EntryLaw::gaussian;
  std::size_t dimension = 0;
  // Unset means the class default: 2 for real symmetric, 1 for complex Hermitian.
  std::optional<double> diag_variance;
  double epsilon = 0.0;
  std::shared_ptr<const EnsembleSpec> base;

  static EnsembleSpec make(EnsembleKind kind, EntryLaw law, std::size_t n) {
    EnsembleSpec s;
    s.kind = kind;
    s.entry_law = law;
    s.dimension = n;
    return s;
  }
  static EnsembleSpec goe(std::size_t n) { return make(EnsembleKind::goe, EntryLaw::gaussian, n); }
  static EnsembleSpec gue(std::size_t n) { return make(EnsembleKind::gue, EntryLaw::gaussian, n); }
  static EnsembleSpec wigner_real(std::size_t n, EntryLaw law) { return make(EnsembleKind::wigner_real, law, n); }
  static EnsembleSpec wigner_complex(std::size_t n, EntryLaw law) { return make(EnsembleKind::wigner_complex, law, n); }
  static EnsembleSpec gaussian_divisible(double eps, EnsembleSpec base_spec) {
    EnsembleSpec s = make(EnsembleKind::gaussian_divisible, base_spec.entry_law, base_spec.dimension);
    s.epsilon = eps;
    s.base = std::make_shared<const EnsembleSpec>(std::move(base_spec));
    return s;
  }

  bool complex_hermitian() const {
    if (kind == EnsembleKind::gaussian_divisible) return base && base->complex_hermitian();
    return kind == EnsembleKind::gue || kind == EnsembleKind::wigner_complex;
  }
  double beta() const { return complex_hermitian() ? 2.0 : 1.0; }
  double diag_variance_const() const { return diag_variance.value_or(complex_hermitian() ? 1.0 : 2.0); }

  std::string tag() const {
    switch (kind) {
      case EnsembleKind::goe: return "goe";
      case EnsembleKind::gue: return "gue";
      case EnsembleKind::wigner_real: return "wigner-real-" + to_string(entry_law);
      case EnsembleKind::wigner_complex: return "wigner-complex-" + to_string(entry_law);
      case EnsembleKind::gaussian_divisible: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "divisible-%g-", epsilon);
        return buf + (base ? base->tag() : std::string("?"));
      }
    }
    return "?";
  }
};

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using DenseMatrix = std::variant<RealMatrix, ComplexMatrix>;

namespace detail {

// Centered draw with variance `var` from the given law.
inline double draw_entry(EntryLaw law, double var, RngStream& rng) {
  const double sd = std::sqrt(var);
  switch (law) {
    case EntryLaw::gaussian: return sd * rng.normal();
    case EntryLaw::rademacher: return rng.coin() ? sd : -sd;
    case EntryLaw::uniform: return sd * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
  }
  return 0.0;
}

inline RealMatrix sample_real(std::size_t n, EntryLaw law, double diag_const, RngStream& rng) {
  RealMatrix h(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double x = draw_entry(law, i == j ? diag_const * inv_n : inv_n, rng);
      h(i, j) = x;
      h(j, i) = x;
    }
  }
  return h;
}

// Off-diagonal real and imaginary parts independent, each with variance 1/(2N).
inline ComplexMatrix sample_complex(std::size_t n, EntryLaw law, double diag_const, RngStream& rng) {
  ComplexMatrix h(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (i == j) {
        h(i, i) = draw_entry(law, diag_const * inv_n, rng);
      } else {
        const double re = draw_entry(law, 0.5 * inv_n, rng);
        const double im = draw_entry(law, 0.5 * inv_n, rng);
        h(i, j) = {re, im};
        h(j, i) = {re, -im};
      }
    }
  }
  return h;
}

// a*M + b*G with G an independent Gaussian matrix of the same symmetry class
// (GOE for real symmetric input, GUE for complex Hermitian input).
inline DenseMatrix add_gaussian(const DenseMatrix& h, double a, double b, RngStream& rng) {
  return std::visit(
      [&](const auto& m) -> DenseMatrix {
        using M = std::decay_t<decltype(m)>;
        const auto n = static_cast<std::size_t>(m.rows());
        if constexpr (std::is_same_v<M, RealMatrix>) {
          return (a * m + b * sample_real(n, EntryLaw::gaussian, 2.0, rng)).eval();
        } else {
          return (a * m + b * sample_complex(n, EntryLaw::gaussian, 1.0, rng)).eval();
        }
      },
      h);
}

}  // namespace detail

inline DenseMatrix sample_matrix(const EnsembleSpec& spec, RngStream& rng) {
  const std::size_t n = spec.dimension;
  if (n == 0) throw DomainError("sample_matrix: dimension must be positive");
  if (spec.diag_variance && !(*spec.diag_variance > 0.0)) throw ConfigError("diagonal variance constant must be positive");
  switch (spec.kind) {
    case EnsembleKind::goe: return detail::sample_real(n, EntryLaw::gaussian, spec.diag_variance_const(), rng);
    case EnsembleKind::gue: return detail::sample_complex(n, EntryLaw::gaussian, spec.diag_variance_const(), rng);
    case EnsembleKind::wigner_real: return detail::sample_real(n, spec.entry_law, spec.diag_variance_const(), rng);
    case EnsembleKind::wigner_complex: return detail::sample_complex(n, spec.entry_law, spec.diag_variance_const(), rng);
    case EnsembleKind::gaussian_divisible: {
      if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw DomainError("Gaussian-divisible epsilon must lie in (0,1)");
      if (!spec.base) throw ConfigError("Gaussian-divisible ensemble without a base");
      EnsembleSpec base = *spec.base;
      base.dimension = n;
      const DenseMatrix h = sample_matrix(base, rng);
      return detail::add_gaussian(h, std::sqrt(1.0 - spec.epsilon * spec.epsilon), spec.epsilon, rng);
    }
  }
  throw ConfigError("unknown ensemble kind");
}

// sqrt(1-t) H + sqrt(t) W with W an independent GOE draw (GUE for Hermitian H).
inline DenseMatrix gaussian_divisible_mix(const DenseMatrix& h, double t, RngStream& rng) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("gaussian_divisible_mix: t must lie in (0,1)");
  return detail::add_gaussian(h, std::sqrt(1.0 - t), std::sqrt(t), rng);
}

}  // namespace rmtlab
