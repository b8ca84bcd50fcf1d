#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <lapacke.h>

#include "rmtlab/ensemble.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab {

struct EigenOptions {
  std::size_t max_dimension = 4096;
  // Eigenpairs reconstructed and residual-checked per decomposition (0 disables).
  std::size_t residual_checks = 8;
  double residual_tolerance = 1e-8;  // relative to the Frobenius norm
};

namespace detail {

// FNV-1a over the raw matrix bytes, reported with numerical failures.
template <typename M>
std::string fingerprint(const M& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t bytes = static_cast<std::size_t>(m.size()) * sizeof(typename M::Scalar);
  for (std::size_t i = 0; i < bytes; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<lapack_int> residual_indices(std::size_t n, std::size_t count) {
  std::vector<lapack_int> idx;
  if (count == 0 || n == 0) return idx;
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = count == 1 ? 0 : (i * (n - 1)) / (count - 1);
    if (idx.empty() || idx.back() != static_cast<lapack_int>(k)) idx.push_back(static_cast<lapack_int>(k));
  }
  return idx;
}

}  // namespace detail

// Eigenvalues of a symmetric tridiagonal matrix (root-free QL/QR), ascending.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> off) {
  const auto n = static_cast<lapack_int>(diag.size());
  if (n == 0) return {};
  if (off.size() + 1 != diag.size()) throw DomainError("tridiagonal: off-diagonal length must be N-1");
  off.push_back(0.0);
  const lapack_int info = LAPACKE_dsterf(n, diag.data(), off.data());
  if (info != 0) throw NumericalError("tridiagonal eigensolver did not converge (info=" + std::to_string(info) + ")");
  return diag;
}

// Dense self-adjoint eigenvalues: Householder tridiagonalization followed by the
// root-free QL/QR iteration. A handful of eigenvectors are rebuilt by inverse
// iteration on the tridiagonal form and back-transformed to verify residuals.
template <typename M>
std::vector<double> self_adjoint_eigenvalues(const M& m, const EigenOptions& opt = {}) {
  using Scalar = typename M::Scalar;
  constexpr bool is_complex = !std::is_same_v<Scalar, double>;
  const auto n = static_cast<lapack_int>(m.rows());
  if (m.rows() != m.cols()) throw DomainError("eigenvalues: matrix is not square");
  if (n == 0) throw DomainError("eigenvalues: empty matrix");
  if (static_cast<std::size_t>(n) > opt.max_dimension) throw ConfigError("eigenvalues: dimension exceeds configured maximum");

  M a = m;  // column-major working copy, upper triangle referenced
  std::vector<double> d(n), e(std::max<lapack_int>(n - 1, 1));
  std::vector<Scalar> tau(std::max<lapack_int>(n - 1, 1));
  lapack_int info = 0;
  if constexpr (is_complex) {
    info = LAPACKE_zhetrd(LAPACK_COL_MAJOR, 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, d.data(),
                          e.data(), reinterpret_cast<lapack_complex_double*>(tau.data()));
  } else {
    info = LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'U', n, a.data(), n, d.data(), e.data(), tau.data());
  }
  if (info != 0) throw NumericalError("tridiagonalization failed, matrix " + detail::fingerprint(m));

  std::vector<double> w = d, work_e = e;
  info = LAPACKE_dsterf(n, w.data(), work_e.data());
  if (info != 0) {
    throw NumericalError("QL iteration did not converge after iteration cap, matrix " + detail::fingerprint(m));
  }

  const auto picks = detail::residual_indices(static_cast<std::size_t>(n), opt.residual_checks);
  if (!picks.empty() && n > 1) {
    const auto cnt = static_cast<lapack_int>(picks.size());
    std::vector<double> wsel(n, 0.0);  // LAPACKE NaN-checks all n entries of w
    for (lapack_int i = 0; i < cnt; ++i) wsel[i] = w[picks[i]];
    std::vector<lapack_int> iblock(cnt, 1), isplit(n, n), ifail(cnt, 0);
    std::vector<double> ztri(static_cast<std::size_t>(n) * cnt);
    info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), cnt, wsel.data(), iblock.data(), isplit.data(),
                          ztri.data(), n, ifail.data());
    if (info < 0) throw NumericalError("inverse iteration failed (info=" + std::to_string(info) + "), matrix " + detail::fingerprint(m));
    M z(n, cnt);
    for (lapack_int j = 0; j < cnt; ++j)
      for (lapack_int i = 0; i < n; ++i) z(i, j) = ztri[static_cast<std::size_t>(j) * n + i];
    if constexpr (is_complex) {
      info = LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', n, cnt, reinterpret_cast<lapack_complex_double*>(a.data()),
                            n, reinterpret_cast<const lapack_complex_double*>(tau.data()),
                            reinterpret_cast<lapack_complex_double*>(z.data()), n);
    } else {
      info = LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', n, cnt, a.data(), n, tau.data(), z.data(), n);
    }
    if (info != 0) throw NumericalError("back-transformation failed, matrix " + detail::fingerprint(m));
    const double tol = opt.residual_tolerance * m.norm();
    for (lapack_int j = 0; j < cnt; ++j) {
      const auto v = z.col(j);
      const double res = (m * v - wsel[j] * v).norm() / std::max(v.norm(), 1e-300);
      if (!(res <= tol)) {
        throw NumericalError("eigenpair residual " + std::to_string(res) + " exceeds tolerance, matrix " +
                             detail::fingerprint(m));
      }
    }
  }
  return w;
}

inline Spectrum eigenvalues(const DenseMatrix& m, double beta, std::uint64_t seed, const std::string& tag,
                            const EigenOptions& opt = {}) {
  auto w = std::visit([&](const auto& x) { return self_adjoint_eigenvalues(x, opt); }, m);
  return Spectrum(std::move(w), beta, seed, tag);
}

inline Spectrum eigenvalues(const DenseMatrix& m, const EigenOptions& opt = {}) {
  const double beta = std::holds_alternative<ComplexMatrix>(m) ? 2.0 : 1.0;
  return eigenvalues(m, beta, 0, "matrix", opt);
}

}  // namespace rmtlab
