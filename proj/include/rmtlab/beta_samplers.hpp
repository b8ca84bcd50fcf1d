#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rmtlab/eigensolver.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/measure.hpp"
#include "rmtlab/potential.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab {

// Gaussian beta-ensemble with V(x) = x^2/2 through its tridiagonal model:
// diagonal N(0, 2), off-diagonal chi_{beta (N-1)}, ..., chi_beta, all scaled by
// 1/sqrt(beta N) so the limiting spectrum is the semicircle on [-2, 2].
inline Spectrum sample_gbeta_tridiag(std::size_t n, double beta, RngStream& rng) {
  if (!(beta > 0.0)) throw DomainError("sample_gbeta_tridiag: beta must be positive");
  if (n < 2) throw DomainError("sample_gbeta_tridiag: N must be at least 2");
  const double scale = 1.0 / std::sqrt(beta * static_cast<double>(n));
  std::vector<double> d(n), e(n - 1);
  for (auto& x : d) x = std::sqrt(2.0) * rng.normal() * scale;
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = rng.chi(beta * static_cast<double>(n - 1 - i)) * scale;
  return Spectrum(tridiagonal_eigenvalues(std::move(d), std::move(e)), beta, rng.stream_index(), "gbeta-tridiag");
}

struct McmcOptions {
  std::size_t burn_in = 0;  // single-site proposals; 0 means 500 * N
  std::size_t sweeps = 50;  // production sweeps of N proposals each
  double min_acceptance = 0.05;
};

struct McmcDiagnostics {
  double proposal_scale = 0.0;
  double acceptance = 0.0;
};

// Random-walk Metropolis on the beta-ensemble log-density
// beta sum_{k<l} log|x_k - x_l| - (beta N / 2) sum_k V(x_k). Returns the final state
// (one approximate sample). The proposal scale is tuned toward 30-50% acceptance
// during burn-in.
inline Spectrum sample_beta_mcmc(const Potential& p, std::size_t n, double beta, RngStream& rng,
                                 const McmcOptions& opt = {}, McmcDiagnostics* diag = nullptr) {
  if (!(beta > 0.0)) throw DomainError("sample_beta_mcmc: beta must be positive");
  if (n == 0) throw DomainError("sample_beta_mcmc: N must be positive");
  const auto nd = static_cast<double>(n);
  const EquilibriumMeasure nu = EquilibriumMeasure::from_potential(p);
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = nu.quantile(n, k + 1);

  auto delta_log = [&](std::size_t i, double y) {
    double acc = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      const double dn = std::abs(y - x[l]), d0 = std::abs(x[i] - x[l]);
      if (dn == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(dn / d0);
    }
    return beta * acc - 0.5 * beta * nd * (p.value(y) - p.value(x[i]));
  };

  double scale = n > 1 ? (p.b - p.a) / nd : 1.0 / std::sqrt(beta);
  const std::size_t burn = opt.burn_in ? opt.burn_in : 500 * n;
  constexpr std::size_t kBatch = 100;
  std::size_t batch_acc = 0, batch_cnt = 0;
  auto propose = [&](std::size_t i) {
    const double y = x[i] + scale * rng.normal();
    const double dl = delta_log(i, y);
    if (dl >= 0.0 || std::log(rng.uniform()) < dl) {
      x[i] = y;
      return true;
    }
    return false;
  };
  for (std::size_t s = 0; s < burn; ++s) {
    batch_acc += propose(s % n) ? 1 : 0;
    if (++batch_cnt == kBatch) {
      const double rate = static_cast<double>(batch_acc) / kBatch;
      if (rate > 0.5) scale *= 1.2;
      if (rate < 0.3) scale /= 1.2;
      batch_acc = batch_cnt = 0;
    }
  }
  std::size_t accepted = 0;
  const std::size_t total = opt.sweeps * n;
  for (std::size_t s = 0; s < total; ++s) accepted += propose(s % n) ? 1 : 0;
  const double rate = total ? static_cast<double>(accepted) / static_cast<double>(total) : 1.0;
  if (diag) *diag = {scale, rate};
  if (rate < opt.min_acceptance) {
    throw SamplerHealthError("sample_beta_mcmc: acceptance " + std::to_string(rate) + " below threshold");
  }
  std::sort(x.begin(), x.end());
  return Spectrum(std::move(x), beta, rng.stream_index(), "mcmc-" + p.name);
}

}  // namespace rmtlab
