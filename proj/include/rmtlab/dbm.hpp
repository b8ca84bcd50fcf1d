#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/logfield.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/semicircle.hpp"

namespace rmtlab {

// Characteristic flow z_t of the semicircle under the Ornstein-Uhlenbeck
// Dyson Brownian motion. Real z is treated as the limit from the upper half plane.
inline cplx zt_map(cplx z, double t) {
  if (t < 0.0) throw DomainError("zt_map: t must be >= 0");
  const cplx b = sqrt_z2m4(z);
  return 0.5 * (std::exp(0.5 * t) * (z + b) + std::exp(-0.5 * t) * (z - b));
}

// Two particle systems driven by the same Brownian motions.
struct CoupledTrajectory {
  std::vector<double> lambda;
  std::vector<double> mu;
  double t = 0.0;
  std::size_t step_count = 0;
  std::size_t rejections = 0;
  std::uint64_t noise_seed = 0;
  int beta_class = 1;
};

struct Checkpoint {
  double t = 0.0;
  std::vector<double> lambda;
  std::vector<double> mu;
};

// adaptive: explicit Euler-Maruyama with gap-adaptive steps and bridge splitting.
// imex: fixed steps of dt_max; nearest-neighbour repulsion implicit (tridiagonal
// Newton solve), the rest explicit. Ordering is preserved by construction.
enum class DbmScheme { adaptive, imex };

struct DbmOptions {
  DbmScheme scheme = DbmScheme::adaptive;
  double dt_max = 1e-3;
  double theta = 0.1;  // dt <= theta * (min gap)^2 * N
  int max_halvings = 40;
  bool zero_noise = false;  // diagnostic: drift only
  std::vector<double> checkpoints;
};

struct DbmResult {
  CoupledTrajectory trajectory;
  std::vector<Checkpoint> checkpoints;
};

namespace detail {

inline bool strictly_ascending(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i - 1] < x[i])) return false;
  return true;
}

inline double min_gap(std::span<const double> x) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
  return g;
}

// (1/N) sum_{l != k} 1/(x_k - x_l) - x_k / 2.
inline void dbm_drift(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = x[k];
    double acc = 0.0;
    for (std::size_t l = k + 1; l < n; ++l) {
      const double r = 1.0 / (xk - x[l]);
      acc += r;
      out[l] -= r;
    }
    out[k] += acc;
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = out[k] * inv_n - 0.5 * x[k];
}

// One implicit nearest-neighbour solve: find the ordered y minimizing
//   sum_k (y_k - b_k)^2 / (2 dt) - (1/N) sum_k log(y_{k+1} - y_k),
// i.e. y = b + dt * F_nn(y), starting from the ordered point x.
inline void imex_solve(std::span<const double> x, std::span<const double> b, double dt, std::span<double> y) {
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::copy(x.begin(), x.end(), y.begin());
  if (n == 1) {
    y[0] = b[0];
    return;
  }
  auto merit = [&](std::span<const double> v) {
    double phi = 0.0;
    for (std::size_t k = 0; k < n; ++k) phi += (v[k] - b[k]) * (v[k] - b[k]) / (2.0 * dt);
    for (std::size_t k = 0; k + 1 < n; ++k) phi -= inv_n * std::log(v[k + 1] - v[k]);
    return phi;
  };
  std::vector<double> grad(n), h(n - 1), diag(n), cprime(n), step(n), trial(n);
  double phi = merit(y);
  for (int it = 0; it < 100; ++it) {
    double gnorm = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double g = y[k + 1] - y[k];
      h[k] = inv_n / (g * g);
    }
    for (std::size_t k = 0; k < n; ++k) {
      double f = 0.0;
      if (k > 0) f += inv_n / (y[k] - y[k - 1]);
      if (k + 1 < n) f -= inv_n / (y[k + 1] - y[k]);
      grad[k] = (y[k] - b[k]) / dt - f;
      diag[k] = 1.0 / dt + (k > 0 ? h[k - 1] : 0.0) + (k + 1 < n ? h[k] : 0.0);
      gnorm = std::max(gnorm, std::abs(grad[k]));
    }
    if (gnorm * dt < 1e-15) break;
    // Thomas algorithm for the SPD tridiagonal system J step = grad, off-diagonal -h.
    cprime[0] = -h[0] / diag[0];
    step[0] = grad[0] / diag[0];
    for (std::size_t k = 1; k < n; ++k) {
      const double denom = diag[k] + h[k - 1] * cprime[k - 1];
      cprime[k] = k + 1 < n ? -h[k] / denom : 0.0;
      step[k] = (grad[k] + h[k - 1] * step[k - 1]) / denom;
    }
    for (std::size_t k = n - 1; k-- > 0;) step[k] -= cprime[k] * step[k + 1];
    double slope = 0.0;
    for (std::size_t k = 0; k < n; ++k) slope += grad[k] * step[k];
    double alpha = 1.0, phi_new = phi;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = y[k] - alpha * step[k];
      if (!strictly_ascending(trial)) continue;
      phi_new = merit(trial);
      if (phi_new <= phi - 1e-4 * alpha * slope || alpha * gnorm * dt < 1e-15) break;
    }
    if (!strictly_ascending(trial)) throw IntegrationError("imex_solve: line search lost ordering");
    std::copy(trial.begin(), trial.end(), y.begin());
    phi = phi_new;
    if (alpha * gnorm * dt < 1e-15) break;
  }
}

// Explicit part of the drift: all interactions except nearest neighbours, plus
// the confinement -x_k / 2.
inline void far_drift(std::span<const double> x, std::span<double> out) {
  dbm_drift(x, out);
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) out[k] -= inv_n / (x[k] - x[k - 1]);
    if (k + 1 < n) out[k] += inv_n / (x[k + 1] - x[k]);
  }
}

}  // namespace detail

// Euler-Maruyama for d x_k = sqrt(2/(beta N)) dB_k + drift dt, applied to both
// systems with identical increments. The step is gap-adaptive; a step that would
// break ordering in either system is split with a Brownian bridge and retried.
inline DbmResult coupled_dbm_evolve(std::vector<double> lambda0, std::vector<double> mu0, double t_final,
                                    std::uint64_t noise_seed, int beta_class, const DbmOptions& opt = {}) {
  if (lambda0.size() != mu0.size()) throw DomainError("coupled_dbm_evolve: systems differ in size");
  if (lambda0.empty()) throw DomainError("coupled_dbm_evolve: empty configuration");
  if (!detail::strictly_ascending(lambda0) || !detail::strictly_ascending(mu0))
    throw DomainError("coupled_dbm_evolve: initial data must be strictly ascending");
  if (t_final > 2.0) throw ConfigError("coupled_dbm_evolve: t_final is capped at 2");
  if (t_final < 0.0) throw DomainError("coupled_dbm_evolve: t_final must be >= 0");
  if (beta_class != 1 && beta_class != 2) throw ConfigError("coupled_dbm_evolve: beta class must be 1 or 2");
  if (!(opt.dt_max > 0.0) || !(opt.theta > 0.0)) throw ConfigError("coupled_dbm_evolve: bad step parameters");

  const std::size_t n = lambda0.size();
  const double noise_scale = opt.zero_noise ? 0.0 : std::sqrt(2.0 / (beta_class * static_cast<double>(n)));
  RngStream rng(noise_seed, 0);

  DbmResult res;
  auto& tr = res.trajectory;
  tr.lambda = std::move(lambda0);
  tr.mu = std::move(mu0);
  tr.noise_seed = noise_seed;
  tr.beta_class = beta_class;

  std::vector<double> marks = opt.checkpoints;
  std::sort(marks.begin(), marks.end());
  std::size_t next_mark = 0;
  auto record_marks = [&] {
    while (next_mark < marks.size() && marks[next_mark] <= tr.t + 1e-15) {
      res.checkpoints.push_back({marks[next_mark], tr.lambda, tr.mu});
      ++next_mark;
    }
  };
  record_marks();

  if (opt.scheme == DbmScheme::imex) {
    std::vector<double> f_l(n), f_m(n), b_l(n), b_m(n), y_l(n), y_m(n), dw(n);
    while (tr.t < t_final) {
      double dt = opt.dt_max;
      double horizon = t_final;
      if (next_mark < marks.size() && marks[next_mark] < horizon) horizon = marks[next_mark];
      if (tr.t + dt >= horizon || horizon - (tr.t + dt) < 1e-12 * std::max(1.0, horizon)) dt = horizon - tr.t;
      const double sd = std::sqrt(dt);
      for (auto& w : dw) w = sd * rng.normal();
      detail::far_drift(tr.lambda, f_l);
      detail::far_drift(tr.mu, f_m);
      for (std::size_t k = 0; k < n; ++k) {
        const double noise = noise_scale * dw[k];
        b_l[k] = tr.lambda[k] + f_l[k] * dt + noise;
        b_m[k] = tr.mu[k] + f_m[k] * dt + noise;
      }
      detail::imex_solve(tr.lambda, b_l, dt, y_l);
      detail::imex_solve(tr.mu, b_m, dt, y_m);
      tr.lambda.swap(y_l);
      tr.mu.swap(y_m);
      tr.t = (tr.t + dt >= horizon) ? horizon : tr.t + dt;
      ++tr.step_count;
      record_marks();
    }
    return res;
  }

  struct Segment {
    double dt;
    std::vector<double> dw;  // Brownian increments over dt
    int depth;
  };
  std::vector<Segment> pending;
  std::vector<double> drift_l(n), drift_m(n), next_l(n), next_m(n);

  while (tr.t < t_final) {
    if (pending.empty()) {
      const double gap = std::min(detail::min_gap(tr.lambda), detail::min_gap(tr.mu));
      double dt = opt.dt_max;
      if (n > 1) dt = std::min(dt, opt.theta * gap * gap * static_cast<double>(n));
      double horizon = t_final;
      if (next_mark < marks.size() && marks[next_mark] < horizon) horizon = marks[next_mark];
      if (tr.t + dt >= horizon || horizon - (tr.t + dt) < 1e-12 * std::max(1.0, horizon)) dt = horizon - tr.t;
      Segment seg{dt, std::vector<double>(n), 0};
      const double sd = std::sqrt(dt);
      for (auto& w : seg.dw) w = sd * rng.normal();
      pending.push_back(std::move(seg));
    }
    Segment seg = std::move(pending.back());
    pending.pop_back();

    detail::dbm_drift(tr.lambda, drift_l);
    detail::dbm_drift(tr.mu, drift_m);
    for (std::size_t k = 0; k < n; ++k) {
      const double noise = noise_scale * seg.dw[k];
      next_l[k] = tr.lambda[k] + drift_l[k] * seg.dt + noise;
      next_m[k] = tr.mu[k] + drift_m[k] * seg.dt + noise;
    }
    if (detail::strictly_ascending(next_l) && detail::strictly_ascending(next_m)) {
      tr.lambda.swap(next_l);
      tr.mu.swap(next_m);
      tr.t += seg.dt;
      ++tr.step_count;
      if (pending.empty() && std::abs(tr.t - t_final) < 1e-13 * std::max(1.0, t_final)) tr.t = t_final;
      record_marks();
      continue;
    }
    ++tr.rejections;
    if (seg.depth >= opt.max_halvings) {
      std::string msg = "coupled_dbm_evolve: ordering violated after " + std::to_string(opt.max_halvings) +
                        " halvings at t=" + std::to_string(tr.t) + "; state:";
      for (std::size_t k = 0; k < std::min<std::size_t>(n, 16); ++k)
        msg += " (" + std::to_string(tr.lambda[k]) + "," + std::to_string(tr.mu[k]) + ")";
      throw IntegrationError(msg);
    }
    // Brownian bridge midpoint: W(dt/2) = W(dt)/2 + sqrt(dt)/2 * xi.
    Segment first{0.5 * seg.dt, std::vector<double>(n), seg.depth + 1};
    Segment second{0.5 * seg.dt, std::vector<double>(n), seg.depth + 1};
    const double sd = 0.5 * std::sqrt(seg.dt);
    for (std::size_t k = 0; k < n; ++k) {
      first.dw[k] = 0.5 * seg.dw[k] + sd * rng.normal();
      second.dw[k] = seg.dw[k] - first.dw[k];
    }
    pending.push_back(std::move(second));
    pending.push_back(std::move(first));
  }
  record_marks();
  return res;
}

struct HomogOptions {
  double kappa = 0.05;  // bulk window (-2 + kappa, 2 - kappa)
};

// Field form of the homogenized difference:
// (Im L^lambda(E_t) - Im L^mu(E_t)) / (N Im m_sc(E_t)), E_t = zt_map(E, t).
inline double homog_field_predictor(std::span<const double> lambda0, std::span<const double> mu0, double e, double t,
                                    const HomogOptions& opt = {}) {
  if (lambda0.size() != mu0.size()) throw DomainError("homog_predictor: systems differ in size");
  if (!(std::abs(e) < 2.0 - opt.kappa)) throw DomainError("homog_predictor: E outside the bulk window");
  const cplx et = zt_map(cplx(e, 0.0), t);
  if (!(et.imag() > 0.0)) throw DomainError("homog_predictor: t must be positive");
  // centering terms cancel in the difference
  const double diff = sum_log_arg(lambda0, et) - sum_log_arg(mu0, et);
  return diff / (static_cast<double>(lambda0.size()) * semicircle::stieltjes(et).imag());
}

// Quantile-kernel form with precomputed classical locations gamma[0..N-1]:
// (1 / (N Im m_sc(g_k^t))) sum_j Im(1/(g_j - g_k^t)) (lambda_j(0) - mu_j(0)).
inline double homog_kernel_predictor(std::span<const double> lambda0, std::span<const double> mu0,
                                     std::span<const double> gamma, std::size_t k, double t) {
  const std::size_t n = lambda0.size();
  if (mu0.size() != n || gamma.size() != n) throw DomainError("homog_predictor: systems differ in size");
  if (k < 1 || k > n) throw DomainError("homog_predictor: k out of range");
  const cplx gt = zt_map(cplx(gamma[k - 1], 0.0), t);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += (1.0 / (gamma[j] - gt)).imag() * (lambda0[j] - mu0[j]);
  return acc / (static_cast<double>(n) * semicircle::stieltjes(gt).imag());
}

inline double homog_kernel_predictor(std::span<const double> lambda0, std::span<const double> mu0, std::size_t k,
                                     double t) {
  std::vector<double> gamma(lambda0.size());
  for (std::size_t j = 0; j < gamma.size(); ++j) gamma[j] = semicircle::quantile(gamma.size(), j + 1);
  return homog_kernel_predictor(lambda0, mu0, gamma, k, t);
}

struct HomogPrediction {
  double ubar = 0.0;
  std::function<double(std::size_t)> kernel;  // k -> quantile-kernel form
};

inline HomogPrediction homog_predictor(std::vector<double> lambda0, std::vector<double> mu0, double e, double t,
                                       const HomogOptions& opt = {}) {
  HomogPrediction p;
  p.ubar = homog_field_predictor(lambda0, mu0, e, t, opt);
  std::vector<double> gamma(lambda0.size());
  for (std::size_t j = 0; j < gamma.size(); ++j) gamma[j] = semicircle::quantile(gamma.size(), j + 1);
  p.kernel = [l = std::move(lambda0), m = std::move(mu0), g = std::move(gamma), t](std::size_t k) {
    return homog_kernel_predictor(l, m, g, k, t);
  };
  return p;
}

}  // namespace rmtlab
