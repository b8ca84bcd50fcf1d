#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rmtlab/beta_clt.hpp"
#include "rmtlab/beta_samplers.hpp"
#include "rmtlab/config.hpp"
#include "rmtlab/dbm.hpp"
#include "rmtlab/eigensolver.hpp"
#include "rmtlab/ensemble.hpp"
#include "rmtlab/logfield.hpp"
#include "rmtlab/measure.hpp"
#include "rmtlab/potential.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/semicircle.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab {

struct ResultRow {
  std::size_t n = 0;
  std::size_t sample = 0;
  std::string stat;
  double value = 0.0;
};

// Per-size summaries; rows with n == 0 summarize across sizes (slope fits).
struct SummaryRow {
  std::size_t n = 0;
  std::string stat;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double iqr = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
};

// Empirical value next to its analytic prediction.
struct ComparisonRow {
  std::size_t n = 0;
  std::string stat;
  double empirical = 0.0;
  double predicted = 0.0;
  double std_error = 0.0;
};

struct ResultTable {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<ComparisonRow> comparisons;
  std::vector<std::string> warnings;

  std::vector<double> values(std::size_t n, const std::string& stat) const {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.n == n && r.stat == stat) v.push_back(r.value);
    return v;
  }
  const SummaryRow* find_summary(std::size_t n, const std::string& stat) const {
    for (const auto& s : summary)
      if (s.n == n && s.stat == stat) return &s;
    return nullptr;
  }
  const ComparisonRow* find_comparison(std::size_t n, const std::string& stat) const {
    for (const auto& c : comparisons)
      if (c.n == n && c.stat == stat) return &c;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Statistics helpers

namespace stats {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Unbiased sample variance.
inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

// Linear-interpolation quantile of a sample (Hyndman-Fan type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }
inline double iqr(const std::vector<double>& v) { return quantile(v, 0.75) - quantile(v, 0.25); }

struct LineFit {
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
};

// Ordinary least squares. With per-point standard errors the slope error is
// propagated from them; otherwise it comes from the residuals.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<double>& y_se = {}) {
  LineFit f;
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return f;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (y_se.size() == n) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (x[i] - mx) * (x[i] - mx) * y_se[i] * y_se[i];
    f.slope_se = std::sqrt(v) / sxx;
  } else if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  KsResult r;
  if (a.empty() || b.empty()) return r;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    r.statistic = std::max(r.statistic, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * r.statistic;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  r.p_value = std::clamp(p, 0.0, 1.0);
  if (lam < 1e-3) r.p_value = 1.0;
  return r;
}

// One-sample Kolmogorov-Smirnov distance to a continuous cdf.
template <typename Cdf>
double ks_distance(std::vector<double> v, Cdf&& cdf) {
  std::sort(v.begin(), v.end());
  double d = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace stats

// Per-size summary of every statistic in the table, in first-appearance order.
inline void summarize_rows(ResultTable& t) {
  std::vector<std::pair<std::size_t, std::string>> keys;
  for (const auto& r : t.rows) {
    const std::pair<std::size_t, std::string> k{r.n, r.stat};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [n, stat] : keys) {
    const auto v = t.values(n, stat);
    SummaryRow s;
    s.n = n;
    s.stat = stat;
    s.mean = stats::mean(v);
    s.median = stats::median(v);
    s.iqr = stats::iqr(v);
    t.summary.push_back(s);
  }
}

// Cross-size row: slope of the per-size mean of `stat` against log N, with the
// slope error propagated from the Monte Carlo standard errors of the means.
inline void add_log_slope(ResultTable& t, const std::vector<std::size_t>& sizes, const std::string& stat) {
  std::vector<double> x, y, se;
  for (std::size_t n : sizes) {
    const auto v = t.values(n, stat);
    if (v.empty()) continue;
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(stats::mean(v));
    const double var = stats::variance(v);
    se.push_back(std::isfinite(var) ? std::sqrt(var / static_cast<double>(v.size())) : 0.0);
  }
  SummaryRow s;
  s.stat = stat;
  if (x.size() >= 2) {
    const auto f = stats::fit_line(x, y, se);
    s.slope = f.slope;
    s.slope_se = f.slope_se;
  }
  t.summary.push_back(s);
}

// ---------------------------------------------------------------------------
// Deterministic worker pool: task i writes slot i, so the result is independent
// of scheduling. The lowest-index failure is rethrown after all workers finish.

template <typename F>
auto parallel_map(std::size_t count, std::size_t workers, F&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t w = std::max<std::size_t>(1, std::min(workers, count));
  if (w == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble resolution and sampling

enum class SamplerKind { dense, gbeta_tridiag, mcmc };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::dense;
  EnsembleSpec dense;
  double beta = 1.0;
  std::string potential = "quadratic";
  std::size_t mcmc_sweeps = 50;
};

namespace detail {

inline EnsembleSpec dense_from_name(const std::string& name, std::size_t n) {
  if (name == "goe") return EnsembleSpec::goe(n);
  if (name == "gue") return EnsembleSpec::gue(n);
  if (name.rfind("wigner-real:", 0) == 0) return EnsembleSpec::wigner_real(n, entry_law_from_string(name.substr(12)));
  if (name.rfind("wigner-complex:", 0) == 0)
    return EnsembleSpec::wigner_complex(n, entry_law_from_string(name.substr(15)));
  if (name.rfind("divisible:", 0) == 0) {
    const auto rest = name.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ConfigError("divisible ensemble needs 'divisible:<eps>:<base>'");
    const double eps = parse_double("ensemble", rest.substr(0, colon));
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("divisible epsilon must lie in (0, 1)");
    return EnsembleSpec::gaussian_divisible(eps, dense_from_name(rest.substr(colon + 1), n));
  }
  throw ConfigError("unknown ensemble '" + name + "'");
}

}  // namespace detail

// Ensemble names: goe, gue, wigner-real:<law>, wigner-complex:<law>,
// divisible:<eps>:<base>, gbeta (tridiagonal, quadratic V), mcmc (general V).
inline SamplerSpec resolve_sampler(const ExperimentConfig& c, std::size_t n) {
  SamplerSpec s;
  s.potential = c.potential;
  s.mcmc_sweeps = c.mcmc_sweeps;
  if (c.ensemble == "gbeta") {
    if (c.potential != "quadratic") throw ConfigError("gbeta sampler supports only the quadratic potential");
    s.kind = SamplerKind::gbeta_tridiag;
    s.beta = c.beta;
  } else if (c.ensemble == "mcmc") {
    s.kind = SamplerKind::mcmc;
    s.beta = c.beta;
  } else {
    s.dense = detail::dense_from_name(c.ensemble, n);
    s.beta = s.dense.beta();
  }
  return s;
}

inline double ensemble_beta(const ExperimentConfig& c) { return resolve_sampler(c, 1).beta; }

// Centering measure: semicircle for Wigner classes, mu_V for beta-ensembles.
inline EquilibriumMeasure centering_for(const ExperimentConfig& c) {
  if (c.ensemble == "gbeta" || c.ensemble == "mcmc") {
    const Potential p = potential_from_name(c.potential);
    validate(p);
    return EquilibriumMeasure::from_potential(p);
  }
  return EquilibriumMeasure::semicircle();
}

// Stream for task (N, sample_index); `purpose` separates independent draws.
inline RngStream sample_stream(const ExperimentConfig& c, std::size_t n, std::size_t index, std::uint64_t purpose = 0) {
  return RngStream(c.seed, hash_keys({static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(index), purpose}));
}

inline Spectrum draw_spectrum(const SamplerSpec& s, std::size_t n, RngStream& rng) {
  switch (s.kind) {
    case SamplerKind::gbeta_tridiag: return sample_gbeta_tridiag(n, s.beta, rng);
    case SamplerKind::mcmc: {
      McmcOptions opt;
      opt.sweeps = s.mcmc_sweeps;
      return sample_beta_mcmc(potential_from_name(s.potential), n, s.beta, rng, opt);
    }
    case SamplerKind::dense: break;
  }
  EnsembleSpec spec = s.dense;
  spec.dimension = n;
  return eigenvalues(sample_matrix(spec, rng), spec.beta(), rng.stream_index(), spec.tag());
}

inline Spectrum sample_spectrum(const ExperimentConfig& c, std::size_t n, std::size_t index) {
  auto rng = sample_stream(c, n, index);
  return draw_spectrum(resolve_sampler(c, n), n, rng);
}

// Bulk window [A + kappa, B - kappa] of the centering measure.
struct Window {
  double a;
  double b;
};

inline Window bulk_window(const EquilibriumMeasure& nu, double kappa) {
  return {nu.lower_edge() + kappa, nu.upper_edge() - kappa};
}

namespace detail {

inline std::string part_suffix(FieldPart p) { return p == FieldPart::re ? "re" : "im"; }

template <typename PerSample>
void collect_rows(ResultTable& t, const ExperimentConfig& c, std::size_t n, PerSample&& per_sample) {
  auto chunks = parallel_map(c.samples, c.workers, [&](std::size_t i) { return per_sample(i); });
  for (std::size_t i = 0; i < chunks.size(); ++i)
    for (auto& [stat, value] : chunks[i]) t.rows.push_back({n, i, std::move(stat), value});
}

using StatList = std::vector<std::pair<std::string, double>>;

inline std::string key_at(const std::string& stat, double x) { return stat + "@" + fmt17(x); }
inline std::string key_at(const std::string& stat, std::size_t i) { return stat + "@" + std::to_string(i); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Maximum of the log-characteristic polynomial

// sup over the bulk interval of the chosen parts of L_N at eta = 0. Rows per
// sample: sup_<part>, argmax_<part>, norm_<part> = sup / (sqrt(2/beta) log N).
inline ResultTable run_max_experiment(const ExperimentConfig& c, const std::vector<FieldPart>& parts) {
  c.validate();
  ResultTable t;
  t.experiment = "max";
  const auto nu = centering_for(c);
  const auto w = bulk_window(nu, c.kappa);
  const double target = std::sqrt(2.0 / ensemble_beta(c));
  for (std::size_t n : c.sizes) {
    const double spacing = c.spacing_for(n), logn = std::log(static_cast<double>(n));
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const Spectrum s = sample_spectrum(c, n, i);
      detail::StatList out;
      for (FieldPart p : parts) {
        const auto m = field_sup(s, w.a, w.b, 0.0, p, spacing, nu);
        const auto suf = detail::part_suffix(p);
        out.emplace_back("sup_" + suf, m.value);
        out.emplace_back("argmax_" + suf, m.argmax);
        out.emplace_back("norm_" + suf, m.value / (target * logn));
      }
      return out;
    });
  }
  summarize_rows(t);
  for (FieldPart p : parts) add_log_slope(t, c.sizes, "sup_" + detail::part_suffix(p));
  return t;
}

inline ResultTable run_max_experiment(const ExperimentConfig& c, FieldPart part) {
  return run_max_experiment(c, std::vector<FieldPart>{part});
}

// ---------------------------------------------------------------------------
// Rigidity

// sup over E in (a, b] of Im L_N(E) / pi from eigenvalue ranks alone: between
// eigenvalues the count is constant and the centering increases, so candidates
// are the left limits at eigenvalues in the window and the right endpoint.
inline double im_sup_counting_route(const Spectrum& s, double a, double b, const EquilibriumMeasure& nu) {
  const auto lam = s.values();
  const auto n = static_cast<double>(s.size());
  auto count_above = [&](double e) {
    return static_cast<double>(lam.end() - std::upper_bound(lam.begin(), lam.end(), e));
  };
  double best = count_above(b) - n * nu.tail(b);
  best = std::max(best, count_above(a) - n * nu.tail(a));
  for (std::size_t j = 0; j < lam.size(); ++j) {
    if (lam[j] <= a || lam[j] > b) continue;
    // left limit at lambda_j: lambda_j and everything above it are counted
    const auto first = static_cast<std::size_t>(std::lower_bound(lam.begin(), lam.end(), lam[j]) - lam.begin());
    best = std::max(best, (n - static_cast<double>(first)) - n * nu.tail(lam[j]));
  }
  return best;
}

// Rows per sample:
//   rigidity        max_k c_beta rho(gamma_k) N |lambda_k - gamma_k| / log N over bulk k
//   rigidity_upper  same with the signed deviation lambda_k - gamma_k
//   im_sup_field    sup of Im L_N / pi over the bulk window from the field
//   im_sup_count    the same supremum from eigenvalue ranks
// with c_beta = pi sqrt(beta / 2).
inline ResultTable run_rigidity_experiment(const ExperimentConfig& c) {
  c.validate();
  ResultTable t;
  t.experiment = "rigidity";
  const auto nu = centering_for(c);
  const double beta = ensemble_beta(c);
  const double cb = std::numbers::pi * std::sqrt(beta / 2.0);
  const auto w = bulk_window(nu, c.kappa);
  for (std::size_t n : c.sizes) {
    const double nd = static_cast<double>(n), logn = std::log(nd);
    std::vector<double> gamma(n + 1), weight(n + 1);
    for (std::size_t k = 1; k <= n; ++k) {
      gamma[k] = nu.quantile(n, k);
      weight[k] = cb * nu.density(gamma[k]) * nd / logn;
    }
    const auto k_lo = static_cast<std::size_t>(std::ceil(c.kappa * nd));
    const auto k_hi = static_cast<std::size_t>(std::floor((1.0 - c.kappa) * nd));
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const Spectrum s = sample_spectrum(c, n, i);
      double rig = 0.0, upper = -std::numeric_limits<double>::infinity();
      for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= std::min(k_hi, n); ++k) {
        const double d = weight[k] * (s[k - 1] - gamma[k]);
        rig = std::max(rig, std::abs(d));
        upper = std::max(upper, d);
      }
      const auto f = field_sup(s, w.a, w.b, 0.0, FieldPart::im, c.spacing_for(n), nu);
      return detail::StatList{{"rigidity", rig},
                              {"rigidity_upper", upper},
                              {"im_sup_field", f.value / std::numbers::pi},
                              {"im_sup_count", im_sup_counting_route(s, w.a, w.b, nu)}};
    });
  }
  summarize_rows(t);
  return t;
}

// ---------------------------------------------------------------------------
// Gaussian tail of individual eigenvalue deviations

// Rows per sample: exceed@u = number of pooled indices k with
// |lambda_k - gamma_k| > u sqrt(2/beta) sqrt(log N) / (pi rho(gamma_k) N), and
// count = number of pooled indices. Summary: p_hat@u per size and the slope of
// -log p_hat against u^2 over the u values with at least 30 exceedances.
inline ResultTable run_tail_experiment(const ExperimentConfig& c, std::vector<std::size_t> k_list,
                                       std::vector<double> u_grid) {
  c.validate();
  ResultTable t;
  t.experiment = "tail";
  const auto nu = centering_for(c);
  const double beta = ensemble_beta(c);
  std::sort(u_grid.begin(), u_grid.end());
  for (std::size_t n : c.sizes) {
    const double nd = static_cast<double>(n);
    std::vector<std::size_t> ks = k_list;
    if (ks.empty()) {
      for (std::size_t k = 1; k <= n; ++k)
        if (std::abs(nu.quantile(n, k)) < 1.0) ks.push_back(k);
    }
    for (std::size_t k : ks)
      if (k < 1 || k > n) throw ConfigError("tail: index k out of range");
    std::vector<double> gamma(ks.size()), scale(ks.size());
    for (std::size_t j = 0; j < ks.size(); ++j) {
      gamma[j] = nu.quantile(n, ks[j]);
      scale[j] = std::sqrt(2.0 / beta) * std::sqrt(std::log(nd)) / (std::numbers::pi * nu.density(gamma[j]) * nd);
    }
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const Spectrum s = sample_spectrum(c, n, i);
      std::vector<double> dev(ks.size());
      for (std::size_t j = 0; j < ks.size(); ++j) dev[j] = std::abs(s[ks[j] - 1] - gamma[j]) / scale[j];
      detail::StatList out;
      out.emplace_back("count", static_cast<double>(ks.size()));
      for (double u : u_grid) {
        std::size_t e = 0;
        for (double d : dev) e += d > u ? 1 : 0;
        out.emplace_back(detail::key_at("exceed", u), static_cast<double>(e));
      }
      return out;
    });

    const double total = static_cast<double>(ks.size() * c.samples);
    std::vector<double> xs, ys;
    for (double u : u_grid) {
      double e = 0.0;
      for (double v : t.values(n, detail::key_at("exceed", u))) e += v;
      SummaryRow s;
      s.n = n;
      s.stat = detail::key_at("p_hat", u);
      s.mean = e / total;
      t.summary.push_back(s);
      if (e >= 30.0) {
        xs.push_back(u * u);
        ys.push_back(-std::log(e / total));
      } else {
        t.warnings.push_back("tail: N=" + std::to_string(n) + " u=" + detail::fmt17(u) + " dropped (" +
                             std::to_string(static_cast<long>(e)) + " exceedances)");
      }
    }
    SummaryRow fit;
    fit.n = n;
    fit.stat = "neg_log_p_vs_u2";
    const auto f = stats::fit_line(xs, ys);
    fit.slope = f.slope;
    fit.slope_se = f.slope_se;
    fit.mean = static_cast<double>(xs.size());
    t.summary.push_back(fit);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Coupled Dyson Brownian motion: homogenization and tightness

inline DbmOptions dbm_options(const ExperimentConfig& c) {
  DbmOptions opt;
  opt.scheme = c.dbm_scheme == "adaptive" ? DbmScheme::adaptive : DbmScheme::imex;
  opt.dt_max = c.dt_max;
  return opt;
}

struct HomogenizationSample {
  DbmResult result;
  std::vector<double> lambda0;
  std::vector<double> mu0;
};

// The GOE (GUE for complex classes) counterpart of a Wigner-type ensemble.
inline EnsembleSpec gaussian_partner(const EnsembleSpec& s) {
  return s.complex_hermitian() ? EnsembleSpec::gue(s.dimension) : EnsembleSpec::goe(s.dimension);
}

// Initial data for one coupled trajectory: lambda from the configured ensemble,
// mu from the Gaussian partner, independent streams, plus a noise seed.
inline HomogenizationSample run_coupled_sample(const ExperimentConfig& c, std::size_t n, std::size_t i,
                                               const DbmOptions& opt) {
  const auto spec = resolve_sampler(c, n);
  if (spec.kind != SamplerKind::dense) throw ConfigError("coupled DBM needs a Wigner-type ensemble");
  auto r1 = sample_stream(c, n, i, 1), r2 = sample_stream(c, n, i, 2);
  const Spectrum a = draw_spectrum(spec, n, r1);
  SamplerSpec partner = spec;
  partner.dense = gaussian_partner(spec.dense);
  const Spectrum b = draw_spectrum(partner, n, r2);
  HomogenizationSample out;
  out.lambda0.assign(a.values().begin(), a.values().end());
  out.mu0.assign(b.values().begin(), b.values().end());
  const std::uint64_t noise = hash_keys({c.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i), 3});
  out.result = coupled_dbm_evolve(out.lambda0, out.mu0, c.t, noise, static_cast<int>(spec.beta), opt);
  return out;
}

// Rows per trajectory (bulk k with |gamma_k| < 1):
//   median_resid    median_k |lambda_k(t) - mu_k(t) - ubar(gamma_k, t)| (field form)
//   median_init     median_k |lambda_k(0) - mu_k(0)|
//   ratio           median_resid / median_init
//   predictor_gap   ||ubar_field - ubar_kernel||_2 / ||ubar_kernel||_2 over bulk k
//   steps, rejections
inline ResultTable run_homogenization_experiment(const ExperimentConfig& c) {
  c.validate();
  ResultTable t;
  t.experiment = "dbm-couple";
  const DbmOptions opt = dbm_options(c);
  for (std::size_t n : c.sizes) {
    std::vector<double> gamma(n);
    for (std::size_t k = 1; k <= n; ++k) gamma[k - 1] = semicircle::quantile(n, k);
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const auto h = run_coupled_sample(c, n, i, opt);
      const auto& tr = h.result.trajectory;
      std::vector<double> resid, init;
      double num = 0.0, den = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        if (!(std::abs(gamma[k - 1]) < 1.0)) continue;
        const double uf = homog_field_predictor(h.lambda0, h.mu0, gamma[k - 1], c.t);
        const double uk = homog_kernel_predictor(h.lambda0, h.mu0, gamma, k, c.t);
        resid.push_back(std::abs(tr.lambda[k - 1] - tr.mu[k - 1] - uf));
        init.push_back(std::abs(h.lambda0[k - 1] - h.mu0[k - 1]));
        num += (uf - uk) * (uf - uk);
        den += uk * uk;
      }
      const double mr = stats::median(resid), mi = stats::median(init);
      return detail::StatList{{"median_resid", mr},
                              {"median_init", mi},
                              {"ratio", mr / mi},
                              {"predictor_gap", std::sqrt(num / den)},
                              {"steps", static_cast<double>(tr.step_count)},
                              {"rejections", static_cast<double>(tr.rejections)}};
    });
  }
  summarize_rows(t);
  return t;
}

// Rows per sample: D = sup Re L(lambda(t)) - sup Re L(mu(t)) over the bulk grid,
// with both sups. Cross-size summary rows: iqr_ratio = IQR(D at max N) / IQR(D at
// min N) and sup_growth = mean sup for the Gaussian side at max N minus min N.
inline ResultTable run_tightness_experiment(const ExperimentConfig& c, double t_final) {
  c.validate();
  if (!(t_final > 0.0 && t_final < 1.0)) throw ConfigError("tightness: t must lie in (0, 1)");
  ExperimentConfig cc = c;
  cc.t = t_final;
  ResultTable t;
  t.experiment = "tightness";
  const auto nu = EquilibriumMeasure::semicircle();
  const auto w = bulk_window(nu, c.kappa);
  const DbmOptions opt = dbm_options(c);
  for (std::size_t n : c.sizes) {
    const double spacing = c.spacing_for(n);
    detail::collect_rows(t, cc, n, [&](std::size_t i) {
      const auto h = run_coupled_sample(cc, n, i, opt);
      const auto& tr = h.result.trajectory;
      const double beta = tr.beta_class;
      const Spectrum sl(tr.lambda, beta, 0, "dbm-lambda"), sm(tr.mu, beta, 0, "dbm-mu");
      const double a = field_sup(sl, w.a, w.b, 0.0, FieldPart::re, spacing, nu).value;
      const double b = field_sup(sm, w.a, w.b, 0.0, FieldPart::re, spacing, nu).value;
      return detail::StatList{{"D", a - b}, {"sup_re_divisible", a}, {"sup_re_gaussian", b}};
    });
  }
  summarize_rows(t);
  if (c.sizes.size() >= 2) {
    const std::size_t lo = c.sizes.front(), hi = c.sizes.back();
    SummaryRow r;
    r.stat = "iqr_ratio";
    r.mean = stats::iqr(t.values(hi, "D")) / stats::iqr(t.values(lo, "D"));
    t.summary.push_back(r);
    SummaryRow g;
    g.stat = "sup_growth";
    g.mean = stats::mean(t.values(hi, "sup_re_gaussian")) - stats::mean(t.values(lo, "sup_re_gaussian"));
    t.summary.push_back(g);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Central limit theorem for beta-ensembles

// Rows per sample: re@i, im@i (L_N at points[i], centered by mu_V). Comparison
// rows per size: mean_re@i vs mu, var_re@i and var_im@i vs sigma, cov_re@i,j vs
// the sigma cross term, and log_laplace_re@i,zeta vs sigma zeta^2/2 + mu zeta.
inline ResultTable run_clt_experiment(const ExperimentConfig& c, const std::vector<cplx>& points,
                                      const std::vector<double>& zetas) {
  c.validate();
  const auto spec = resolve_sampler(c, 1);
  if (spec.kind == SamplerKind::dense) throw ConfigError("clt needs a beta-ensemble (gbeta or mcmc)");
  for (const auto& z : points)
    if (!(z.imag() > 0.0)) throw ConfigError("clt points must lie in the upper half plane");
  const Potential pot = potential_from_name(c.potential);
  validate(pot);
  const auto nu = EquilibriumMeasure::from_potential(pot);
  const double beta = spec.beta;
  const std::size_t p = points.size();
  ResultTable t;
  t.experiment = "clt";

  // analytic side
  std::vector<double> var_re(p), var_im(p), shift(p), shift_err(p);
  for (std::size_t i = 0; i < p; ++i) {
    const std::vector<cplx> z{points[i]};
    var_re[i] = sigma_cov({1.0}, {0.0}, z, beta).real();
    var_im[i] = sigma_cov({0.0}, {1.0}, z, beta).real();
    const auto m = mu_shift({1.0}, {0.0}, z, pot, beta);
    shift[i] = m.value.real();
    shift_err[i] = m.error;
  }

  for (std::size_t n : c.sizes) {
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const Spectrum s = sample_spectrum(c, n, i);
      detail::StatList out;
      for (std::size_t j = 0; j < p; ++j) {
        const cplx l = log_char_poly(s, points[j], nu);
        out.emplace_back(detail::key_at("re", j), l.real());
        out.emplace_back(detail::key_at("im", j), l.imag());
      }
      return out;
    });
    const double m = static_cast<double>(c.samples);
    for (std::size_t j = 0; j < p; ++j) {
      const auto re = t.values(n, detail::key_at("re", j));
      const auto im = t.values(n, detail::key_at("im", j));
      const double vr = stats::variance(re), vi = stats::variance(im);
      t.comparisons.push_back({n, detail::key_at("mean_re", j), stats::mean(re), shift[j], std::sqrt(vr / m)});
      // standard error of a sample variance under approximate normality
      t.comparisons.push_back({n, detail::key_at("var_re", j), vr, var_re[j], vr * std::sqrt(2.0 / (m - 1.0))});
      t.comparisons.push_back({n, detail::key_at("var_im", j), vi, var_im[j], vi * std::sqrt(2.0 / (m - 1.0))});
      for (std::size_t k = j + 1; k < p; ++k) {
        const auto re2 = t.values(n, detail::key_at("re", k));
        const std::vector<cplx> zz{points[j], points[k]};
        const double joint = sigma_cov({1.0, 1.0}, {0.0, 0.0}, zz, beta).real();
        const double pred = 0.5 * (joint - var_re[j] - var_re[k]);
        const double cv = stats::covariance(re, re2);
        const double se = std::sqrt((vr * stats::variance(re2) + cv * cv) / (m - 1.0));
        t.comparisons.push_back({n, "cov_re@" + std::to_string(j) + "," + std::to_string(k), cv, pred, se});
      }
      for (double zeta : zetas) {
        std::vector<double> e(re.size());
        double top = -std::numeric_limits<double>::infinity();
        for (double x : re) top = std::max(top, zeta * x);
        for (std::size_t q = 0; q < re.size(); ++q) e[q] = std::exp(zeta * re[q] - top);
        const double me = stats::mean(e);
        const double emp = top + std::log(me);
        const double se = std::sqrt(stats::variance(e) / m) / me;  // delta method
        const double pred = 0.5 * var_re[j] * zeta * zeta + shift[j] * zeta;
        t.comparisons.push_back({n, "log_laplace_re@" + std::to_string(j) + "," + detail::fmt17(zeta), emp, pred, se});
      }
    }
  }
  summarize_rows(t);
  return t;
}

// ---------------------------------------------------------------------------
// Local law moments

// Rows per sample: abs2@eta = |s_N(z) - m_sc(z)|^2 at z = energy + i eta, and
// absp@eta,p = |s_N - m_sc|^{2p} for the configured moments. Summary per size:
// slope of log E|s - m|^2 against log(N eta) (row abs2 with n = N) and
// root@eta,p = (E|s - m|^{2p})^{1/(2p)}.
inline ResultTable run_local_law_scaling(const ExperimentConfig& c, const std::vector<double>& eta_list) {
  c.validate();
  ResultTable t;
  t.experiment = "local-law";
  for (std::size_t n : c.sizes) {
    for (double eta : eta_list)
      if (!(eta > 2.0 / static_cast<double>(n) && eta < 1.0))
        throw ConfigError("local-law: eta must lie in (2/N, 1)");
    detail::collect_rows(t, c, n, [&](std::size_t i) {
      const Spectrum s = sample_spectrum(c, n, i);
      detail::StatList out;
      for (double eta : eta_list) {
        const cplx z(c.energy, eta);
        const double a2 = std::norm(stieltjes(s, z) - semicircle::stieltjes(z));
        out.emplace_back(detail::key_at("abs2", eta), a2);
        for (double pw : c.moments)
          out.emplace_back(detail::key_at("absp", eta) + "," + detail::fmt17(pw), std::pow(a2, pw));
      }
      return out;
    });
  }
  summarize_rows(t);
  for (std::size_t n : c.sizes) {
    std::vector<double> x, y;
    for (double eta : eta_list) {
      x.push_back(std::log(static_cast<double>(n) * eta));
      y.push_back(std::log(stats::mean(t.values(n, detail::key_at("abs2", eta)))));
      for (double pw : c.moments) {
        SummaryRow r;
        r.n = n;
        r.stat = detail::key_at("root", eta) + "," + detail::fmt17(pw);
        r.mean = std::pow(stats::mean(t.values(n, detail::key_at("absp", eta) + "," + detail::fmt17(pw))),
                          1.0 / (2.0 * pw));
        t.summary.push_back(r);
      }
    }
    const auto f = stats::fit_line(x, y);
    SummaryRow r;
    r.n = n;
    r.stat = "abs2_vs_n_eta";
    r.slope = f.slope;
    r.slope_se = f.slope_se;
    t.summary.push_back(r);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Gaussian multiplicative chaos

// Rows per sample: mass of the normalized field on the bulk window at eta0.
inline ResultTable run_gmc_experiment(const ExperimentConfig& c) {
  c.validate();
  ResultTable t;
  t.experiment = "gmc";
  const auto nu = centering_for(c);
  const auto w = bulk_window(nu, c.kappa);
  for (std::size_t n : c.sizes) {
    const double eta0 = c.eta0_for(n);
    const auto grid = uniform_grid(w.a, w.b, std::min(c.spacing_for(n), 0.25 * eta0));
    auto spectra = parallel_map(c.samples, c.workers, [&](std::size_t i) { return sample_spectrum(c, n, i); });
    const auto g = gmc_density(spectra, c.gamma, eta0, grid, nu);
    for (std::size_t i = 0; i < g.mass.size(); ++i) t.rows.push_back({n, i, "mass", g.mass[i]});
  }
  summarize_rows(t);
  return t;
}

}  // namespace rmtlab
