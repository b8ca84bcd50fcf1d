// Acceptance suite: `acceptance <criterion>` runs one criterion, no argument runs
// all nine. Each run prints exactly one line "criterion N: PASS|FAIL ..." and
// exits non-zero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rmtlab/io.hpp"
#include "rmtlab/rmtlab.hpp"

using namespace rmtlab;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [out of band]");
  }
};

std::string f6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RMT_LAB_THREADS"); env && *env) return std::max(1, std::atoi(env));
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentConfig base_config(const std::string& ensemble, std::vector<std::size_t> sizes, std::size_t samples,
                             std::uint64_t seed) {
  ExperimentConfig c;
  c.ensemble = ensemble;
  c.sizes = std::move(sizes);
  c.samples = samples;
  c.seed = seed;
  c.kappa = 0.05;
  c.workers = worker_count();
  return c;
}

// 1. Exact identities against independent oracles.
Verdict exact_identities() {
  Verdict v;
  RngStream rng(20240101, 1);

  double msc = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const cplx z(-3.0 + 6.0 * i / 99.0, 1e-3 + 3.0 * j / 99.0);
      const cplx m = semicircle::stieltjes(z);
      msc = std::max(msc, std::abs(m * m + z * m + 1.0));
    }
  v.check(msc < 1e-12, "m_sc residual " + f6(msc));

  double cnt = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream r(7, s);
    const auto sp = eigenvalues(sample_matrix(EnsembleSpec::goe(128), r));
    const double e = -2.0 + 4.0 * rng.uniform();
    double above = 0.0;
    for (double l : sp.values()) above += l > e ? 1.0 : 0.0;
    const double im = log_char_poly_part(sp, cplx(e, 0.0), EquilibriumMeasure::semicircle(), FieldPart::im);
    cnt = std::max(cnt, std::abs(im - std::numbers::pi * (above - 128.0 * semicircle::tail(e))));
  }
  v.check(cnt < 1e-8, "counting residual " + f6(cnt));

  bool sandwich = true;
  double worst_gap = 0.0;
  for (int r = 0; r < 1000; ++r) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 500);
    const double nu = 0.1 + 2.0 * rng.uniform(), delta = 0.05 + 20.0 * rng.uniform();
    std::vector<double> w(n);
    for (auto& x : w) x = 3.0 * rng.normal();
    const double sup = nu * *std::max_element(w.begin(), w.end());
    const double gap = std::abs(sup - smoothed_max_F(w, nu, delta));
    sandwich = sandwich && gap < 2.0 * std::log(static_cast<double>(n)) / delta;
    worst_gap = std::max(worst_gap, gap * delta / std::log(static_cast<double>(n)));
  }
  v.check(sandwich, "F_delta sandwich worst gap*delta/log(count) " + f6(worst_gap));

  double qres = 0.0;
  for (std::size_t n : {2u, 17u, 256u, 1024u, 4096u})
    for (std::size_t k = 1; k <= n; ++k)
      qres = std::max(qres, std::abs(semicircle::cdf(semicircle::quantile(n, k)) - (k - 0.5) / n));
  const auto quartic = EquilibriumMeasure::from_potential(Potential::quartic_potential(1.0));
  for (std::size_t k = 1; k <= 64; ++k) qres = std::max(qres, std::abs(quartic.cdf(quartic.quantile(64, k)) - (k - 0.5) / 64));
  v.check(qres < 1e-10, "quantile cdf residual " + f6(qres));

  double lin = 0.0;
  for (const EdgeMaps m : {EdgeMaps{}, EdgeMaps::of(Potential::quartic_potential(1.0))})
    for (int i = 0; i < 20; ++i) {
      const cplx z(-3.0 + 6.0 * rng.uniform(), (rng.coin() ? 1.0 : -1.0) * (0.01 + rng.uniform()));
      lin = std::max(lin, std::abs(tau_transform_quadrature(z, m) - tau_transform_closed(z, m)));
    }
  v.check(lin < 1e-8, "linear formula " + f6(lin));

  const double mu = std::abs(mu_shift({1.0}, {0.0}, {cplx(0.3, 0.05)}, Potential::quadratic_potential(), 2.0).value);
  v.check(mu < 1e-8, "mu(beta=2) " + f6(mu));
  return v;
}

// 2. Empirical CLT variance and cross-covariance.
Verdict clt_variance() {
  Verdict v;
  const std::vector<cplx> pts{cplx(0.3, 0.05), cplx(-0.4, 0.05)};
  for (double beta : {1.0, 2.0, 4.0}) {
    auto c = base_config("gbeta", {512}, 4000, 2000 + static_cast<std::uint64_t>(beta));
    c.beta = beta;
    const auto t = run_clt_experiment(c, pts, {-0.5, 0.5});
    const auto* var = t.find_comparison(512, "var_re@0");
    const auto* cov = t.find_comparison(512, "cov_re@0,1");
    const double rv = var->empirical / var->predicted - 1.0, rc = cov->empirical / cov->predicted - 1.0;
    const std::string b = "beta=" + f6(beta);
    v.check(std::abs(rv) < 0.15, b + " var " + f6(var->empirical) + "/" + f6(var->predicted));
    v.check(std::abs(rc) < 0.20, b + " cov " + f6(cov->empirical) + "/" + f6(cov->predicted));
  }
  return v;
}

// 3. Leading order of the maximum via slope against log N.
Verdict max_slopes() {
  Verdict v;
  const std::vector<std::size_t> sizes{128, 256, 512, 1024};
  const std::vector<FieldPart> parts{FieldPart::re, FieldPart::im};
  for (const auto& [ens, lo, hi] : {std::tuple{"goe", 1.10, 1.70}, std::tuple{"gue", 0.75, 1.25}}) {
    const auto t = run_max_experiment(base_config(ens, sizes, 200, 3000), parts);
    for (const char* stat : {"sup_re", "sup_im"}) {
      const auto* s = t.find_summary(0, stat);
      const double slope = s->slope;
      v.check(slope >= lo && slope <= hi,
              std::string(ens) + " " + stat + " slope " + f6(slope) + "+-" + f6(s->slope_se));
    }
  }
  return v;
}

// 4. Optimal rigidity constant.
Verdict rigidity() {
  Verdict v;
  for (const char* ens : {"goe", "gue"}) {
    const auto t = run_rigidity_experiment(base_config(ens, {1024}, 200, 4000));
    const double m = t.find_summary(1024, "rigidity")->mean;
    v.check(m >= 0.60 && m <= 1.30, std::string(ens) + " mean " + f6(m));
  }
  return v;
}

// 5. Gaussian tail exponent.
Verdict tail() {
  Verdict v;
  std::vector<double> u;
  for (int i = 0; i <= 10; ++i) u.push_back(0.8 + 0.1 * i);
  const auto t = run_tail_experiment(base_config("goe", {1024}, 2000, 5000), {}, u);
  const auto* s = t.find_summary(1024, "neg_log_p_vs_u2");
  v.check(s->slope >= 0.5 && s->slope <= 1.5,
          "slope " + f6(s->slope) + "+-" + f6(s->slope_se) + " over " + f6(s->mean) + " levels");
  return v;
}

// 6. Homogenization of coupled Dyson Brownian motion.
Verdict homogenization() {
  Verdict v;
  const std::size_t n = 256;
  auto c = base_config("wigner-real:rademacher", {n}, 20, 6000);
  c.t = 0.5;
  const DbmOptions opt = dbm_options(c);
  std::vector<double> gamma(n);
  for (std::size_t k = 1; k <= n; ++k) gamma[k - 1] = semicircle::quantile(n, k);
  struct Pooled {
    std::vector<double> resid, init;
    double num = 0.0, den = 0.0;
  };
  const auto per = parallel_map(c.samples, c.workers, [&](std::size_t i) {
    const auto h = run_coupled_sample(c, n, i, opt);
    const auto& tr = h.result.trajectory;
    Pooled p;
    for (std::size_t k = 1; k <= n; ++k) {
      if (!(std::abs(gamma[k - 1]) < 1.0)) continue;
      const double uf = homog_field_predictor(h.lambda0, h.mu0, gamma[k - 1], c.t);
      const double uk = homog_kernel_predictor(h.lambda0, h.mu0, gamma, k, c.t);
      p.resid.push_back(std::abs(tr.lambda[k - 1] - tr.mu[k - 1] - uf));
      p.init.push_back(std::abs(h.lambda0[k - 1] - h.mu0[k - 1]));
      p.num += (uf - uk) * (uf - uk);
      p.den += uk * uk;
    }
    return p;
  });
  Pooled all;
  double worst = 0.0;
  for (const auto& p : per) {
    all.resid.insert(all.resid.end(), p.resid.begin(), p.resid.end());
    all.init.insert(all.init.end(), p.init.begin(), p.init.end());
    all.num += p.num;
    all.den += p.den;
    worst = std::max(worst, stats::median(p.resid) / stats::median(p.init));
  }
  const double ratio = stats::median(all.resid) / stats::median(all.init);
  const double gap = std::sqrt(all.num / all.den);
  v.check(ratio <= 0.25, "median resid/init " + f6(ratio) + " (worst trajectory " + f6(worst) + ")");
  v.check(gap < 0.01, "predictor forms rel. gap " + f6(gap));
  return v;
}

// 7. Tightness proxy for the coupled maxima.
Verdict tightness() {
  Verdict v;
  auto c = base_config("divisible:0.5:wigner-real:rademacher", {128, 512}, 100, 7000);
  const auto t = run_tightness_experiment(c, 0.5);
  const double r = t.find_summary(0, "iqr_ratio")->mean, g = t.find_summary(0, "sup_growth")->mean;
  v.check(r >= 0.4 && r <= 2.5, "IQR ratio " + f6(r));
  v.check(g >= 1.5, "sup growth " + f6(g));
  return v;
}

// 8. Local-law scaling exponent.
Verdict local_law() {
  Verdict v;
  const auto t = run_local_law_scaling(base_config("goe", {512}, 500, 8000), {0.5, 0.1, 0.02});
  const auto* s = t.find_summary(512, "abs2_vs_n_eta");
  v.check(s->slope >= -2.4 && s->slope <= -1.6, "exponent " + f6(s->slope) + "+-" + f6(s->slope_se));
  return v;
}

// 9. Byte-identical CSVs across worker counts.
Verdict determinism() {
  Verdict v;
  auto csv = [](const ResultTable& t) { return io::results_csv(t) + io::summary_csv(t) + io::comparison_csv(t); };
  const std::vector<std::pair<std::string, std::function<ResultTable(const ExperimentConfig&)>>> runs = {
      {"max", [](const ExperimentConfig& c) { return run_max_experiment(c, {FieldPart::re, FieldPart::im}); }},
      {"rigidity", [](const ExperimentConfig& c) { return run_rigidity_experiment(c); }},
      {"tail", [](const ExperimentConfig& c) { return run_tail_experiment(c, c.k_list, c.u_grid); }},
      {"local-law", [](const ExperimentConfig& c) { return run_local_law_scaling(c, {0.5, 0.1}); }},
      {"gmc", [](ExperimentConfig c) {
         c.samples = 100;
         return run_gmc_experiment(c);
       }},
      {"clt", [](ExperimentConfig c) {
         c.ensemble = "gbeta";
         c.beta = 4.0;
         return run_clt_experiment(c, c.points, c.zetas);
       }},
      {"dbm-couple", [](ExperimentConfig c) {
         c.ensemble = "wigner-real:rademacher";
         return run_homogenization_experiment(c);
       }},
      {"tightness", [](ExperimentConfig c) {
         c.ensemble = "divisible:0.5:goe";
         return run_tightness_experiment(c, 0.3);
       }},
  };
  for (const auto& [name, fn] : runs) {
    std::vector<std::string> out;
    for (std::size_t w : {1u, 2u, 5u}) {
      auto c = base_config("goe", {32, 64}, 12, 9000);
      c.workers = w;
      out.push_back(csv(fn(c)));
    }
    const bool same = out[0] == out[1] && out[0] == out[2] && out[0].size() > 100;
    v.check(same, name + (same ? " identical" : " differs"));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {exact_identities, clt_variance, max_slopes,
                                                          rigidity,         tail,         homogenization,
                                                          tightness,        local_law,    determinism};
  std::vector<int> which;
  if (argc > 1) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
      return 2;
    }
    which.push_back(k);
  } else {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) which.push_back(k);
  }
  bool all = true;
  for (int k : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s %s (%.1f s)\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
