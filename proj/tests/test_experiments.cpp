#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "rmtlab/io.hpp"
#include "rmtlab/rmtlab.hpp"

using namespace rmtlab;

namespace {

Spectrum quantile_spectrum(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 1; k <= n; ++k) v[k - 1] = semicircle::quantile(n, k);
  return Spectrum(v, 1.0, 0, "quantiles");
}

ExperimentConfig small_config(std::size_t workers = 1) {
  ExperimentConfig c;
  c.sizes = {32, 64};
  c.samples = 6;
  c.seed = 17;
  c.workers = workers;
  return c;
}

std::string all_csv(const ResultTable& t) { return io::results_csv(t) + io::summary_csv(t) + io::comparison_csv(t); }

}  // namespace

TEST(SmoothedMax, Examples) {
  const std::vector<double> w{3.0, 3.0};
  EXPECT_NEAR(smoothed_max_F(w, 1.0, 1.0), 3.0 + std::log(2.0), 1e-14);
  const std::vector<double> v{0.1, -2.0, 0.7, 0.69};
  EXPECT_NEAR(smoothed_max_F(v, 2.0, 1e6), 1.4, 1e-5);
  EXPECT_THROW(smoothed_max_F(std::vector<double>{}, 1.0, 1.0), DomainError);
  EXPECT_THROW(smoothed_max_F(w, 1.0, 0.0), DomainError);
}

TEST(SmoothedMax, NoOverflow) {
  const std::vector<double> w{1e3, 999.0};
  EXPECT_TRUE(std::isfinite(smoothed_max_F(w, 1.0, 10.0)));
}

TEST(SmoothedMax, Sandwich) {
  RngStream rng(1, 0);
  for (int r = 0; r < 1000; ++r) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 200);
    const double nu = 0.1 + 3.0 * rng.uniform(), delta = 0.1 + 10.0 * rng.uniform();
    std::vector<double> w(n);
    for (auto& x : w) x = 5.0 * rng.normal();
    const double sup = nu * *std::max_element(w.begin(), w.end());
    const double f = smoothed_max_F(w, nu, delta);
    EXPECT_GE(f, sup - 1e-12);
    EXPECT_LT(std::abs(sup - f), 2.0 * std::log(static_cast<double>(n)) / delta);
  }
}

TEST(SmoothedDeviation, BothSignsCounted) {
  const std::vector<double> q{-1.0, 0.0, 1.0}, wt{1.0, 1.0, 1.0};
  EXPECT_NEAR(smoothed_dev_Fhat(q, q, wt, 2.0), std::log(6.0) / 2.0, 1e-14);
  const std::vector<double> v{-1.0, 0.5, 1.0};
  const double f = smoothed_dev_Fhat(v, q, wt, 50.0);
  EXPECT_GE(f, 0.5);
  EXPECT_LE(f, 0.5 + std::log(6.0) / 50.0 + 1e-14);
  std::vector<double> lower{-1.0, -0.5, 1.0};
  EXPECT_NEAR(smoothed_dev_Fhat(lower, q, wt, 50.0), f, 1e-14);
  EXPECT_THROW(smoothed_dev_Fhat(v, q, std::vector<double>{1.0}, 1.0), DomainError);
}

TEST(SmoothedDeviation, Weights) {
  const auto nu = EquilibriumMeasure::semicircle();
  const std::vector<std::size_t> idx{1, 50, 100};
  const auto w = deviation_weights(nu, 100, idx);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double g = semicircle::quantile(100, idx[i]);
    EXPECT_NEAR(w[i], std::sqrt(std::numbers::pi / 2.0) * 100.0 * semicircle::density(g) / std::log(100.0), 1e-12);
  }
}

TEST(CountingRamp, ShapeAndSmoothness) {
  const CountingRamp f{0.0, 0.1};
  EXPECT_EQ(f(-0.1), 0.0);
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_NEAR(f(0.05), 0.5, 1e-14);
  EXPECT_EQ(f(0.1), 1.0);
  EXPECT_EQ(f(2.0), 1.0);
  EXPECT_NEAR(f(2.75), 0.5, 1e-14);
  EXPECT_EQ(f(3.0), 0.0);
  double slope = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = -0.1 + 3.2 * i / 10000.0, h = 1e-7;
    slope = std::max(slope, std::abs(f(x + h) - f(x - h)) / (2.0 * h));
  }
  EXPECT_LE(slope, 2.0 / 0.1);
}

TEST(CountingStatistic, QuantilesAndNoCentering) {
  const auto s = quantile_spectrum(2000);
  EXPECT_LE(std::abs(counting_statistic_X(s, 0.0, 0.01)), 1.0);
  EXPECT_LE(std::abs(counting_statistic_X(s, -1.3, 0.05)), 1.0);
  const Spectrum below({-1.5, -1.0, -0.7}, 1.0, 0, "x");
  EXPECT_EQ(counting_statistic_X(below, 0.0, 0.1, EquilibriumMeasure::none()), 0.0);
  // raw sum counts eigenvalues on the plateau
  const Spectrum above({0.5, 1.0, 1.5}, 1.0, 0, "x");
  EXPECT_EQ(counting_statistic_X(above, 0.0, 0.1, EquilibriumMeasure::none()), 3.0);
  EXPECT_NEAR(counting_moment_Xp(above, 0.0, 0.1, 2.0, EquilibriumMeasure::none()), 81.0, 1e-12);
  EXPECT_THROW(counting_moment_Xp(above, 0.0, 0.1, 0.5), DomainError);
}

TEST(CountingStatistic, CenteringMatchesQuadrature) {
  // N * int f rho_sc by brute-force midpoint rule
  const double e = 0.3, eta1 = 0.05;
  const CountingRamp f{e, eta1};
  const int m = 400000;
  double mass = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = e + (2.0 - e) * (i + 0.5) / m;
    mass += f(x) * semicircle::density(x);
  }
  mass *= (2.0 - e) / m;
  const Spectrum one({0.0}, 1.0, 0, "x");
  EXPECT_NEAR(counting_statistic_X(one, e, eta1), -mass, 1e-9);
}

TEST(CountingStatistic, MomentGrowth) {
  const std::size_t n = 512;
  const double logn = std::log(double(n)), eta1 = std::sqrt(logn) / n;
  std::vector<double> x;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng(2, i);
    x.push_back(counting_statistic_X(eigenvalues(sample_matrix(EnsembleSpec::goe(n), rng)), 0.0, eta1));
  }
  std::vector<double> ratio;
  for (int p = 1; p <= 3; ++p) {
    double m = 0.0;
    for (double v : x) m += std::pow(std::abs(v), 2.0 * p);
    ratio.push_back(std::pow(m / x.size(), 1.0 / (2.0 * p)) / std::sqrt(p * logn));
  }
  EXPECT_LE(*std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end()), 2.0);
}

TEST(Stats, Basics) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(stats::mean(v), 2.5);
  EXPECT_DOUBLE_EQ(stats::variance(v), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(stats::median(v), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(stats::iqr(v), 1.5);
  const auto f = stats::fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-14);
  const auto g = stats::fit_line({0.0, 2.0}, {0.0, 1.0}, {0.1, 0.1});
  EXPECT_NEAR(g.slope_se, 0.1 * std::sqrt(2.0) / 2.0, 1e-14);
}

TEST(Stats, KolmogorovSmirnov) {
  RngStream rng(3, 0);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto& x : c) x = rng.normal() + 0.3;
  EXPECT_GT(stats::ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(stats::ks_two_sample(a, c).p_value, 1e-6);
}

TEST(ParallelMap, OrderAndErrors) {
  const auto v = parallel_map(50, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(v[i], i * i);
  try {
    parallel_map(20, 3, [](std::size_t i) -> int {
      if (i == 7 || i == 13) throw std::runtime_error("task " + std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "task 7");
  }
}

TEST(Config, SettingsRoundTrip) {
  ExperimentConfig c;
  apply_setting(c, "sizes", "64, 128");
  apply_setting(c, "points", "0.3+0.05i,-0.4+0.1i");
  apply_setting(c, "eta0", "0.02");
  apply_setting(c, "part", "im");
  ExperimentConfig d;
  for (const auto& [k, v] : config_settings(c)) apply_setting(d, k, v);
  EXPECT_EQ(config_settings(c), config_settings(d));
  EXPECT_EQ(d.sizes, (std::vector<std::size_t>{64, 128}));
  EXPECT_EQ(d.points[1], cplx(-0.4, 0.1));
  EXPECT_EQ(config_keys().size(), config_settings(c).size());
}

TEST(Config, Errors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_setting(c, "bogus", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "samples", "-3"), ConfigError);
  EXPECT_THROW(apply_setting(c, "kappa", "abc"), ConfigError);
  EXPECT_THROW(apply_setting(c, "part", "both"), ConfigError);
  c.sizes = {128, 64};
  EXPECT_THROW(c.validate(), ConfigError);
  c.sizes = {64};
  c.kappa = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(apply_key_value_text(c, "samples 3"), ConfigError);
  apply_key_value_text(c, "# comment\nsamples = 3  # trailing\n\nseed=9\n");
  EXPECT_EQ(c.samples, 3u);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, Defaults) {
  const ExperimentConfig c;
  EXPECT_NEAR(c.eta0_for(512), std::pow(std::log(512.0), 2) / 512.0, 1e-15);
  EXPECT_NEAR(c.spacing_for(512), 0.25 / 512.0, 1e-18);
}

TEST(Sampling, ResolveNames) {
  ExperimentConfig c;
  c.ensemble = "divisible:0.5:wigner-real:rademacher";
  const auto s = resolve_sampler(c, 16);
  EXPECT_EQ(s.kind, SamplerKind::dense);
  EXPECT_EQ(s.dense.kind, EnsembleKind::gaussian_divisible);
  c.ensemble = "wigner-complex:uniform";
  EXPECT_EQ(ensemble_beta(c), 2.0);
  c.ensemble = "gbeta";
  c.beta = 4.0;
  EXPECT_EQ(ensemble_beta(c), 4.0);
  c.potential = "quartic:1";
  EXPECT_THROW(resolve_sampler(c, 16), ConfigError);
  c.ensemble = "nope";
  EXPECT_THROW(resolve_sampler(c, 16), ConfigError);
  c.ensemble = "divisible:1.5:goe";
  EXPECT_THROW(resolve_sampler(c, 16), ConfigError);
}

TEST(MaxExperiment, SingleDeterministicRow) {
  ExperimentConfig c;
  c.sizes = {64};
  c.samples = 1;
  const auto a = run_max_experiment(c, FieldPart::re), b = run_max_experiment(c, FieldPart::re);
  ASSERT_EQ(a.values(64, "sup_re").size(), 1u);
  EXPECT_EQ(a.values(64, "sup_re")[0], b.values(64, "sup_re")[0]);
  const auto* s = a.find_summary(0, "sup_re");
  ASSERT_NE(s, nullptr);
  EXPECT_TRUE(std::isnan(s->slope));
}

TEST(MaxExperiment, WorkerCountInvariance) {
  const auto a = run_max_experiment(small_config(1), std::vector<FieldPart>{FieldPart::re, FieldPart::im});
  const auto b = run_max_experiment(small_config(3), std::vector<FieldPart>{FieldPart::re, FieldPart::im});
  EXPECT_EQ(all_csv(a), all_csv(b));
  EXPECT_TRUE(std::isfinite(a.find_summary(0, "sup_im")->slope));
}

TEST(RigidityExperiment, CountingRouteMatchesField) {
  ExperimentConfig c;
  c.sizes = {256};
  c.samples = 20;
  const auto t = run_rigidity_experiment(c);
  const auto f = t.values(256, "im_sup_field"), k = t.values(256, "im_sup_count");
  ASSERT_EQ(f.size(), 20u);
  const double threshold = stats::median(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(f[i], k[i], 1e-8);
    EXPECT_EQ(f[i] > threshold, k[i] > threshold);
  }
  for (double r : t.values(256, "rigidity")) EXPECT_GT(r, 0.0);
}

TEST(RigidityExperiment, QuantilesGiveZeroDeviation) {
  const auto nu = EquilibriumMeasure::semicircle();
  const auto s = quantile_spectrum(300);
  // ranks of the quantiles match the centering up to the half-count offset
  EXPECT_LE(std::abs(im_sup_counting_route(s, -1.9, 1.9, nu)), 0.5 + 1e-9);
}

TEST(TailExperiment, ZeroLevelAndMonotone) {
  ExperimentConfig c;
  c.sizes = {128};
  c.samples = 20;
  const auto t = run_tail_experiment(c, {}, {0.0, 0.5, 1.0, 1.5, 3.0});
  double prev = 2.0;
  for (double u : {0.0, 0.5, 1.0, 1.5, 3.0}) {
    const auto* s = t.find_summary(128, "p_hat@" + detail::fmt17(u));
    ASSERT_NE(s, nullptr);
    if (u == 0.0) {
      EXPECT_EQ(s->mean, 1.0);
    }
    EXPECT_LE(s->mean, prev);
    prev = s->mean;
  }
  EXPECT_FALSE(t.warnings.empty());
  EXPECT_THROW(run_tail_experiment(c, {129}, {1.0}), ConfigError);
}

TEST(CltExperiment, ZeroZetaAndVanishingMean) {
  ExperimentConfig c;
  c.ensemble = "gbeta";
  c.beta = 2.0;
  c.sizes = {128};
  c.samples = 400;
  const std::vector<cplx> pts{cplx(0.3, 0.05), cplx(-0.4, 0.05)};
  const auto t = run_clt_experiment(c, pts, {0.0, 0.5});
  EXPECT_NEAR(t.find_comparison(128, "log_laplace_re@0,0")->empirical, 0.0, 1e-12);
  const auto* m = t.find_comparison(128, "mean_re@0");
  EXPECT_EQ(m->predicted, 0.0);
  EXPECT_LT(std::abs(m->empirical), 3.0 * m->std_error);
  EXPECT_NE(t.find_comparison(128, "cov_re@0,1"), nullptr);
  c.ensemble = "goe";
  EXPECT_THROW(run_clt_experiment(c, pts, {0.5}), ConfigError);
}

TEST(LocalLaw, DeterministicAndMomentGrowth) {
  ExperimentConfig c;
  c.sizes = {256};
  c.samples = 300;
  c.workers = 2;
  const auto a = run_local_law_scaling(c, {0.5, 0.1, 0.02});
  c.workers = 1;
  const auto b = run_local_law_scaling(c, {0.5, 0.1, 0.02});
  EXPECT_EQ(all_csv(a), all_csv(b));
  const double r1 = a.find_summary(256, "root@0.10000000000000001,1")->mean;
  for (double p : {2.0, 3.0}) {
    const double rp = a.find_summary(256, "root@0.10000000000000001," + detail::fmt17(p))->mean;
    EXPECT_GE(rp / r1, std::pow(p, 0.75) / 2.0);
    EXPECT_LE(rp / r1, std::pow(p, 0.75) * 2.0);
    EXPECT_LT(rp / r1, p);
  }
  EXPECT_NE(a.find_summary(256, "abs2_vs_n_eta"), nullptr);
  EXPECT_THROW(run_local_law_scaling(c, {0.001}), ConfigError);
}

TEST(Homogenization, SmallRunRows) {
  ExperimentConfig c;
  c.ensemble = "wigner-real:rademacher";
  c.sizes = {64};
  c.samples = 2;
  const auto t = run_homogenization_experiment(c);
  ASSERT_EQ(t.values(64, "ratio").size(), 2u);
  for (double r : t.values(64, "ratio")) EXPECT_LT(r, 1.0);
  c.ensemble = "gbeta";
  EXPECT_THROW(run_homogenization_experiment(c), ConfigError);
}

TEST(Tightness, RowsAndCrossSizeSummary) {
  ExperimentConfig c;
  c.ensemble = "divisible:0.5:wigner-real:rademacher";
  c.sizes = {32, 64};
  c.samples = 4;
  const auto t = run_tightness_experiment(c, 0.5);
  ASSERT_NE(t.find_summary(0, "iqr_ratio"), nullptr);
  ASSERT_NE(t.find_summary(0, "sup_growth"), nullptr);
  const auto d = t.values(64, "D"), a = t.values(64, "sup_re_divisible"), b = t.values(64, "sup_re_gaussian");
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], a[i] - b[i], 1e-12);
  EXPECT_THROW(run_tightness_experiment(c, 1.5), ConfigError);
}

TEST(Gmc, ExperimentMassRows) {
  ExperimentConfig c;
  c.sizes = {32};
  c.samples = 100;
  c.gamma = 0.0;
  const auto t = run_gmc_experiment(c);
  for (double m : t.values(32, "mass")) EXPECT_NEAR(m, 3.9, 1e-9);
}

TEST(Csv, ByteIdenticalReruns) {
  const auto a = run_rigidity_experiment(small_config(2)), b = run_rigidity_experiment(small_config(2));
  EXPECT_EQ(all_csv(a), all_csv(b));
  EXPECT_EQ(io::results_csv(a).rfind("experiment,N,sample,stat,value\n", 0), 0u);
  EXPECT_EQ(io::summary_csv(a).rfind("experiment,N,stat,mean,median,iqr,slope,slope_se\n", 0), 0u);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(io::num(0.1), "0.10000000000000001");
  EXPECT_EQ(io::num(NAN), "nan");
  EXPECT_EQ(io::num(-INFINITY), "-inf");
  ResultTable empty;
  empty.experiment = "max";
  EXPECT_EQ(io::results_csv(empty), "experiment,N,sample,stat,value\n");
}
