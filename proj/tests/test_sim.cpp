#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "hml/diagnostics.hpp"
#include "hml/kernel.hpp"
#include "hml/parallel.hpp"
#include "hml/process_sim.hpp"
#include "hml/rng.hpp"

using namespace hml;

namespace {

double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double fbm_cov(double H, double s, double t) {
  return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

}  // namespace

TEST_CASE("rng streams are deterministic and decorrelated") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  std::vector<double> xa, xb, xc;
  for (int i = 0; i < 1000; ++i) {
    xa.push_back(a.normal());
    xb.push_back(b.normal());
    xc.push_back(c.normal());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  // moments sane
  CHECK(std::abs(sample_mean(xa)) < 0.1);
  CHECK(sample_var(xa) == doctest::Approx(1.0).epsilon(0.15));
  double cross = 0.0;
  for (int i = 0; i < 1000; ++i) cross += xa[i] * xc[i];
  CHECK(std::abs(cross / 1000.0) < 0.1);
}

TEST_CASE("fbm: exact grid law") {
  const double H = 0.7;
  const int R = 3000;
  std::vector<double> z1(R), z2(R), zhalf(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = 1.0 / 64;
    cfg.n_steps = 128;  // grid to t = 2
    cfg.seed = 5;
    cfg.stream = r;
    auto Z = simulate_fbm(H, cfg);
    z1[r] = Z.values[64];
    z2[r] = Z.values[128];
    zhalf[r] = Z.values[32];
  });
  // variance 1 at t=1 within MC tolerance (se ~ sqrt(2/R) ~ 0.026)
  CHECK(sample_var(z1) == doctest::Approx(1.0).epsilon(0.1));
  // E[Z_2 Z_1] = 2^{2H-1} ~ 1.3195 for H=0.7
  double c21 = 0.0;
  for (int r = 0; r < R; ++r) c21 += z2[r] * z1[r];
  c21 /= R;
  CHECK(c21 == doctest::Approx(std::pow(2.0, 2 * H - 1)).epsilon(0.12));
  // self-similarity: Var(Z_1)/Var(Z_1/2) = 2^{2H}
  CHECK(sample_var(z1) / sample_var(zhalf) == doctest::Approx(std::pow(2.0, 2 * H)).epsilon(0.2));

  // determinism: same config, same path
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 100;
  cfg.seed = 5;
  cfg.stream = 3;
  auto A = simulate_fbm(H, cfg);
  auto B = simulate_fbm(H, cfg);
  CHECK(A.values == B.values);
  CHECK_THROWS_AS(simulate_fbm(0.4, cfg), std::invalid_argument);
}

TEST_CASE("fbm: stationary increments have equal variance") {
  const double H = 0.8;
  const int R = 2000;
  std::vector<double> inc1(R), inc2(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = 1.0 / 32;
    cfg.n_steps = 64;
    cfg.seed = 17;
    cfg.stream = r;
    auto Z = simulate_fbm(H, cfg);
    inc1[r] = Z.values[16] - Z.values[0];
    inc2[r] = Z.values[48] - Z.values[32];
  });
  const double expect = std::pow(0.5, 2 * H);
  CHECK(sample_var(inc1) == doctest::Approx(expect).epsilon(0.12));
  CHECK(sample_var(inc2) == doctest::Approx(expect).epsilon(0.12));
}

TEST_CASE("fbm: increment marginals pass normality diagnostics") {
  SimConfig cfg;
  cfg.dt = 1.0 / 256;
  cfg.n_steps = 2048;
  cfg.seed = 23;
  auto Z = simulate_fbm(0.7, cfg);
  std::vector<double> inc(Z.values.size() - 1);
  for (std::size_t i = 0; i + 1 < Z.values.size(); ++i) inc[i] = Z.values[i + 1] - Z.values[i];
  // increments are correlated but marginally Gaussian; Lilliefors on the
  // marginal is a calibration-grade check
  auto ks = ks_fitted_normal(inc);
  CHECK(ks.statistic < 2.0 * ks.critical_5pct);
}

TEST_CASE("rank-2 quadrature backend: law at small grid") {
  auto p = make_params(0.7, 2);
  const int R = 3000;
  std::vector<double> z1(R), z05(R), z025(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = 1.0 / 64;
    cfg.n_steps = 64;
    cfg.seed = 11;
    cfg.stream = r;
    auto Z = simulate_hermite(p, cfg, HermiteBackend::Quadrature);
    z1[r] = Z.values[64];
    z05[r] = Z.values[32];
    z025[r] = Z.values[16];
  });
  CHECK(std::abs(sample_mean(z1)) < 0.06);
  // heavy-tailed marginal: kurtosis ~ 11, se(Var) ~ 0.06 at R=3000
  CHECK(sample_var(z1) == doctest::Approx(1.0).epsilon(0.2));
  // self-similarity ratios at lambda = 2 and 4
  CHECK(sample_var(z1) / sample_var(z05) == doctest::Approx(std::pow(2.0, 1.4)).epsilon(0.25));
  CHECK(sample_var(z1) / sample_var(z025) == doctest::Approx(std::pow(4.0, 1.4)).epsilon(0.35));
  // covariance point
  double c = 0.0;
  for (int r = 0; r < R; ++r) c += z025[r] * z05[r];
  c /= R;
  CHECK(c == doctest::Approx(fbm_cov(0.7, 0.25, 0.5)).scale(1.0).epsilon(0.35));

  CHECK_THROWS_AS(simulate_hermite(make_params(0.7, 3), SimConfig{64, 0.01, 50, 1, 1, 0},
                                   HermiteBackend::Quadrature),
                  std::invalid_argument);
}

TEST_CASE("rank-sum backend: exact unit variance normalization and law") {
  for (int m : {2, 3}) {
    auto p = make_params(0.8, m);
    const int R = 3000;
    std::vector<double> z1(R), z05(R);
    parallel_for(R, [&](std::size_t r) {
      SimConfig cfg;
      cfg.dt = 1.0 / 128;
      cfg.n_steps = 128;
      cfg.seed = 31;
      cfg.stream = r;
      auto Z = simulate_hermite(p, cfg, HermiteBackend::RankSum);
      z1[r] = Z.values[128];
      z05[r] = Z.values[64];
    });
    CHECK(std::abs(sample_mean(z1)) < 0.08);
    CHECK(sample_var(z1) == doctest::Approx(1.0).epsilon(0.2));
    CHECK(sample_var(z1) / sample_var(z05) ==
          doctest::Approx(std::pow(2.0, 2 * 0.8)).epsilon(0.3));
  }
}

TEST_CASE("backend cross-validation: m=2 covariances agree") {
  auto p = make_params(0.7, 2);
  const int R = 1500;
  const std::vector<std::size_t> pts = {13, 26, 38, 51, 64};
  std::vector<std::vector<double>> qa(R), qb(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = 1.0 / 64;
    cfg.n_steps = 64;
    cfg.seed = 77;
    cfg.stream = r;
    auto A = simulate_hermite(p, cfg, HermiteBackend::Quadrature);
    cfg.stream = r + 100000;
    auto B = simulate_hermite(p, cfg, HermiteBackend::RankSum);
    for (auto i : pts) {
      qa[r].push_back(A.values[i]);
      qb[r].push_back(B.values[i]);
    }
  });
  for (std::size_t j = 0; j < pts.size(); ++j) {
    std::vector<double> a(R), b(R);
    for (int r = 0; r < R; ++r) {
      a[r] = qa[r][j];
      b[r] = qb[r][j];
    }
    const double va = sample_var(a), vb = sample_var(b);
    // combined error bars: heavy-tailed, se ~ va*sqrt(10/R)
    const double band = 3.0 * (va + vb) * std::sqrt(10.0 / R);
    CHECK(std::abs(va - vb) < band);
  }
}

TEST_CASE("hou: deterministic relaxation and coupling") {
  // constant driver: pure relaxation y_{n+1} = e^{-lambda dt} y_n
  std::vector<double> flat(101, 0.0);
  auto Z = make_path(0.0, 0.01, flat);
  auto y = hou_on_path(Z, 2.0, 1.0, 3.0);
  CHECK(y.values[1] == doctest::Approx(3.0 * std::exp(-0.02)).epsilon(1e-12));
  CHECK(y.values[100] == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-10));

  // two initializations on the same noise contract exponentially
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 400;
  cfg.seed = 4;
  auto W = simulate_fbm(0.75, cfg);
  auto y1 = hou_on_path(W, 1.5, 0.7, 0.0);
  auto y2 = hou_on_path(W, 1.5, 0.7, 5.0);
  for (std::size_t i = 0; i < y1.values.size(); i += 50) {
    const double expect = 5.0 * std::exp(-1.5 * W.dt * static_cast<double>(i));
    CHECK(y2.values[i] - y1.values[i] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("volterra with exponential kernel matches hou on the same driver") {
  SimConfig cfg;
  cfg.dt = 0.02;
  cfg.n_steps = 3000;
  cfg.seed = 12;
  auto Z = simulate_fbm(0.8, cfg, -20.0);  // driver over [-20, 40]
  auto hou = hou_on_path(Z, 1.0, 1.0, 0.0);
  auto vol = volterra_on_path(Z, KernelSpec::exponential(1.0), 20.0);
  // hou recursion telescopes to exactly the left-point Volterra sum
  const std::size_t off = hou.index_of(0.0);
  for (std::size_t i = 0; i < vol.values.size(); i += 100)
    CHECK(vol.values[i] == doctest::Approx(hou.values[off + i]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("volterra: stationarity of windows and zero mean") {
  auto p = make_params(0.7, 1);
  const int R = 400;
  std::vector<double> w1(R), w2(R), mean_acc(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = 0.05;
    cfg.n_steps = 2000;  // T = 100
    cfg.history_truncation = 50.0;
    cfg.seed = 9;
    cfg.stream = r;
    auto y = simulate_volterra(KernelSpec::exponential(1.0), p, cfg);
    const std::size_t half = y.values.size() / 2;
    std::vector<double> a(y.values.begin(), y.values.begin() + half);
    std::vector<double> b(y.values.begin() + half, y.values.end());
    w1[r] = sample_var(a);
    w2[r] = sample_var(b);
    mean_acc[r] = sample_mean(y.values);
  });
  const double m1 = sample_mean(w1), m2 = sample_mean(w2);
  const double se = std::sqrt(sample_var(w1) / R) + std::sqrt(sample_var(w2) / R);
  CHECK(std::abs(m1 - m2) < 3.0 * se);
  const double mm = sample_mean(mean_acc);
  CHECK(std::abs(mm) < 3.0 * std::sqrt(sample_var(mean_acc) / R) + 0.01);

  // history below 5x the kernel support is rejected
  SimConfig bad;
  bad.dt = 0.05;
  bad.n_steps = 100;
  bad.history_truncation = 10.0;
  bad.seed = 1;
  CHECK_THROWS_AS(simulate_volterra(KernelSpec::exponential(1.0), p, bad),
                  std::invalid_argument);
}

TEST_CASE("volterra covariance decays within the certified envelope") {
  auto p = make_params(0.7, 1);
  const int R = 200;
  const double dt = 0.05;
  const std::vector<double> lag_list = {1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<std::vector<double>> covs(R);
  parallel_for(R, [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.n_steps = 8000;
    cfg.seed = 14;
    cfg.stream = r;
    auto y = simulate_volterra(KernelSpec::exponential(1.0), p, cfg);
    const auto n = y.values.size();
    // y is centered by construction; raw second moments avoid the
    // long-range-dependent bias of time-averaged mean subtraction
    for (double lag : lag_list) {
      const auto l = static_cast<std::size_t>(lag / dt);
      double acc = 0.0;
      for (std::size_t i = 0; i + l < n; ++i) acc += y.values[i] * y.values[i + l];
      covs[r].push_back(acc / static_cast<double>(n - l));
    }
  });
  for (std::size_t j = 0; j < lag_list.size(); ++j) {
    std::vector<double> c(R);
    for (int r = 0; r < R; ++r) c[r] = covs[r][j];
    const double mc = sample_mean(c);
    // exact stationary covariance as the oracle (quadrature, independent path)
    const double oracle = stationary_covariance(KernelSpec::exponential(1.0), p.H, lag_list[j]);
    const double se = std::sqrt(sample_var(c) / R);
    // dt = 0.05 left-point quadrature carries a ~5% one-sided bias
    CHECK(std::abs(mc - oracle) < 4.0 * se + 0.07 * std::abs(oracle));
    // envelope: |cov| <= c * (1 ^ lag^{2H-2})
    CHECK(std::abs(mc) < 2.0 * std::min(1.0, std::pow(lag_list[j], 2 * p.H - 2)));
  }
}

TEST_CASE("kernel quadratures against closed forms") {
  auto k = KernelSpec::exponential(1.0);
  CHECK(k.l1_norm() == doctest::Approx(1.0));
  CHECK(kernel_cross_correlation(k, 0.7, false) == doctest::Approx(std::exp(-0.7) / 2.0));

  // stationary fOU variance: H Gamma(2H) for lambda = sigma = 1
  for (double H : {0.6, 0.7, 0.8, 0.9}) {
    const double expect = H * std::tgamma(2.0 * H);
    CHECK(stationary_variance(k, H) == doctest::Approx(expect).epsilon(2e-3));
  }
  // symmetry of the covariance in the lag
  CHECK(stationary_covariance(k, 0.8, 2.5) == doctest::Approx(stationary_covariance(k, 0.8, -2.5)));
}

TEST_CASE("validate_kernel: certificate outcomes") {
  auto p9 = make_params(0.9, 1);
  auto p8 = make_params(0.8, 1);
  const std::vector<double> lags = {5.0, 10.0, 20.0, 35.0, 50.0};

  auto ok = validate_kernel(KernelSpec::exponential(1.0), p8, lags);
  CHECK(ok.passed);
  CHECK(ok.c_fit > 0.0);

  // heavy tail (1+s)^{-0.6} tabulated: L1 of the table is finite but the
  // decay certificate fails against lag^{2H-2} for H=0.9
  std::vector<double> heavy;
  const double step = 0.05;
  for (double s = 0.0; s <= 400.0; s += step) heavy.push_back(std::pow(1.0 + s, -0.6));
  auto bad = validate_kernel(KernelSpec::tabulated(step, heavy, -0.6), p9, lags);
  CHECK_FALSE(bad.passed);

  // degenerate zero kernel
  auto zero = validate_kernel(KernelSpec::tabulated(0.1, std::vector<double>(100, 0.0)), p8, lags);
  CHECK_FALSE(zero.passed);

  CHECK_THROWS_AS(validate_kernel(KernelSpec::exponential(1.0), p8, {}), std::invalid_argument);
}

TEST_CASE("path grid io round trips") {
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 50;
  cfg.seed = 3;
  auto Z = simulate_fbm(0.7, cfg, -0.2);
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string csv = dir + "/hml_test_path.csv";
  const std::string bin = dir + "/hml_test_path.bin";
  write_csv(Z, csv);
  auto Zc = read_csv(csv);
  REQUIRE(Zc.values.size() == Z.values.size());
  for (std::size_t i = 0; i < Z.values.size(); ++i)
    CHECK(Zc.values[i] == Z.values[i]);  // %.17g is exact for doubles
  CHECK(Zc.t0 == doctest::Approx(Z.t0));

  write_binary(Z, bin);
  auto Zb = read_binary(bin);
  CHECK(Zb.values == Z.values);  // bit-exact
  CHECK(Zb.t0 == Z.t0);
  CHECK(Zb.dt == Z.dt);
  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}

TEST_CASE("volterra richardson toggle improves a smooth case") {
  // smooth driver: Z_t = sin t, kernel e^{-s}: exact y(t) computable by quadrature
  const double dt = 0.1;
  const std::size_t n = 600;
  std::vector<double> zs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) zs[i] = std::sin(-20.0 + dt * static_cast<double>(i));
  auto Z = make_path(-20.0, dt, zs);
  auto k = KernelSpec::exponential(1.0);
  auto plain = volterra_on_path(Z, k, 20.0);
  VolterraOptions opt;
  opt.richardson = true;
  auto rich = volterra_on_path(Z, k, 20.0, 1, opt);
  // exact stationary response: y(t) = int_0^inf e^{-u} cos'(...)du ->
  // y(t) = (sin t - ... ) use quadrature oracle at fine step instead
  const double t_probe = 20.0;
  const std::size_t idx = plain.index_of(t_probe);
  double exact = 0.0;
  const double h = 1e-4;
  for (double u = 0.0; u < 18.0; u += h)
    exact += std::exp(-u) * (std::cos(t_probe - u)) * h;  // dZ_s = cos(s) ds
  CHECK(std::abs(rich.values[idx] - exact) < std::abs(plain.values[idx] - exact));
}
