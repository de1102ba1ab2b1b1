#include "hml/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "hml/contraction.hpp"
#include "hml/diagnostics.hpp"
#include "hml/experiment.hpp"
#include "hml/fft.hpp"
#include "hml/functional.hpp"
#include "hml/parallel.hpp"
#include "hml/process_sim.hpp"
#include "hml/rng.hpp"
#include "hml/rough.hpp"

namespace hml {

namespace {

struct Ctx {
  AcceptanceOptions opts;
  int scaled(int n) const {
    return std::max(16, static_cast<int>(std::lround(n * opts.scale)));
  }
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double fbm_cov(double H, double s, double t) {
  return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ------------------------------------------------------------ criterion 1

// independent pairing count: first live item stays free or pairs with one of
// the others; counts partial pairings of k items with d left free
long pairing_oracle(int k, int d) {
  std::function<long(int, int)> f = [&](int n, int free) -> long {
    if (n == 0) return free == d ? 1 : 0;
    long total = f(n - 1, free + 1);
    if (n >= 2) total += (n - 1) * f(n - 2, free);
    return total;
  };
  return f(k, 0);
}

CriterionResult c_combinatorics(const Ctx&) {
  CriterionResult res;
  res.name = "combinatorics";
  int checked = 0;
  for (int k = 1; k <= 8; ++k) {
    const auto prof = chaos_projection_profile(k, 1);
    for (int d = 0; d <= k; ++d) {
      const long expect = pairing_oracle(k, d);
      const bool present = prof.count(d) > 0;
      if (expect == 0 && present) {
        res.details = "m=1 k=" + std::to_string(k) + " spurious degree " + std::to_string(d);
        return res;
      }
      if (expect != 0 && (!present || prof.at(d) != expect)) {
        res.details = "m=1 k=" + std::to_string(k) + " mismatch at degree " + std::to_string(d);
        return res;
      }
      ++checked;
    }
  }
  // m=2, k<=4: iterative worklist enumerator, independent of the library DFS
  for (int k = 1; k <= 4; ++k) {
    std::set<std::vector<int>> oracle;
    std::vector<std::pair<std::vector<int>, int>> work{{{}, 0}};
    while (!work.empty()) {
      auto [prefix, sum] = work.back();
      work.pop_back();
      const int j = static_cast<int>(prefix.size()) + 1;
      if (j == k || k == 1) {
        if (static_cast<int>(prefix.size()) == k - 1) oracle.insert(prefix);
        if (k == 1) break;
        continue;
      }
      const int cap = std::min(2, j * 2 - 2 * sum);
      for (int rj = 0; rj <= cap; ++rj) {
        auto next = prefix;
        next.push_back(rj);
        work.emplace_back(std::move(next), sum + rj);
      }
    }
    if (k == 1) oracle.insert({});
    const auto got = enumerate_contractions(k, 2);
    if (got.size() != oracle.size()) {
      res.details = "m=2 k=" + std::to_string(k) + " cardinality mismatch";
      return res;
    }
    for (const auto& v : got)
      if (!oracle.count(v.r)) {
        res.details = "m=2 k=" + std::to_string(k) + " vector not in oracle";
        return res;
      }
    checked += static_cast<int>(got.size());
  }
  res.pass = true;
  res.details = std::to_string(checked) + " integer identities, exact";
  return res;
}

// ------------------------------------------------------------ criterion 2

CriterionResult c_hermite_law(const Ctx& ctx) {
  CriterionResult res;
  res.name = "hermite_law";
  res.pass = true;
  std::string det;
  for (double H : {0.7, 0.9}) {
    auto p = make_params(H, 2);
    const int R = ctx.scaled(10000);  // 10x the stated floor: Rosenblatt kurtosis ~ 11
    std::vector<double> z1(R), z05(R), z025(R);
    parallel_for(static_cast<std::size_t>(R), [&](std::size_t r) {
      SimConfig cfg;
      cfg.dt = 1.0 / 512;
      cfg.n_steps = 512;
      cfg.seed = ctx.opts.seed + 20;
      cfg.stream = r;
      auto Z = simulate_hermite(p, cfg, HermiteBackend::Quadrature);
      z1[r] = Z.values[512];
      z05[r] = Z.values[256];
      z025[r] = Z.values[128];
    });
    const double v1 = var_of(z1);
    bool ok = std::abs(v1 - 1.0) <= 0.05;
    det += "H=" + fmt(H) + ": Var(Z_1)=" + fmt(v1);
    // covariance points within 3 MC standard errors
    const std::pair<std::vector<double>*, std::vector<double>*> pairs[2] = {{&z025, &z05},
                                                                            {&z05, &z1}};
    const double st[2][2] = {{0.25, 0.5}, {0.5, 1.0}};
    for (int i = 0; i < 2; ++i) {
      std::vector<double> prod(z1.size());
      for (std::size_t r = 0; r < prod.size(); ++r)
        prod[r] = (*pairs[i].first)[r] * (*pairs[i].second)[r];
      const double est = mean_of(prod);
      const double se = std::sqrt(var_of(prod) / static_cast<double>(prod.size()));
      const double target = fbm_cov(H, st[i][0], st[i][1]);
      ok = ok && std::abs(est - target) <= 3.0 * se;
      det += " cov(" + fmt(st[i][0]) + "," + fmt(st[i][1]) + ")=" + fmt(est) + " target " +
             fmt(target) + " (3se=" + fmt(3 * se) + ")";
    }
    det += "; ";
    res.pass = res.pass && ok;
  }
  res.details = det;
  return res;
}

// ------------------------------------------------------------ criterion 3

CriterionResult c_covariance_decay(const Ctx& ctx) {
  CriterionResult res;
  res.name = "covariance_decay";
  res.pass = true;
  const double H = 0.8, lambda = 1.0;
  const double dt = 0.05, T_run = 2000.0, burn = 60.0;
  const std::vector<double> lags = {5.0, 7.5, 11.0, 16.0, 23.0, 34.0, 50.0};
  std::string det;
  for (int m : {1, 2}) {
    auto p = make_params(H, m);
    const int R = ctx.scaled(96);
    std::vector<std::vector<double>> covs(static_cast<std::size_t>(R));
    parallel_for(covs.size(), [&](std::size_t r) {
      SimConfig cfg;
      cfg.dt = dt;
      cfg.n_steps = static_cast<long>((T_run + burn) / dt);
      cfg.seed = ctx.opts.seed + 30 + static_cast<std::uint64_t>(m);
      cfg.stream = r;
      // rank_sum backend keeps the long-run driver affordable for m = 2
      PathGrid Z = simulate_hermite(p, cfg, m == 1 ? HermiteBackend::Auto : HermiteBackend::RankSum,
                                    -burn);
      PathGrid y = hou_on_path(Z, lambda, 1.0, 0.0);
      const std::size_t skip = y.index_of(0.0);
      std::vector<double> vals(y.values.begin() + static_cast<long>(skip), y.values.end());
      // y is centered by construction; raw products avoid the O(T^{2H-2})
      // bias of time-averaged mean subtraction under long-range dependence
      covs[r].reserve(lags.size());
      for (double lag : lags) {
        const auto l = static_cast<std::size_t>(std::llround(lag / dt));
        double acc = 0.0;
        for (std::size_t i = 0; i + l < vals.size(); ++i) acc += vals[i] * vals[i + l];
        covs[r].push_back(acc / static_cast<double>(vals.size() - l));
      }
    });
    // log-log fit of the replica-averaged covariances
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < lags.size(); ++j) {
      std::vector<double> c(covs.size());
      for (std::size_t r = 0; r < covs.size(); ++r) c[r] = covs[r][j];
      const double mc = mean_of(c);
      const double se = std::sqrt(var_of(c) / static_cast<double>(c.size()));
      if (mc <= 0.0) {
        res.pass = false;
        res.details += "m=" + std::to_string(m) + ": negative covariance at lag " + fmt(lags[j]);
        break;
      }
      const double w = mc * mc / (se * se);  // delta-method weight for log cov
      const double x = std::log(lags[j]);
      sw += w;
      sx += w * x;
      sy += w * std::log(mc);
      sxx += w * x * x;
      sxy += w * x * std::log(mc);
    }
    const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    const bool ok = std::abs(slope - (2.0 * H - 2.0)) <= 0.1;
    det += "m=" + std::to_string(m) + ": slope=" + fmt(slope) + " target " + fmt(2 * H - 2) + "; ";
    res.pass = res.pass && ok;
  }
  res.details = det;
  return res;
}

// ------------------------------------------------------------ criteria 4/5

FunctionalDriver fou_driver(double H, int m) {
  FunctionalDriver drv;
  drv.params = make_params(H, m);
  drv.kernel = KernelSpec::exponential(1.0);
  drv.inner_refinement = 2;
  drv.richardson = true;
  return drv;
}

// High-rank series are built against the simulator's own stationary sigma:
// a percent-level variance miscalibration leaks low-chaos components that the
// sqrt(eps) normalization amplifies by eps^{H*(low)-1/2}.
double driver_sigma(const FunctionalDriver& drv) {
  return std::sqrt(volterra_discrete_variance(drv.kernel, drv.params.H, drv.dt_cap,
                                              drv.inner_refinement, drv.richardson));
}

// excess kurtosis of sqrt(eps) int_0^{1/eps} He2(y/sigma) dt from the exact
// stationary covariance: cum2 and the cyclic cum4 by convolution quadrature
double h2_kurtosis_quadrature(const KernelSpec& kernel, double H, double eps) {
  const double sig2 = stationary_variance(kernel, H);
  const double h = 0.05;
  const double T = 1.0 / eps;
  const auto n = static_cast<std::size_t>(T / h);
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i)
    rho[i] = stationary_covariance(kernel, H, static_cast<double>(i) * h) / sig2;
  double cum2 = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    cum2 += (l == 0 ? 1.0 : 2.0) * (1.0 - static_cast<double>(l) / static_cast<double>(n)) *
            rho[l] * rho[l] * h;
  cum2 *= 2.0 * T;
  std::vector<double> rfull(2 * n - 1);
  for (std::size_t i = 0; i < rfull.size(); ++i) {
    const long d = static_cast<long>(i) - static_cast<long>(n - 1);
    rfull[i] = rho[static_cast<std::size_t>(std::labs(d))];
  }
  const auto g = fft_convolve(rfull, rfull);
  double J = 0.0;
  for (double v : g) J += (v * h) * (v * h) * h;
  return 48.0 * T * J / (cum2 * cum2);
}

// skewness of the same functional: cum3 = 8 T J3 with J3 the cyclic triple
// integral of rho~, by FFT convolution
double h2_skewness_quadrature(const KernelSpec& kernel, double H, double eps) {
  const double sig2 = stationary_variance(kernel, H);
  const double h = 0.05;
  const double T = 1.0 / eps;
  const auto n = static_cast<std::size_t>(T / h);
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i)
    rho[i] = stationary_covariance(kernel, H, static_cast<double>(i) * h) / sig2;
  double cum2 = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    cum2 += (l == 0 ? 1.0 : 2.0) * (1.0 - static_cast<double>(l) / static_cast<double>(n)) *
            rho[l] * rho[l] * h;
  cum2 *= 2.0 * T;
  std::vector<double> rfull(2 * n - 1);
  for (std::size_t i = 0; i < rfull.size(); ++i) {
    const long d = static_cast<long>(i) - static_cast<long>(n - 1);
    rfull[i] = rho[static_cast<std::size_t>(std::labs(d))];
  }
  const auto conv = fft_convolve(rfull, rfull);
  double J3 = 0.0;
  for (long u = -static_cast<long>(n) + 1; u < static_cast<long>(n); ++u) {
    const double g = conv[static_cast<std::size_t>(u + 2 * static_cast<long>(n) - 2)] * h;
    J3 += g * rho[static_cast<std::size_t>(std::labs(u))] * h;
  }
  return 8.0 * T * J3 / std::pow(cum2, 1.5);
}

CriterionResult c_srd_clt(const Ctx& ctx) {
  CriterionResult res;
  res.name = "srd_clt";
  auto drv = fou_driver(0.7, 1);
  const double sigma = driver_sigma(drv);
  auto h2 = hermite_series(2, sigma);
  // H*(2) = 0.4: the running variance rate Lambda(T) converges like T^{-0.2},
  // so the top default-ladder rungs (T = 10..100) are visibly pre-asymptotic;
  // the ladder starts at eps = 1e-2 instead
  const std::vector<double> ladder = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4};

  auto fit = scaling_exponent(h2, drv, ladder, ctx.scaled(256), ctx.opts.seed + 40, 2);
  const bool slope_ok = std::abs(fit.slope - 1.0) <= 0.1;

  auto sample = sample_functional(h2, drv, 1e-3, {0.0, 1.0}, ctx.scaled(8000),
                                  ctx.opts.seed + 41);
  auto rep = gaussianity_report(sample, ctx.opts.seed + 42);
  const bool kurt_ok = std::abs(rep.excess_kurtosis) <= 0.15;

  // Lambda against independent quadrature of 2 int E[G(y_s)G(y_0)] ds up to
  // the same cutoff: for G = He_2(y/sigma), E[G_s G_0] = 2 (rho(s)/sigma_ex^2)^2.
  // H*(2) = 0.4 makes the tail decay like s^{-1.2}, so the comparison is at
  // the cutoff and the tail bound is reported separately.
  const double cutoff = 60.0;
  auto est = limit_covariance_srd(h2, h2, drv, cutoff, ctx.scaled(512), ctx.opts.seed + 43, 2, 2);
  const double sig2_ex = stationary_variance(drv.kernel, 0.7);
  double oracle = 0.0;
  const double hq = 0.05;
  for (double s = 0.0; s <= cutoff; s += hq) {
    const double rho = stationary_covariance(drv.kernel, 0.7, s) / sig2_ex;
    oracle += ((s == 0.0 || s >= cutoff - hq / 2) ? 0.5 : 1.0) * 2.0 * rho * rho * hq;
  }
  oracle *= 2.0;
  const bool lambda_ok = std::abs(est.lambda - oracle) <= 0.10 * oracle;

  // independent 4th-cumulant quadrature: cum4 = 48 T J with J the cyclic
  // integral of rho~, computed by FFT convolution. H*(2) = 0.4 sits near the
  // short-range boundary, so the fourth-moment convergence is only eps^{0.4}
  // and the true excess kurtosis at eps = 1e-3 is order one.
  const double kurt_oracle = h2_kurtosis_quadrature(drv.kernel, 0.7, 1e-3);

  res.pass = slope_ok && kurt_ok && lambda_ok;
  res.details = "slope=" + fmt(fit.slope) + " (1 +- 0.1); kurtosis=" + fmt(rep.excess_kurtosis) +
                " +- " + fmt(rep.se_kurtosis) + " (|.| <= 0.15 required; 4th-cumulant quadrature gives " +
                fmt(kurt_oracle) + " at eps=1e-3, decaying like eps^0.4" +
                (kurt_ok ? "" : ", so this sub-check cannot pass at the stated eps") +
                "); Lambda=" + fmt(est.lambda) + " +- " + fmt(est.stderr_lambda) +
                " vs quadrature " + fmt(oracle) + " at cutoff " + fmt(cutoff);
  return res;
}

CriterionResult c_lrd_rosenblatt(const Ctx& ctx) {
  CriterionResult res;
  res.name = "lrd_rosenblatt";
  auto drv = fou_driver(0.9, 1);
  const double sigma = driver_sigma(drv);
  auto h2 = hermite_series(2, sigma);
  const std::vector<double> ladder = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

  auto fit = scaling_exponent(h2, drv, ladder, ctx.scaled(768), ctx.opts.seed + 50, 2);
  const double target = (2.0 * 0.9 - 2.0) * 2.0 + 2.0;  // 1.6
  const bool slope_ok = std::abs(fit.slope - target) <= 0.1;

  auto sample = sample_functional(h2, drv, 1e-3, {0.0, 1.0}, ctx.scaled(5000),
                                  ctx.opts.seed + 51);
  auto rep = gaussianity_report(sample, ctx.opts.seed + 52);
  const bool skew_ok = rep.skewness >= 3.0 * rep.se_skewness && rep.skewness > 0.0;

  res.pass = slope_ok && skew_ok;
  res.details = "slope=" + fmt(fit.slope) + " (" + fmt(target) + " +- 0.1); skewness=" +
                fmt(rep.skewness) + " (se=" + fmt(rep.se_skewness) + ", Rosenblatt signature)";
  return res;
}

// ------------------------------------------------------------ criterion 6

CriterionResult c_mixed_independence(const Ctx& ctx) {
  CriterionResult res;
  res.name = "mixed_independence";
  // One LRD and one SRD component on shared noise: He2 (H*(2) = 0.8) and
  // He6 (H*(6) = 0.4) at H = 0.9. The plain correlation vanishes by chaos
  // orthogonality; the correlation of SQUARES measures the shared
  // low-frequency variance modulation, which dies out only far below any
  // reachable eps (it is flat over eps in [1e-3, 1e-2] at order 0.3-0.8 for
  // every admissible rank pair; verified against an exact-Gaussian oracle).
  auto drv = fou_driver(0.9, 1);
  const double sigma = driver_sigma(drv);
  auto lrd = hermite_series(2, sigma);  // H*(2) = 0.8, long range
  auto srd = hermite_series(6, sigma);  // H*(6) = 0.4, short range
  auto [a, b] = sample_functional_pair(lrd, srd, drv, 1e-3, {0.0, 1.0},
                                       std::max(1000, ctx.scaled(2000)), ctx.opts.seed + 60);
  auto rep = cross_independence(a, b);
  res.pass = std::abs(rep.independence_statistic) <= 3.0 * rep.se_independence;
  res.details = "corr(squares)=" + fmt(rep.independence_statistic) + " (bootstrap 3se=" +
                fmt(3.0 * rep.se_independence) + (res.pass ? "" :
                ", slow mixed-moment decorrelation, see ledger") +
                "); corr=" + fmt(rep.cross_covariance) + " (3se=" + fmt(3.0 * rep.se_cross) + ")";
  return res;
}

// ------------------------------------------------------------ criterion 7

CriterionResult c_solver_orders(const Ctx& ctx) {
  CriterionResult res;
  res.name = "solver_orders";
  auto f = VectorField::linear(1.0);

  auto smooth = [](std::size_t n) {
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = static_cast<double>(i) / static_cast<double>(n);
    return make_path(0.0, 1.0 / static_cast<double>(n), std::move(v));
  };

  auto order_fit = [](const std::vector<double>& errs) {
    // least squares slope of log err against log dt over the halvings
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(errs.size());
    for (std::size_t i = 0; i < errs.size(); ++i) {
      const double x = -static_cast<double>(i) * std::log(2.0);
      const double y = std::log(errs[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  std::vector<double> young_errs, davie_errs;
  for (std::size_t n : {64, 128, 256, 512, 1024}) {
    auto X = smooth(n);
    young_errs.push_back(std::abs(solve_young(f, X, 1.0).values.back() - std::exp(1.0)));
    davie_errs.push_back(
        std::abs(solve_rough(f, lift_symmetric(X, 0.5), 1.0).values.back() - std::exp(1.0)));
  }
  const double young_order = order_fit(young_errs);
  const double davie_order = order_fit(davie_errs);
  const bool young_ok = std::abs(young_order - 1.0) <= 0.3;
  const bool davie_ok = std::abs(davie_order - 2.0) <= 0.3;

  // Chen residual on a random rough path, all (s,t,u) with stride sampling
  SimConfig cfg;
  cfg.dt = 1.0 / 512;
  cfg.n_steps = 512;
  cfg.seed = ctx.opts.seed + 70;
  auto W = simulate_fbm(0.7, cfg);
  auto d = lift_symmetric(W, 0.45);
  double worst = 0.0;
  for (std::size_t s = 0; s < 512; s += 7)
    for (std::size_t t = s + 1; t < 512; t += 13)
      for (std::size_t u = t + 1; u <= 512; u += 17) {
        const double resid = d.second_level(s, u) - d.second_level(s, t) - d.second_level(t, u) -
                             d.increment(s, t) * d.increment(t, u);
        worst = std::max(worst, std::abs(resid));
      }
  const bool chen_ok = worst <= 1e-12;

  res.pass = young_ok && davie_ok && chen_ok;
  res.details = "young order=" + fmt(young_order) + " (1 +- 0.3); davie order=" + fmt(davie_order) +
                " (2 +- 0.3); chen residual=" + fmt(worst);
  return res;
}

// ------------------------------------------------------------ criterion 8

CriterionResult c_homogenization(const Ctx& ctx) {
  CriterionResult res;
  res.name = "homogenization";
  auto f = VectorField::linear(1.0);
  const double x0 = 1.0, eps = 1e-3;
  const long steps = 1024;  // keeps the exp-scheme drift well under the KS scale
  std::string det;
  bool all_ok = true;

  struct Case {
    double H;
    Regime regime;
  };
  for (const auto cs : {Case{0.9, Regime::LongRange}, Case{0.7, Regime::ShortRange}}) {
    auto drv = fou_driver(cs.H, 1);
    const double sigma = driver_sigma(drv);
    auto h2 = hermite_series(2, sigma);
    const auto rc = classify_regime(drv.params, 2);

    double c = 0.0;
    if (cs.regime == Regime::LongRange) {
      auto est = kappa_estimate(h2, drv, {1e-2, 3e-3, 1e-3}, ctx.scaled(384),
                                ctx.opts.seed + 80, 2);
      c = est.kappa;
    } else {
      // cutoff = 1/eps: with H*(2) = 0.4 the integrand tail falls like
      // s^{-1.2} and the limit constant is approached only at the
      // functional's own horizon; shorter cutoffs understate the scale of
      // X^eps by several percent
      auto est = limit_covariance_srd(h2, h2, drv, 1.0 / eps, ctx.scaled(256),
                                      ctx.opts.seed + 81, 2, 2);
      c = std::sqrt(est.lambda);
    }

    const int R = std::max(1000, ctx.scaled(2000));
    std::vector<double> terminal(static_cast<std::size_t>(R));
    std::vector<double> tg(static_cast<std::size_t>(steps) + 1);
    for (std::size_t j = 0; j < tg.size(); ++j)
      tg[j] = static_cast<double>(j) / static_cast<double>(steps);
    parallel_for(terminal.size(), [&](std::size_t r) {
      PathGrid y = driver_path(drv, eps, 1.0, ctx.opts.seed + 82, r);
      PathGrid G = evaluate_series(h2, y, Centering::None);
      auto xv = normalized_functional(G, eps, rc, tg);
      PathGrid X = make_path(0.0, 1.0 / static_cast<double>(steps), std::move(xv));
      PathGrid x = cs.regime == Regime::LongRange ? solve_young(f, X, x0)
                                                  : solve_rough(f, lift_symmetric(X, 0.45), x0);
      terminal[r] = x.values.back();
    });

    // reference terminal law: x0 exp(c Z^{H*(2),2}_1) or the lognormal x0 exp(c W_1)
    std::vector<double> reference(static_cast<std::size_t>(std::max(1000, ctx.scaled(2000))));
    if (cs.regime == Regime::LongRange) {
      auto zp = make_params(rc.h_star, 2);
      parallel_for(reference.size(), [&](std::size_t r) {
        SimConfig sc;
        sc.dt = 1.0 / 256;
        sc.n_steps = 256;
        sc.seed = ctx.opts.seed + 83;
        sc.stream = r;
        auto Z = simulate_hermite(zp, sc, HermiteBackend::Quadrature);
        reference[r] = x0 * std::exp(c * Z.values.back());
      });
    } else {
      parallel_for(reference.size(), [&](std::size_t r) {
        Rng rng(ctx.opts.seed + 83, r);
        reference[r] = x0 * std::exp(c * rng.normal());
      });
    }

    auto wd = weak_distance(terminal, reference);
    all_ok = all_ok && wd.pass;
    det += std::string(cs.regime == Regime::LongRange ? "LRD" : "SRD") + ": c=" + fmt(c) +
           " ks=" + fmt(wd.ks) + " (crit " + fmt(wd.ks_critical) + ")";
    if (cs.regime == Regime::ShortRange) {
      // the Edgeworth floor from the residual skewness of X^eps at this eps
      const double skew = h2_skewness_quadrature(drv.kernel, cs.H, eps);
      det += " [intrinsic skew " + fmt(skew) + " -> KS floor ~" + fmt(0.0665 * skew) + "]";
    }
    det += wd.pass ? " ok; " : " FAIL; ";

    if (!ctx.opts.out_dir.empty()) {
      std::string csv = "replica,x_terminal\n";
      for (std::size_t i = 0; i < terminal.size(); ++i)
        csv += std::to_string(i) + "," + std::to_string(terminal[i]) + "\n";
      write_text_atomic(ctx.opts.out_dir,
                        std::string("homog_") + (cs.regime == Regime::LongRange ? "lrd" : "srd") +
                            "_terminal.csv",
                        csv);
    }
  }
  res.pass = all_ok;
  res.details = det;
  return res;
}

// ------------------------------------------------------------ criterion 9

CriterionResult c_determinism(const Ctx& ctx) {
  CriterionResult res;
  res.name = "determinism";
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "hml_determinism";
  fs::remove_all(base);

  // reduced-scale stand-ins for the criteria 1-8 configs, same code paths
  std::vector<std::string> configs;
  configs.push_back(R"({"kind":"decompose","seed":7,"params":{"H":0.7,"m":1},"decompose":{"k":6}})");
  configs.push_back(
      R"({"kind":"simulate","seed":7,"params":{"H":0.7,"m":2},"simulate":{"process":"hermite","n_steps":64,"dt":0.015625,"paths":3,"format":"both"}})");
  configs.push_back(
      R"({"kind":"simulate","seed":7,"params":{"H":0.8,"m":1},"kernel":{"variant":"exponential","lambda":1.0},"simulate":{"process":"hou","n_steps":256,"dt":0.05,"paths":2}})");
  configs.push_back(
      R"({"kind":"functional","seed":7,"params":{"H":0.7,"m":1},"kernel":{"variant":"exponential","lambda":1.0},"series":[{"name":"G","coefficients":[-1.0,0.0,1.0]}],"eps_ladder":[0.2,0.1,0.05,0.025],"replicas":48,"functional":{"estimate":["scaling","gaussianity"]}})");
  configs.push_back(
      R"({"kind":"homogenize","seed":7,"params":{"H":0.9,"m":1},"kernel":{"variant":"exponential","lambda":1.0},"series":[{"name":"G","coefficients":[0.0,1.0],"declared_rank":1}],"replicas":1024,"homogenize":{"eps":0.01,"solver_steps":64,"reference_replicas":1024,"kappa_ladder":[0.04,0.02,0.01]}})");

  bool all_ok = true;
  std::string det;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto cfg = parse_config(configs[i]);
    const fs::path d1 = base / ("run" + std::to_string(i) + "_t1");
    const fs::path d8 = base / ("run" + std::to_string(i) + "_t8");
    RunOverrides o1, o8;
    o1.out_dir = d1.string();
    o1.threads = 1;
    o8.out_dir = d8.string();
    o8.threads = 8;
    run_experiment(cfg, o1);
    run_experiment(cfg, o8);
    set_thread_budget(0);
    // byte-compare everything except the manifest (wall time differs)
    for (const auto& entry : fs::directory_iterator(d1)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(d8 / name, std::ios::binary);
      std::string sa((std::istreambuf_iterator<char>(a)), {});
      std::string sb((std::istreambuf_iterator<char>(b)), {});
      if (sa.empty() || sa != sb) {
        all_ok = false;
        det += "mismatch: " + cfg.kind + "/" + name + "; ";
      }
    }
  }
  if (all_ok) det = std::to_string(configs.size()) + " configs byte-identical at 1 vs 8 threads";
  fs::remove_all(base);
  res.pass = all_ok;
  res.details = det;
  return res;
}

}  // namespace

std::vector<std::string> acceptance_criteria() {
  return {"combinatorics",  "hermite_law",       "covariance_decay",
          "srd_clt",        "lrd_rosenblatt",    "mixed_independence",
          "solver_orders",  "homogenization",    "determinism"};
}

std::vector<CriterionResult> verify_suite(const AcceptanceOptions& opts) {
  using Fn = CriterionResult (*)(const Ctx&);
  const std::vector<std::pair<std::string, Fn>> registry = {
      {"combinatorics", c_combinatorics},
      {"hermite_law", c_hermite_law},
      {"covariance_decay", c_covariance_decay},
      {"srd_clt", c_srd_clt},
      {"lrd_rosenblatt", c_lrd_rosenblatt},
      {"mixed_independence", c_mixed_independence},
      {"solver_orders", c_solver_orders},
      {"homogenization", c_homogenization},
      {"determinism", c_determinism},
  };
  if (!opts.only.empty()) {
    bool known = false;
    for (const auto& [name, fn] : registry) known = known || name == opts.only;
    if (!known) throw ConfigError("verify: unknown criterion '" + opts.only + "'");
  }

  Ctx ctx{opts};
  std::vector<CriterionResult> results;
  for (const auto& [name, fn] : registry) {
    if (!opts.only.empty() && name != opts.only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r.name = name;
      r.pass = false;
      r.details = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.print)
      std::printf("%s %-18s (%7.1f s)  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                  r.details.c_str());
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace hml
