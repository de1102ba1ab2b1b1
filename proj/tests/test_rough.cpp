#include <cmath>

#include "doctest.h"
#include "hml/diagnostics.hpp"
#include "hml/process_sim.hpp"
#include "hml/rough.hpp"

using namespace hml;

namespace {

PathGrid smooth_path(double T, std::size_t n) {
  std::vector<double> v(n + 1);
  const double dt = T / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) v[i] = dt * static_cast<double>(i);
  return make_path(0.0, dt, std::move(v));
}

}  // namespace

TEST_CASE("symmetric lift: squares and Chen relation") {
  auto X = smooth_path(1.0, 100);  // X_t = t
  auto d = lift_symmetric(X);
  CHECK(d.second_level(20, 60) == doctest::Approx(std::pow(0.4, 2) / 2.0));

  std::vector<double> flat(40, 1.7);
  auto dz = lift_symmetric(make_path(0.0, 0.1, flat));
  CHECK(dz.second_level(3, 30) == 0.0);

  // random path: Chen residual at machine precision on all adjacent triples
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.n_steps = 300;
  cfg.seed = 8;
  auto W = simulate_fbm(0.7, cfg);
  auto dw = lift_symmetric(W);
  double worst = 0.0;
  for (std::size_t i = 0; i + 2 < W.values.size(); ++i) {
    const std::size_t s = i, t = i + 1, u = i + 2;
    const double resid = dw.second_level(s, u) - dw.second_level(s, t) - dw.second_level(t, u) -
                         dw.increment(s, t) * dw.increment(t, u);
    worst = std::max(worst, std::abs(resid));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("vector fields: derivatives and taper smoothness") {
  auto lin = VectorField::linear(2.0);
  CHECK(lin(3.0) == doctest::Approx(6.0));
  CHECK(lin.deriv(3.0) == doctest::Approx(2.0));
  CHECK(lin.deriv2(3.0) == 0.0);

  auto sn = VectorField::sine(1.5, 2.0);
  const double x = 0.37;
  const double h = 1e-6;
  CHECK(sn.deriv(x) == doctest::Approx((sn(x + h) - sn(x - h)) / (2 * h)).epsilon(1e-6));
  CHECK(sn.deriv2(x) == doctest::Approx((sn(x + h) - 2 * sn(x) + sn(x - h)) / (h * h)).epsilon(1e-3));

  auto cp = VectorField::compact_polynomial({0.0, 1.0, 0.5}, 2.0, 1.0);
  CHECK(cp(1.0) == doctest::Approx(1.5));
  CHECK(cp(3.5) == 0.0);                       // beyond radius + taper
  CHECK(std::abs(cp(2.999)) < 1e-4);           // taper nearly closed
  for (double xx : {1.9, 2.3, 2.9}) {          // taper region: analytic = numeric
    CHECK(cp.deriv(xx) == doctest::Approx((cp(xx + h) - cp(xx - h)) / (2 * h)).epsilon(1e-4));
  }
}

TEST_CASE("solve_young: exactness and order") {
  auto f0 = VectorField::linear(0.0);
  auto X = smooth_path(1.0, 128);
  auto sol = solve_young(f0, X, 3.25);
  for (double v : sol.values) CHECK(v == 3.25);

  // dx = x dX with X_t = t: x_t = e^t, Euler error O(dt)
  auto f = VectorField::linear(1.0);
  std::vector<double> errs;
  for (std::size_t n : {64, 128, 256, 512, 1024}) {
    auto sn = solve_young(f, smooth_path(1.0, n), 1.0);
    errs.push_back(std::abs(sn.values.back() - std::exp(1.0)));
  }
  // fitted order: log2(err_i / err_{i+1}) ~ 1
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order == doctest::Approx(1.0).epsilon(0.3));
  }

  // fBm driver, linear f: exact Young solution x = x0 exp(X_t)
  SimConfig cfg;
  cfg.dt = 1.0 / 4096;
  cfg.n_steps = 4096;
  cfg.seed = 13;
  auto W = simulate_fbm(0.8, cfg);
  auto sw = solve_young(f, W, 1.0);
  CHECK(sw.values.back() == doctest::Approx(std::exp(W.values.back())).epsilon(0.02));
}

TEST_CASE("solve_rough: exactness and second order") {
  auto f = VectorField::linear(1.0);
  auto f0 = VectorField::linear(0.0);
  auto d0 = lift_symmetric(smooth_path(1.0, 64), 0.5);
  auto c0 = solve_rough(f0, d0, -1.5);
  for (double v : c0.values) CHECK(v == -1.5);

  std::vector<double> errs;
  for (std::size_t n : {32, 64, 128, 256}) {
    auto d = lift_symmetric(smooth_path(1.0, n), 0.5);
    auto sol = solve_rough(f, d, 1.0);
    errs.push_back(std::abs(sol.values.back() - std::exp(1.0)));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.2));
  }
  CHECK_THROWS_AS(solve_rough(f, lift_symmetric(smooth_path(1.0, 64), 0.9), 1.0),
                  std::invalid_argument);
}

TEST_CASE("flow property and monotone sanity") {
  auto f = VectorField::sine(1.0, 1.0);
  SimConfig cfg;
  cfg.dt = 1.0 / 2048;
  cfg.n_steps = 2048;
  cfg.seed = 19;
  auto W = simulate_fbm(0.8, cfg);
  auto full = solve_young(f, W, 0.4);

  // restart at the midpoint state
  const std::size_t half = 1024;
  std::vector<double> tail_vals(W.values.begin() + half, W.values.end());
  auto W2 = make_path(0.5, W.dt, std::move(tail_vals));
  auto second = solve_young(f, W2, full.values[half]);
  CHECK(second.values.back() == doctest::Approx(full.values.back()).epsilon(1e-10));

  // increasing driver + positive field => nondecreasing solution
  auto inc = smooth_path(1.0, 256);
  auto pos = VectorField::sine(1.0, 1.0);  // sin > 0 on (0, pi); start at 1
  auto mono = solve_young(pos, inc, 1.0);
  for (std::size_t i = 0; i + 1 < mono.values.size(); ++i)
    CHECK(mono.values[i + 1] >= mono.values[i] - 1e-15);
}

TEST_CASE("continuity of the solution map in the driver") {
  auto f = VectorField::sine(1.2, 1.0);
  SimConfig cfg;
  cfg.dt = 1.0 / 512;
  cfg.n_steps = 512;
  cfg.seed = 4;
  auto W = simulate_fbm(0.8, cfg);
  auto base = solve_young(f, W, 0.3);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    auto Wp = W;
    for (std::size_t i = 0; i < Wp.values.size(); ++i)
      Wp.values[i] += delta * std::sin(3.0 * Wp.time_at(i));
    auto sol = solve_young(f, Wp, 0.3);
    const double gap = std::abs(sol.values.back() - base.values.back());
    CHECK(gap < 10.0 * delta);  // O(delta) empirically
    CHECK(gap < prev_gap + 1e-15);
    prev_gap = gap;
  }
}

TEST_CASE("limit SDE reference laws") {
  auto f = VectorField::linear(1.0);
  SimConfig cfg;
  cfg.dt = 1.0 / 256;
  cfg.n_steps = 256;
  cfg.seed = 5;

  // c = 0: frozen at x0
  LimitSde strat;
  strat.type = LimitSde::Type::StratonovichWiener;
  auto frozen = simulate_limit_sde(f, 0.0, strat, cfg, 2.0);
  for (double v : frozen.values) CHECK(v == 2.0);

  // linear f + Stratonovich Wiener: terminal law is x0 exp(c W_1), lognormal
  const double c = 0.8;
  const int R = 4000;
  std::vector<double> term(R), logs(R);
  for (int r = 0; r < R; ++r) {
    SimConfig c2 = cfg;
    c2.stream = static_cast<std::uint64_t>(r);
    auto x = simulate_limit_sde(f, c, strat, c2, 1.0);
    term[static_cast<std::size_t>(r)] = x.values.back();
    logs[static_cast<std::size_t>(r)] = std::log(x.values.back());
  }
  auto ms = moment_stats(logs);
  CHECK(ms.mean == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
  CHECK(ms.variance == doctest::Approx(c * c).epsilon(0.08));
  auto ks = ks_fitted_normal(logs);
  CHECK_FALSE(ks.reject);

  // linear f + Young Hermite driver: x0 exp(c Z_1), Z_1 the rank-w marginal
  LimitSde young;
  young.type = LimitSde::Type::YoungHermite;
  young.params = make_params(0.8, 2);
  std::vector<double> zlogs(1024);
  for (int r = 0; r < 1024; ++r) {
    SimConfig c2 = cfg;
    c2.stream = static_cast<std::uint64_t>(r);
    auto x = simulate_limit_sde(f, 0.5, young, c2, 1.0);
    zlogs[static_cast<std::size_t>(r)] = std::log(x.values.back());
  }
  auto zs = moment_stats(zlogs);
  // log x_1 = 0.5 Z_1 up to scheme error: variance 0.25, skewed (Rosenblatt)
  CHECK(zs.mean == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
  CHECK(zs.variance == doctest::Approx(0.25).epsilon(0.25));
  CHECK(zs.skewness > 0.5);
}

TEST_CASE("step halving error reporting") {
  auto f = VectorField::linear(1.0);
  auto X = smooth_path(1.0, 64);
  SolveOptions opts;
  opts.step_tolerance = 1e-12;  // unreachable for this grid
  CHECK_THROWS_AS(solve_young(f, X, 1.0, opts), std::runtime_error);
  opts.step_tolerance = 1.0;
  CHECK_NOTHROW(solve_young(f, X, 1.0, opts));
}
