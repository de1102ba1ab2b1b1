#include "hml/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hml/parallel.hpp"
#include "hml/process_sim.hpp"
#include "hml/rng.hpp"

namespace hml {

std::vector<double> FunctionalSample::terminal() const {
  std::vector<double> out(values.size());
  const std::size_t j = T_grid.size() - 1;
  for (std::size_t r = 0; r < values.size(); ++r) out[r] = values[r][j];
  return out;
}

PathGrid evaluate_series(const PowerSeries& series, const PathGrid& path, Centering centering,
                         const CenteringContext& ctx) {
  double shift = 0.0;
  std::vector<double> proj_coeffs;  // He coefficients to subtract, by degree
  switch (centering) {
    case Centering::None:
      break;
    case Centering::Mean: {
      if (ctx.m == 1) {
        for (int k = 0; k <= series.degree(); ++k)
          shift += series.coefficients[k] * std::pow(ctx.sigma_y, k) * gaussian_moment(k);
      } else {
        if (!ctx.mc_mean)
          throw std::invalid_argument(
              "evaluate_series: mean centering for m >= 2 needs a calibration mean");
        shift = *ctx.mc_mean;
      }
      break;
    }
    case Centering::Projection: {
      if (ctx.m != 1)
        throw std::invalid_argument(
            "evaluate_series: projection centering is unsupported for m >= 2");
      const int w = ctx.projection_rank ? *ctx.projection_rank
                                        : hermite_rank(series, ctx.sigma_y);
      const auto g = hermite_coefficients(series, ctx.sigma_y);
      proj_coeffs.assign(g.begin(), g.begin() + std::min<std::size_t>(w, g.size()));
      break;
    }
  }

  PathGrid out = path;
  for (auto& v : out.values) {
    double y = series.eval(v);
    if (!proj_coeffs.empty()) {
      const double z = v / ctx.sigma_y;
      for (std::size_t d = 0; d < proj_coeffs.size(); ++d)
        if (proj_coeffs[d] != 0.0) y -= proj_coeffs[d] * hermite_poly(static_cast<int>(d), z);
    }
    v = y - shift;
  }
  out.meta = path.meta + " series_eval";
  return out;
}

std::vector<double> normalized_functional(const PathGrid& Gpath, double eps,
                                          const RegimeClassification& regime,
                                          const std::vector<double>& T_grid) {
  if (regime.regime == Regime::Boundary)
    throw std::invalid_argument("normalized_functional: boundary regime rejected");
  if (!(eps > 0.0)) throw std::invalid_argument("normalized_functional: eps must be positive");
  const double alpha = std::pow(eps, regime.scaling_exponent);
  // prefix trapezoid integrals
  std::vector<double> prefix(Gpath.values.size(), 0.0);
  for (std::size_t i = 1; i < Gpath.values.size(); ++i)
    prefix[i] = prefix[i - 1] + 0.5 * Gpath.dt * (Gpath.values[i - 1] + Gpath.values[i]);
  std::vector<double> out;
  out.reserve(T_grid.size());
  for (double T : T_grid) {
    if (T < 0.0) throw std::invalid_argument("normalized_functional: negative T");
    if (T == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const double t = T / eps;
    if (t > Gpath.t_end() + 0.5 * Gpath.dt)
      throw std::invalid_argument("normalized_functional: path does not cover T/eps");
    out.push_back(alpha * prefix[Gpath.index_of(std::min(t, Gpath.t_end()))]);
  }
  return out;
}

double driver_dt(const FunctionalDriver& drv, double eps, double T_max) {
  return std::min(drv.dt_cap, eps * T_max * drv.resolution_factor);
}

PathGrid driver_path(const FunctionalDriver& drv, double eps, double T_max, std::uint64_t seed,
                     std::uint64_t stream) {
  const double dt = driver_dt(drv, eps, T_max);
  SimConfig cfg;
  cfg.dt = dt;
  cfg.n_steps = static_cast<long>(std::ceil(T_max / (eps * dt))) + 1;
  cfg.history_truncation = drv.burn_in;
  cfg.inner_grid_refinement = drv.inner_refinement;
  cfg.seed = seed;
  cfg.stream = stream;
  VolterraOptions vopts;
  vopts.richardson = drv.richardson;
  return simulate_volterra(drv.kernel, drv.params, cfg, vopts);
}

FunctionalSample sample_functional(const PowerSeries& series, const FunctionalDriver& drv,
                                   double eps, const std::vector<double>& T_grid, int replicas,
                                   std::uint64_t seed, Centering centering,
                                   const std::string& series_id) {
  auto pair = sample_functional_pair(series, series, drv, eps, T_grid, replicas, seed, centering);
  pair.first.series_id = series_id;
  return std::move(pair.first);
}

static CenteringContext make_centering_ctx(const FunctionalDriver& drv) {
  CenteringContext ctx;
  ctx.m = drv.params.m;
  ctx.sigma_y = std::sqrt(stationary_variance(drv.kernel, drv.params.H));
  return ctx;
}

// calibration mean of G(y) for m >= 2, one long stationary run
static double calibration_mean(const PowerSeries& series, const FunctionalDriver& drv,
                               std::uint64_t seed) {
  SimConfig cfg;
  cfg.dt = drv.dt_cap;
  cfg.n_steps = 200000;
  cfg.history_truncation = drv.burn_in;
  cfg.inner_grid_refinement = drv.inner_refinement;
  cfg.seed = seed;
  cfg.stream = 0xCA11B;
  PathGrid y = simulate_volterra(drv.kernel, drv.params, cfg);
  double acc = 0.0;
  for (double v : y.values) acc += series.eval(v);
  return acc / static_cast<double>(y.values.size());
}

static int series_rank(const PowerSeries& s, const FunctionalDriver& drv, double sigma_y) {
  if (s.declared_rank) return *s.declared_rank;
  if (drv.params.m == 1) return hermite_rank(s, sigma_y);
  throw std::invalid_argument(
      "series rank: declare the chaos rank for m >= 2 or estimate it with chaos_rank first");
}

std::pair<FunctionalSample, FunctionalSample> sample_functional_pair(
    const PowerSeries& seriesA, const PowerSeries& seriesB, const FunctionalDriver& drv,
    double eps, const std::vector<double>& T_grid, int replicas, std::uint64_t seed,
    Centering centering) {
  if (replicas < 2) throw std::invalid_argument("sample_functional: need at least 2 replicas");
  if (T_grid.empty() || !std::is_sorted(T_grid.begin(), T_grid.end()) ||
      T_grid.front() < 0.0 || T_grid.back() > 1.0)
    throw std::invalid_argument("sample_functional: T grid must be sorted within [0,1]");

  CenteringContext ctx = make_centering_ctx(drv);
  if (centering == Centering::Mean && drv.params.m >= 2) {
    ctx.mc_mean = calibration_mean(seriesA, drv, seed);
  }
  CenteringContext ctxB = ctx;
  if (centering == Centering::Mean && drv.params.m >= 2) {
    ctxB.mc_mean = calibration_mean(seriesB, drv, seed + 1);
  }

  const double T_max = T_grid.back() > 0.0 ? T_grid.back() : 1.0;
  const int wA = series_rank(seriesA, drv, ctx.sigma_y);
  const int wB = series_rank(seriesB, drv, ctxB.sigma_y);

  FunctionalSample A, B;
  A.eps = B.eps = eps;
  A.T_grid = B.T_grid = T_grid;
  A.regime = classify_regime(drv.params, wA);
  B.regime = classify_regime(drv.params, wB);
  A.series_id = "A";
  B.series_id = "B";
  A.values.assign(replicas, {});
  B.values.assign(replicas, {});

  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
    PathGrid y = driver_path(drv, eps, T_max, seed, r);
    PathGrid GA = evaluate_series(seriesA, y, centering, ctx);
    A.values[r] = normalized_functional(GA, eps, A.regime, T_grid);
    PathGrid GB = evaluate_series(seriesB, y, centering, ctxB);
    B.values[r] = normalized_functional(GB, eps, B.regime, T_grid);
  });
  return {std::move(A), std::move(B)};
}

// variance of a sample plus a batch-based stderr of its log
struct VarianceWithError {
  double variance = 0.0;
  double se_log = 0.0;
};

static VarianceWithError variance_with_error(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  const std::size_t n_batches = std::min<std::size_t>(16, n / 4);
  VarianceWithError out;
  out.variance = var;
  if (n_batches >= 2) {
    std::vector<double> logs;
    const std::size_t bsz = n / n_batches;
    for (std::size_t b = 0; b < n_batches; ++b) {
      double bm = 0.0, bv = 0.0;
      for (std::size_t i = b * bsz; i < (b + 1) * bsz; ++i) bm += x[i];
      bm /= static_cast<double>(bsz);
      for (std::size_t i = b * bsz; i < (b + 1) * bsz; ++i) bv += (x[i] - bm) * (x[i] - bm);
      bv /= static_cast<double>(bsz - 1);
      if (bv > 0.0) logs.push_back(std::log(bv));
    }
    if (logs.size() >= 2) {
      double lm = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
      double lv = 0.0;
      for (double l : logs) lv += (l - lm) * (l - lm);
      lv /= static_cast<double>(logs.size() - 1);
      out.se_log = std::sqrt(lv / static_cast<double>(logs.size()));
    }
  }
  if (out.se_log == 0.0) out.se_log = std::sqrt(2.0 / static_cast<double>(n - 1));
  return out;
}

ScalingFit scaling_exponent(const PowerSeries& series, const FunctionalDriver& drv,
                            const std::vector<double>& eps_ladder, int replicas,
                            std::uint64_t seed, int rank_w) {
  if (eps_ladder.size() < 4)
    throw std::invalid_argument("scaling_exponent: ladder needs at least 4 eps values");
  if (replicas < 16) throw std::invalid_argument("scaling_exponent: too few replicas");

  ScalingFit fit;
  const RegimeClassification rc = classify_regime(drv.params, rank_w);
  fit.boundary = rc.regime == Regime::Boundary;
  fit.predicted = rc.regime == Regime::ShortRange
                      ? 1.0
                      : (2.0 * drv.params.H0 - 2.0) * static_cast<double>(rank_w) + 2.0;

  CenteringContext ctx = make_centering_ctx(drv);
  std::vector<double> ladder = eps_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());

  for (std::size_t e = 0; e < ladder.size(); ++e) {
    const double eps = ladder[e];
    std::vector<double> integrals(static_cast<std::size_t>(replicas));
    parallel_for(integrals.size(), [&](std::size_t r) {
      PathGrid y = driver_path(drv, eps, 1.0, seed, e * static_cast<std::size_t>(replicas) + r);
      PathGrid G = evaluate_series(series, y, Centering::None, ctx);
      double acc = 0.0;
      const std::size_t n = G.values.size();
      const std::size_t last = std::min(n - 1, G.index_of(std::min(1.0 / eps, G.t_end())));
      for (std::size_t i = 1; i <= last; ++i)
        acc += 0.5 * G.dt * (G.values[i - 1] + G.values[i]);
      integrals[r] = acc;
    });
    const auto ve = variance_with_error(integrals);
    SlopePoint p;
    p.eps = eps;
    p.log_inv_eps = std::log(1.0 / eps);
    p.log_variance = std::log(ve.variance);
    p.se_log_variance = ve.se_log;
    fit.points.push_back(p);
  }

  // weighted least squares for the slope
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const auto& p : fit.points) {
    const double w = 1.0 / (p.se_log_variance * p.se_log_variance);
    sw += w;
    swx += w * p.log_inv_eps;
    swy += w * p.log_variance;
    swxx += w * p.log_inv_eps * p.log_inv_eps;
    swxy += w * p.log_inv_eps * p.log_variance;
  }
  const double det = sw * swxx - swx * swx;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.stderr_slope = std::sqrt(sw / det);
  return fit;
}

CovarianceEstimate limit_covariance_srd(const PowerSeries& seriesA, const PowerSeries& seriesB,
                                        const FunctionalDriver& drv, double lag_cutoff,
                                        int replicas, std::uint64_t seed, int rank_a, int rank_b) {
  if (classify_regime(drv.params, rank_a).regime != Regime::ShortRange ||
      classify_regime(drv.params, rank_b).regime != Regime::ShortRange)
    throw std::invalid_argument(
        "limit_covariance_srd: both series must be short-range dependent");
  if (!(lag_cutoff > 1.0)) throw std::invalid_argument("limit_covariance_srd: cutoff too small");

  const double dt = drv.dt_cap;
  const double T_run = std::max(100.0, 8.0 * lag_cutoff);
  const auto n_lags = static_cast<std::size_t>(lag_cutoff / dt);
  CenteringContext ctx = make_centering_ctx(drv);

  // two passes: store the evaluated paths, then center by the ensemble grand
  // mean. Per-replica time means are badly biased for slowly decaying
  // covariances; the ensemble mean has O(1/(R T)) bias only.
  std::vector<std::vector<double>> pathsA(static_cast<std::size_t>(replicas));
  std::vector<std::vector<double>> pathsB(static_cast<std::size_t>(replicas));
  parallel_for(pathsA.size(), [&](std::size_t r) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.n_steps = static_cast<long>(T_run / dt);
    cfg.history_truncation = drv.burn_in;
    cfg.inner_grid_refinement = drv.inner_refinement;
    cfg.seed = seed;
    cfg.stream = r;
    VolterraOptions vopts;
    vopts.richardson = drv.richardson;
    PathGrid y = simulate_volterra(drv.kernel, drv.params, cfg, vopts);
    pathsA[r] = evaluate_series(seriesA, y, Centering::None, ctx).values;
    pathsB[r] = evaluate_series(seriesB, y, Centering::None, ctx).values;
  });
  double meanA = 0.0, meanB = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < pathsA.size(); ++r) {
    for (double v : pathsA[r]) meanA += v;
    for (double v : pathsB[r]) meanB += v;
    count += pathsA[r].size();
  }
  meanA /= static_cast<double>(count);
  meanB /= static_cast<double>(count);

  std::vector<std::vector<double>> per_replica(static_cast<std::size_t>(replicas));
  parallel_for(per_replica.size(), [&](std::size_t r) {
    const auto& A = pathsA[r];
    const auto& B = pathsB[r];
    const std::size_t n = A.size();
    std::vector<double> cov(n_lags + 1, 0.0);
    for (std::size_t l = 0; l <= n_lags; ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i + l < n; ++i)
        acc += (A[i + l] - meanA) * (B[i] - meanB) + (B[i + l] - meanB) * (A[i] - meanA);
      cov[l] = 0.5 * acc / static_cast<double>(n - l);
    }
    per_replica[r] = std::move(cov);
  });

  CovarianceEstimate est;
  est.lag_grid.resize(n_lags + 1);
  est.covariances.assign(n_lags + 1, 0.0);
  est.covariance_se.assign(n_lags + 1, 0.0);
  for (std::size_t l = 0; l <= n_lags; ++l) {
    est.lag_grid[l] = static_cast<double>(l) * dt;
    double m = 0.0;
    for (const auto& c : per_replica) m += c[l];
    m /= static_cast<double>(replicas);
    double v = 0.0;
    for (const auto& c : per_replica) v += (c[l] - m) * (c[l] - m);
    v /= static_cast<double>(replicas - 1);
    est.covariances[l] = m;
    est.covariance_se[l] = std::sqrt(v / static_cast<double>(replicas));
  }
  double lam = 0.0, lam_var = 0.0;
  for (std::size_t l = 0; l + 1 <= n_lags; ++l) {
    lam += dt * (est.covariances[l] + est.covariances[l + 1]);  // x2 folded in
    lam_var += dt * dt * (est.covariance_se[l] * est.covariance_se[l] +
                          est.covariance_se[l + 1] * est.covariance_se[l + 1]);
  }
  est.lambda = lam;
  // tail budget from the certified decay beyond the cutoff; the constant is
  // fitted on the last fifth of the lag window to damp endpoint noise
  const int d = std::max(rank_a, rank_b);
  const double expo = (2.0 * drv.params.H0 - 2.0) * static_cast<double>(d);
  double c_tail = 0.0;
  std::size_t n_tail = 0;
  for (std::size_t l = (4 * n_lags) / 5; l <= n_lags; ++l) {
    c_tail += est.covariances[l] * std::pow(est.lag_grid[l], -expo);
    ++n_tail;
  }
  c_tail = std::abs(c_tail) / static_cast<double>(n_tail);
  est.tail_bound = 2.0 * c_tail * std::pow(lag_cutoff, expo + 1.0) / (-expo - 1.0);
  est.stderr_lambda = std::sqrt(lam_var) + est.tail_bound;
  return est;
}

KappaEstimate kappa_estimate(const PowerSeries& series, const FunctionalDriver& drv,
                             const std::vector<double>& eps_ladder, int replicas,
                             std::uint64_t seed, int rank_w) {
  if (classify_regime(drv.params, rank_w).regime != Regime::LongRange)
    throw std::invalid_argument("kappa_estimate: series must be long-range dependent");
  if (eps_ladder.size() < 2)
    throw std::invalid_argument("kappa_estimate: ladder needs at least 2 eps values");

  std::vector<double> ladder = eps_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  const RegimeClassification rc = classify_regime(drv.params, rank_w);
  CenteringContext ctx = make_centering_ctx(drv);

  KappaEstimate est;
  for (std::size_t e = 0; e < ladder.size(); ++e) {
    const double eps = ladder[e];
    std::vector<double> vals(static_cast<std::size_t>(replicas));
    parallel_for(vals.size(), [&](std::size_t r) {
      PathGrid y = driver_path(drv, eps, 1.0, seed, e * static_cast<std::size_t>(replicas) + r);
      PathGrid G = evaluate_series(series, y, Centering::None, ctx);
      vals[r] = normalized_functional(G, eps, rc, {1.0})[0];
    });
    double m2 = 0.0;
    for (double v : vals) m2 += v * v;
    m2 /= static_cast<double>(vals.size());
    double v4 = 0.0;
    for (double v : vals) v4 += (v * v - m2) * (v * v - m2);
    v4 /= static_cast<double>(vals.size() - 1);
    const double se_m2 = std::sqrt(v4 / static_cast<double>(vals.size()));
    est.per_eps.push_back(std::sqrt(m2));
    est.per_eps_se.push_back(0.5 * se_m2 / std::sqrt(m2));
  }
  const std::size_t n = est.per_eps.size();
  const double k1 = est.per_eps[n - 1], k2 = est.per_eps[n - 2];
  est.kappa = 0.5 * (k1 + k2);
  const double gap = 0.5 * std::abs(k1 - k2);
  const double se = 0.5 * std::hypot(est.per_eps_se[n - 1], est.per_eps_se[n - 2]);
  est.stderr_kappa = std::hypot(gap, se);
  return est;
}

}  // namespace hml
