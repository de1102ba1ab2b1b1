#include "hml/process_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "hml/fft.hpp"
#include "hml/parallel.hpp"
#include "hml/power_series.hpp"
#include "hml/rng.hpp"

namespace hml {

namespace detail {

// fGn autocovariance at integer lag j for unit-variance-at-lag-dt increments
static double fgn_cov(double H, double dt, double j) {
  const double a = std::pow(std::abs(j + 1.0), 2.0 * H);
  const double b = std::pow(std::abs(j), 2.0 * H);
  const double c = std::pow(std::abs(j - 1.0), 2.0 * H);
  return 0.5 * std::pow(dt, 2.0 * H) * (a - 2.0 * b + c);
}

const std::vector<double>& fgn_embedding_eigenvalues(double H, double dt, std::size_t M) {
  struct Key {
    double H, dt;
    std::size_t M;
    bool operator<(const Key& o) const {
      return std::tie(H, dt, M) < std::tie(o.H, o.dt, o.M);
    }
  };
  static std::map<Key, std::vector<double>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto [it, inserted] = cache.try_emplace(Key{H, dt, M});
  if (inserted) {
    std::vector<std::complex<double>> c(M);
    for (std::size_t j = 0; j <= M / 2; ++j) c[j] = fgn_cov(H, dt, static_cast<double>(j));
    for (std::size_t j = M / 2 + 1; j < M; ++j) c[j] = c[M - j];
    fft(c, false);
    std::vector<double> lam(M);
    double lam_max = 0.0, lam_min = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      lam[j] = c[j].real();
      lam_max = std::max(lam_max, lam[j]);
      lam_min = std::min(lam_min, lam[j]);
    }
    if (lam_min < -1e-8 * lam_max)
      throw std::runtime_error("fgn embedding: circulant not positive semidefinite");
    for (auto& l : lam) l = std::max(l, 0.0);
    it->second = std::move(lam);
  }
  return it->second;
}

std::vector<double> sample_fgn(double H, double dt, std::size_t n, Rng& rng) {
  const std::size_t M = next_pow2(2 * n);
  const auto& lam = fgn_embedding_eigenvalues(H, dt, M);
  std::vector<std::complex<double>> v(M);
  v[0] = std::sqrt(lam[0]) * rng.normal();
  v[M / 2] = std::sqrt(lam[M / 2]) * rng.normal();
  for (std::size_t k = 1; k < M / 2; ++k) {
    const double s = std::sqrt(0.5 * lam[k]);
    const double a = rng.normal(), b = rng.normal();
    v[k] = std::complex<double>(s * a, s * b);
    v[M - k] = std::conj(v[k]);
  }
  fft(v, false);
  const double norm = 1.0 / std::sqrt(static_cast<double>(M));
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = v[j].real() * norm;
  return out;
}

std::shared_ptr<const Rank2Scheme> rank2_scheme(const HurstParams& params, double dt,
                                                long n_steps, int s_refine) {
  struct Key {
    double H, dt;
    long n;
    int m, ref;
    bool operator<(const Key& o) const {
      return std::tie(H, dt, n, m, ref) < std::tie(o.H, o.dt, o.n, o.m, o.ref);
    }
  };
  static std::map<Key, std::shared_ptr<const Rank2Scheme>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto [it, inserted] = cache.try_emplace(Key{params.H, dt, n_steps, params.m, s_refine});
  if (!inserted) return it->second;

  auto sch = std::make_shared<Rank2Scheme>();
  sch->params = params;
  sch->dt = dt;
  sch->n_steps = n_steps;
  sch->s_refine = s_refine;

  const double H0 = params.H0;
  const double T = dt * static_cast<double>(n_steps);

  // Wiener cells: uniform width dt on [-B, T], then geometrically widening
  // down to -L. L is chosen so the neglected kernel mass keeps the variance
  // deficit below tail_tol; the exponent 2H0-2 makes L astronomically large
  // near H0 = 1, which geometric widening absorbs at log cost.
  const double tail_tol = 1e-3;
  const double B = std::max(8.0, 4.0 * T);
  const double g = 0.03;
  double L = std::pow((2.0 - 2.0 * H0) * tail_tol / 2.0, 1.0 / (2.0 * H0 - 2.0));
  L = std::max(L, 4.0 * B);
  sch->history = L;
  sch->tail_deficit_bound = tail_tol;

  std::vector<double> lo;  // cell left edges, ascending
  {
    std::vector<double> rev;  // built right-to-left from -B
    double edge = -B;
    double w = dt;
    while (edge > -L) {
      rev.push_back(edge - w);
      edge -= w;
      w *= (1.0 + g);
    }
    for (auto r = rev.rbegin(); r != rev.rend(); ++r) lo.push_back(*r);
    const auto n_uniform = static_cast<std::size_t>(std::llround((T + B) / dt));
    for (std::size_t i = 0; i < n_uniform; ++i) lo.push_back(-B + dt * static_cast<double>(i));
  }
  const std::size_t n_cells = lo.size();
  sch->n_cells = n_cells;
  sch->cell_w.resize(n_cells);
  for (std::size_t i = 0; i + 1 < n_cells; ++i) sch->cell_w[i] = lo[i + 1] - lo[i];
  sch->cell_w[n_cells - 1] = dt;  // last cell ends at T

  const std::size_t n_s = static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(s_refine);
  sch->n_s = n_s;
  sch->q.assign(n_s * n_cells, 0.0);
  const double hs = dt / static_cast<double>(s_refine);
  const double ap1 = H0 - 0.5;  // exponent of the cell-integrated kernel
  for (std::size_t si = 0; si < n_s; ++si) {
    const double s = (static_cast<double>(si) + 0.5) * hs;
    double* row = &sch->q[si * n_cells];
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double dlo = s - lo[i];
      if (dlo <= 0.0) break;  // cells are ascending; later ones are all right of s
      const double dhi = dlo - sch->cell_w[i];
      const double upper = std::pow(dlo, ap1);
      const double lower = dhi > 0.0 ? std::pow(dhi, ap1) : 0.0;
      row[i] = (upper - lower) / (ap1 * sch->cell_w[i]);
    }
  }

  // Exact variance of the discretized chaos sum at t = T:
  // Var = K^2 2 (hs^2 sum_{s,s'} G(s,s')^2 - sum_i A_ii^2 w_i^2),
  // G(s,s') = sum_i w_i q_s(i) q_s'(i), A_ii = hs sum_s q_s(i)^2.
  // The ratio against T^{2H} measures the quadrature deficit; every sample is
  // rescaled so the discrete model has the defining unit-variance property.
  {
    std::vector<double> row_acc(n_s, 0.0);
    parallel_for(n_s, [&](std::size_t a) {
      const double* qa = &sch->q[a * n_cells];
      double acc = 0.0;
      for (std::size_t b = 0; b <= a; ++b) {
        const double* qb = &sch->q[b * n_cells];
        double g = 0.0;
        for (std::size_t i = 0; i < n_cells; ++i) g += sch->cell_w[i] * qa[i] * qb[i];
        acc += (b == a ? 1.0 : 2.0) * g * g;
      }
      row_acc[a] = acc;
    });
    double frob = 0.0;
    for (double v : row_acc) frob += v;
    double diag = 0.0;
    for (std::size_t i = 0; i < n_cells; ++i) {
      double aii = 0.0;
      for (std::size_t si = 0; si < n_s; ++si) {
        const double qv = sch->q[si * n_cells + i];
        aii += qv * qv;
      }
      aii *= hs;
      diag += aii * aii * sch->cell_w[i] * sch->cell_w[i];
    }
    const double var_disc = params.K * params.K * 2.0 * (hs * hs * frob - diag);
    sch->raw_variance_ratio = var_disc / std::pow(T, 2.0 * params.H);
    sch->norm_factor = 1.0 / std::sqrt(sch->raw_variance_ratio);
  }
  it->second = sch;
  return sch;
}

// off-diagonal second-chaos sum over the precomputed scheme
static PathGrid rank2_sample(const Rank2Scheme& sch, const SimConfig& cfg, double t0) {
  Rng rng(cfg.seed, cfg.stream);
  const std::size_t n_cells = sch.n_cells;
  std::vector<double> db(n_cells), db2(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    db[i] = rng.normal() * std::sqrt(sch.cell_w[i]);
    db2[i] = db[i] * db[i];
  }
  std::vector<double> values(static_cast<std::size_t>(sch.n_steps) + 1, 0.0);
  const double hs = sch.dt / static_cast<double>(sch.s_refine);
  double acc = 0.0;
  for (long step = 0; step < sch.n_steps; ++step) {
    for (int r = 0; r < sch.s_refine; ++r) {
      const std::size_t si = static_cast<std::size_t>(step) * sch.s_refine + r;
      const double* row = &sch.q[si * n_cells];
      double u = 0.0, v = 0.0;
      for (std::size_t i = 0; i < n_cells; ++i) {
        u += row[i] * db[i];
        v += row[i] * row[i] * db2[i];
      }
      acc += (u * u - v) * hs;
    }
    values[static_cast<std::size_t>(step) + 1] = sch.params.K * sch.norm_factor * acc;
  }
  std::ostringstream meta;
  meta << "method=rank2_quadrature seed=" << cfg.seed << " stream=" << cfg.stream
       << " history=" << sch.history << " s_refine=" << sch.s_refine
       << " tail_deficit<=" << sch.tail_deficit_bound
       << " raw_variance_ratio=" << sch.raw_variance_ratio;
  return make_path(t0, sch.dt, std::move(values), meta.str());
}

// normalized partial sums of He_m over a long-range Gaussian sequence
static PathGrid rank_sum_sample(const HurstParams& params, const SimConfig& cfg, double t0) {
  const int ref = std::max(1, cfg.inner_grid_refinement);
  const std::size_t N = static_cast<std::size_t>(cfg.n_steps) * static_cast<std::size_t>(ref);
  Rng rng(cfg.seed, cfg.stream);
  // unit-variance fGn with Hurst H0 (dt = 1 internally; scaling fixed below)
  auto xi = sample_fgn(params.H0, 1.0, N, rng);
  std::vector<double> s(N + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i) s[i + 1] = s[i] + hermite_poly(params.m, xi[i]);
  // exact finite-n normalization: Var(S_N) = m! sum_{|l|<N} (N-|l|) rho(l)^m
  double fac = 1.0;
  for (int j = 2; j <= params.m; ++j) fac *= j;
  double var = static_cast<double>(N);  // l = 0 term, rho(0)=1
  for (std::size_t l = 1; l < N; ++l) {
    const double rho = fgn_cov(params.H0, 1.0, static_cast<double>(l));
    var += 2.0 * static_cast<double>(N - l) * std::pow(rho, params.m);
  }
  var *= fac;
  const double T = cfg.dt * static_cast<double>(cfg.n_steps);
  const double scale = std::pow(T, params.H) / std::sqrt(var);
  std::vector<double> values(static_cast<std::size_t>(cfg.n_steps) + 1);
  for (long j = 0; j <= cfg.n_steps; ++j)
    values[static_cast<std::size_t>(j)] = scale * s[static_cast<std::size_t>(j) * ref];
  std::ostringstream meta;
  meta << "method=rank_sum seed=" << cfg.seed << " stream=" << cfg.stream
       << " inner_n=" << N;
  return make_path(t0, cfg.dt, std::move(values), meta.str());
}

}  // namespace detail

static void check_cfg(const SimConfig& cfg) {
  if (cfg.n_steps < 1) throw std::invalid_argument("SimConfig: n_steps must be >= 1");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (cfg.inner_grid_refinement < 0) throw std::invalid_argument("SimConfig: refinement < 0");
}

PathGrid simulate_fbm(double H, const SimConfig& cfg, double t0) {
  if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("simulate_fbm: H must lie in (1/2,1)");
  check_cfg(cfg);
  Rng rng(cfg.seed, cfg.stream);
  const auto n = static_cast<std::size_t>(cfg.n_steps);
  auto fgn = detail::sample_fgn(H, cfg.dt, n, rng);
  std::vector<double> values(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) values[i + 1] = values[i] + fgn[i];
  std::ostringstream meta;
  meta << "method=circulant_fgn seed=" << cfg.seed << " stream=" << cfg.stream << " H=" << H;
  return make_path(t0, cfg.dt, std::move(values), meta.str());
}

PathGrid simulate_hermite(const HurstParams& params, const SimConfig& cfg, HermiteBackend backend,
                          double t0) {
  check_cfg(cfg);
  if (backend == HermiteBackend::Auto) {
    if (params.m == 1) return simulate_fbm(params.H, cfg, t0);
    backend = params.m == 2 ? HermiteBackend::Quadrature : HermiteBackend::RankSum;
  }
  if (backend == HermiteBackend::Quadrature) {
    if (params.m == 1) return simulate_fbm(params.H, cfg, t0);
    if (params.m > 2)
      throw std::invalid_argument(
          "simulate_hermite: quadrature backend rejected for m > 2 (cost grows as N^m)");
    const int s_refine = std::max(2, cfg.inner_grid_refinement);
    auto sch = detail::rank2_scheme(params, cfg.dt, cfg.n_steps, s_refine);
    return detail::rank2_sample(*sch, cfg, t0);
  }
  if (params.m == 1) return simulate_fbm(params.H, cfg, t0);
  return detail::rank_sum_sample(params, cfg, t0);
}

PathGrid volterra_on_path(const PathGrid& Z, const KernelSpec& kernel, double burn_in,
                          long out_stride, const VolterraOptions& opts) {
  if (out_stride < 1) throw std::invalid_argument("volterra_on_path: stride must be >= 1");
  const std::size_t nz = Z.values.size();
  if (nz < 3) throw std::invalid_argument("volterra_on_path: driver too short");
  const double h = Z.dt;
  std::vector<double> dz(nz - 1);
  for (std::size_t i = 0; i + 1 < nz; ++i) dz[i] = Z.values[i + 1] - Z.values[i];

  auto left_point = [&](double step) {
    const std::size_t stride = static_cast<std::size_t>(std::llround(step / h));
    const double support = std::min(kernel.support_end(), Z.t_end() - Z.t0);
    const std::size_t K = static_cast<std::size_t>(support / step) + 1;
    std::vector<double> xs(K + 1, 0.0);
    for (std::size_t l = 1; l <= K; ++l) xs[l] = kernel.eval(static_cast<double>(l) * step);
    std::vector<double> dzc;
    if (stride == 1) {
      dzc = dz;
    } else {
      dzc.assign(dz.size() / stride, 0.0);
      for (std::size_t i = 0; i < dzc.size(); ++i)
        for (std::size_t r = 0; r < stride; ++r) dzc[i] += dz[i * stride + r];
    }
    auto conv = fft_convolve(xs, dzc);
    conv.resize(dzc.size() + 1);
    return std::pair<std::vector<double>, std::size_t>(std::move(conv), dzc.size());
  };

  // with xs[0] = 0 the convolution at index i is sum_{l>=1} xs[l] dz[i-l],
  // the left-point Young-Stieltjes sum for grid point i (dZ carries the measure)
  auto [y_fine, n_fine] = left_point(h);
  std::vector<double> y(y_fine.begin(), y_fine.begin() + static_cast<long>(n_fine) + 1);
  if (opts.richardson) {
    auto [y_c, n_c] = left_point(2.0 * h);
    // extrapolate with the coarse grid, interpolating the correction between
    // coarse-aligned points
    std::vector<double> corr(n_fine + 1, 0.0);
    for (std::size_t j = 0; j <= n_c && 2 * j <= n_fine; ++j)
      corr[2 * j] = y[2 * j] - y_c[j];
    for (std::size_t i = 1; i < n_fine; i += 2)
      corr[i] = 0.5 * (corr[i - 1] + (i + 1 <= n_fine ? corr[i + 1] : corr[i - 1]));
    for (std::size_t i = 0; i <= n_fine; ++i) y[i] += corr[i];
  }

  const auto skip = static_cast<std::size_t>(std::llround(burn_in / h));
  if (skip + 2 > y.size())
    throw std::invalid_argument("volterra_on_path: burn-in longer than the driver span");
  std::vector<double> out;
  for (std::size_t i = skip; i < y.size(); i += static_cast<std::size_t>(out_stride))
    out.push_back(y[i]);
  if (out.size() < 2) throw std::invalid_argument("volterra_on_path: too few output points");
  return make_path(0.0, h * static_cast<double>(out_stride), std::move(out),
                   "method=volterra " + Z.meta);
}

PathGrid simulate_volterra(const KernelSpec& kernel, const HurstParams& params,
                           const SimConfig& cfg, const VolterraOptions& opts) {
  check_cfg(cfg);
  if (!(kernel.l1_norm() > 0.0))
    throw std::invalid_argument("simulate_volterra: degenerate kernel (zero L1 mass)");
  const double eff = kernel.effective_support();
  if (cfg.history_truncation < 5.0 * eff)
    throw std::invalid_argument("simulate_volterra: history truncation below 5x the kernel support (" +
                                std::to_string(5.0 * eff) + ")");
  const int ref = std::max(1, cfg.inner_grid_refinement);
  const double h = cfg.dt / static_cast<double>(ref);
  const double T = cfg.dt * static_cast<double>(cfg.n_steps);
  SimConfig zc = cfg;
  zc.dt = h;
  zc.n_steps = static_cast<long>(std::llround((T + cfg.history_truncation) / h));
  PathGrid Z = simulate_hermite(params, zc, HermiteBackend::Auto, -cfg.history_truncation);
  return volterra_on_path(Z, kernel, cfg.history_truncation, ref, opts);
}

PathGrid hou_on_path(const PathGrid& Z, double lambda, double sigma, double y0, long out_stride) {
  if (!(lambda > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("hou_on_path: lambda and sigma must be positive");
  if (out_stride < 1) throw std::invalid_argument("hou_on_path: stride must be >= 1");
  const double h = Z.dt;
  const double step = h * static_cast<double>(out_stride);
  const std::size_t n_out = (Z.values.size() - 1) / static_cast<std::size_t>(out_stride);
  std::vector<double> y(n_out + 1);
  y[0] = y0;
  const double decay = std::exp(-lambda * step);
  for (std::size_t n = 0; n < n_out; ++n) {
    // Young increment of int e^{-lambda (t_{n+1}-s)} dZ_s, left-point on the fine grid
    double force = 0.0;
    const std::size_t base = n * static_cast<std::size_t>(out_stride);
    for (std::size_t i = 0; i < static_cast<std::size_t>(out_stride); ++i) {
      const double s = static_cast<double>(i) * h;  // offset within the step
      force += std::exp(-lambda * (step - s)) * (Z.values[base + i + 1] - Z.values[base + i]);
    }
    y[n + 1] = decay * y[n] + sigma * force;
  }
  return make_path(Z.t0, step, std::move(y), "method=hou " + Z.meta);
}

double volterra_discrete_variance(const KernelSpec& kernel, double H, double dt, int refinement,
                                  bool richardson) {
  if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("volterra_discrete_variance: H in (1/2,1)");
  const int ref = std::max(1, refinement);
  const double h = dt / static_cast<double>(ref);
  const auto K = static_cast<std::size_t>(kernel.support_end() / h);
  // effective weights of the output value on the fine Wiener increments,
  // lag q >= 1 in fine steps; Richardson extrapolation at an even-parity
  // output point replaces x(qh) by 2x(qh) - x_coarse(ceil(q/2) 2h)
  std::vector<double> w(K + 1, 0.0);
  for (std::size_t q = 1; q <= K; ++q) {
    const double fine = kernel.eval(static_cast<double>(q) * h);
    if (!richardson) {
      w[q] = fine;
    } else {
      const std::size_t qc = q + (q & 1U);
      w[q] = 2.0 * fine - kernel.eval(static_cast<double>(qc) * h);
    }
  }
  // gamma(l) of the driver increments at step h; depends on H only
  std::vector<double> corr(K + 1, 0.0);  // sum_q w_q w_{q+l}
  for (std::size_t l = 0; l <= K; ++l) {
    double acc = 0.0;
    for (std::size_t q = 1; q + l <= K; ++q) acc += w[q] * w[q + l];
    corr[l] = acc;
  }
  double var = 0.0;
  for (std::size_t l = 0; l <= K; ++l) {
    const double fl = static_cast<double>(l);
    const double g = 0.5 * std::pow(h, 2.0 * H) *
                     (std::pow(fl + 1.0, 2.0 * H) - 2.0 * std::pow(fl, 2.0 * H) +
                      std::pow(std::abs(fl - 1.0), 2.0 * H));
    var += (l == 0 ? 1.0 : 2.0) * g * corr[l];
  }
  return var;
}

PathGrid simulate_hou(double lambda, double sigma, const HurstParams& params, const SimConfig& cfg) {
  check_cfg(cfg);
  if (!(lambda > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("simulate_hou: lambda and sigma must be positive");
  const int ref = std::max(1, cfg.inner_grid_refinement);
  const double h = cfg.dt / static_cast<double>(ref);
  const double T = cfg.dt * static_cast<double>(cfg.n_steps);
  SimConfig zc = cfg;
  zc.dt = h;
  zc.n_steps = static_cast<long>(std::llround((T + cfg.history_truncation) / h));
  PathGrid Z = simulate_hermite(params, zc, HermiteBackend::Auto, -cfg.history_truncation);
  PathGrid full = hou_on_path(Z, lambda, sigma, 0.0, ref);
  const std::size_t skip = full.index_of(0.0);
  std::vector<double> vals(full.values.begin() + static_cast<long>(skip), full.values.end());
  return make_path(0.0, cfg.dt, std::move(vals), full.meta + " burn_in=" +
                   std::to_string(cfg.history_truncation));
}

}  // namespace hml
