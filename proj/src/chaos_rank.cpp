#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hml/functional.hpp"
#include "hml/parallel.hpp"
#include "hml/power_series.hpp"
#include "hml/process_sim.hpp"
#include "hml/rng.hpp"

namespace hml {

// small dense least squares via normal equations with partial pivoting
static std::vector<double> lstsq(const std::vector<std::vector<double>>& A,
                                 const std::vector<double>& b) {
  const std::size_t rows = A.size(), cols = A[0].size();
  std::vector<std::vector<double>> N(cols, std::vector<double>(cols + 1, 0.0));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t r = 0; r < rows; ++r) N[i][j] += A[r][i] * A[r][j];
    for (std::size_t r = 0; r < rows; ++r) N[i][cols] += A[r][i] * b[r];
  }
  for (std::size_t p = 0; p < cols; ++p) {
    std::size_t piv = p;
    for (std::size_t i = p + 1; i < cols; ++i)
      if (std::abs(N[i][p]) > std::abs(N[piv][p])) piv = i;
    std::swap(N[p], N[piv]);
    if (std::abs(N[p][p]) < 1e-14) throw std::runtime_error("lstsq: singular normal equations");
    for (std::size_t i = p + 1; i < cols; ++i) {
      const double f = N[i][p] / N[p][p];
      for (std::size_t j = p; j <= cols; ++j) N[i][j] -= f * N[p][j];
    }
  }
  std::vector<double> x(cols, 0.0);
  for (std::size_t i = cols; i-- > 0;) {
    double acc = N[i][cols];
    for (std::size_t j = i + 1; j < cols; ++j) acc -= N[i][j] * x[j];
    x[i] = acc / N[i][i];
  }
  return x;
}

ChaosRankEstimate chaos_rank(const PowerSeries& series, const HurstParams& params,
                             const KernelSpec& kernel, double tol) {
  ChaosRankOptions opts;
  opts.tol = tol;
  return chaos_rank(series, params, kernel, opts);
}

ChaosRankEstimate chaos_rank(const PowerSeries& series, const HurstParams& params,
                             const KernelSpec& kernel, const ChaosRankOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("chaos_rank: tol must be positive");

  if (series.declared_rank) {
    ChaosRankEstimate est;
    est.rank = *series.declared_rank;
    est.exact = true;
    return est;
  }

  if (params.m == 1) {
    const double sigma = std::sqrt(stationary_variance(kernel, params.H));
    const auto g = hermite_coefficients(series, sigma);
    double fac = 1.0;
    for (int d = 1; d < static_cast<int>(g.size()); ++d) {
      fac *= d;
      const double energy = g[d] * g[d] * fac;
      if (energy > opts.tol) {
        ChaosRankEstimate est;
        est.rank = d;
        est.exact = true;
        est.energy = energy;
        return est;
      }
    }
    throw std::runtime_error("chaos_rank: series trivial after centering");
  }

  // m >= 2: Mehler-polarized Monte Carlo on the discrete rank-sum model.
  // y and an Ornstein-Uhlenbeck-coupled copy y^rho share the Gaussian
  // sequence xi up to correlation rho; then Cov(G(y), G(y^rho)) =
  // sum_d rho^d E_d with E_d the projection energy on chaos d.
  const double span = std::max(20.0, 5.0 * kernel.effective_support());
  const double ds = opts.quad_dt;
  const std::size_t n = static_cast<std::size_t>(span / ds);
  const std::vector<double> rho_grid = {-0.9, -0.75, -0.6, -0.45, -0.3, -0.15,
                                        0.15, 0.3,   0.45, 0.6,  0.75, 0.9};
  const int d_max = std::min(series.degree() * params.m, 8);
  if (d_max < 1) throw std::invalid_argument("chaos_rank: constant series has no rank");

  std::vector<double> xk(n);  // kernel weights x(-s_j), s_j = -span + j ds
  for (std::size_t j = 0; j < n; ++j)
    xk[j] = kernel.eval(span - static_cast<double>(j) * ds);
  const double zscale = std::pow(span, params.H);

  const std::size_t R = static_cast<std::size_t>(opts.replicas);
  std::vector<double> base(R);
  std::vector<std::vector<double>> coupled(rho_grid.size(), std::vector<double>(R));

  // the normalization of Z cancels between base and coupled copies only in
  // law, not pathwise, so compute it once exactly
  double var_s = static_cast<double>(n);
  for (std::size_t l = 1; l < n; ++l) {
    const double a = std::pow(static_cast<double>(l + 1), 2.0 * params.H0);
    const double b = std::pow(static_cast<double>(l), 2.0 * params.H0);
    const double c = std::pow(static_cast<double>(l - 1), 2.0 * params.H0);
    var_s += 2.0 * static_cast<double>(n - l) * std::pow(0.5 * (a - 2.0 * b + c), params.m);
  }
  double fac = 1.0;
  for (int j = 2; j <= params.m; ++j) fac *= j;
  var_s *= fac;
  const double norm = zscale / std::sqrt(var_s);

  parallel_for(R, [&](std::size_t r) {
    Rng rng(opts.seed, 2 * r);
    Rng rng2(opts.seed, 2 * r + 1);
    auto xi = detail::sample_fgn(params.H0, 1.0, n, rng);
    auto xi2 = detail::sample_fgn(params.H0, 1.0, n, rng2);
    auto y_from = [&](const std::vector<double>& seq) {
      double y = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        y += xk[j] * norm * hermite_poly(params.m, seq[j]);
      return series.eval(y);
    };
    base[r] = y_from(xi);
    std::vector<double> mix(n);
    for (std::size_t q = 0; q < rho_grid.size(); ++q) {
      const double rho = rho_grid[q];
      const double c = std::sqrt(1.0 - rho * rho);
      for (std::size_t j = 0; j < n; ++j) mix[j] = rho * xi[j] + c * xi2[j];
      coupled[q][r] = y_from(mix);
    }
  });

  // batch-wise covariances -> batch-wise fits -> spread as stderr
  const std::size_t n_batches = 8;
  const std::size_t bsz = R / n_batches;
  std::vector<std::vector<double>> batch_fits;
  std::vector<std::vector<double>> A(rho_grid.size(), std::vector<double>(d_max));
  for (std::size_t q = 0; q < rho_grid.size(); ++q)
    for (int d = 1; d <= d_max; ++d) A[q][d - 1] = std::pow(rho_grid[q], d);

  auto fit_range = [&](std::size_t lo, std::size_t hi) {
    double mb = 0.0;
    for (std::size_t r = lo; r < hi; ++r) mb += base[r];
    mb /= static_cast<double>(hi - lo);
    std::vector<double> cov(rho_grid.size(), 0.0);
    for (std::size_t q = 0; q < rho_grid.size(); ++q) {
      double mq = 0.0;
      for (std::size_t r = lo; r < hi; ++r) mq += coupled[q][r];
      mq /= static_cast<double>(hi - lo);
      double acc = 0.0;
      for (std::size_t r = lo; r < hi; ++r) acc += (base[r] - mb) * (coupled[q][r] - mq);
      cov[q] = acc / static_cast<double>(hi - lo - 1);
    }
    return lstsq(A, cov);
  };

  const auto full = fit_range(0, R);
  for (std::size_t b = 0; b < n_batches; ++b)
    batch_fits.push_back(fit_range(b * bsz, (b + 1) * bsz));

  ChaosRankEstimate est;
  for (int d = 1; d <= d_max; ++d) {
    const double e = full[d - 1];
    double bm = 0.0;
    for (const auto& f : batch_fits) bm += f[d - 1];
    bm /= static_cast<double>(n_batches);
    double bv = 0.0;
    for (const auto& f : batch_fits) bv += (f[d - 1] - bm) * (f[d - 1] - bm);
    bv /= static_cast<double>(n_batches - 1);
    const double se = std::sqrt(bv / static_cast<double>(n_batches));
    if (e > opts.tol && e > 3.0 * se) {
      est.rank = d;
      est.energy = e;
      est.stderr_energy = se;
      return est;
    }
  }
  throw std::runtime_error(
      "chaos_rank: indeterminate, Monte Carlo cannot separate the leading projection from 0 at "
      "the requested tol");
}

}  // namespace hml
