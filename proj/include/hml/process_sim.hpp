#pragma once

#include <cstdint>
#include <memory>

#include "hml/hurst.hpp"
#include "hml/kernel.hpp"
#include "hml/path_grid.hpp"

namespace hml {

/// Exact-in-law fractional Brownian motion on the grid (circulant embedding
/// of fractional Gaussian noise). Path starts at 0 at t = t0.
PathGrid simulate_fbm(double H, const SimConfig& cfg, double t0 = 0.0);

enum class HermiteBackend {
  Auto,        // m=1 fbm, m=2 quadrature, m>=3 rank_sum
  Quadrature,  // off-diagonal multiple Wiener-Ito sum, m <= 2
  RankSum,     // normalized partial sums of He_m of a long-range Gaussian sequence
};

/// Rank-m Hermite process sample path on [t0, t0 + n*dt], Z(t0) = 0.
PathGrid simulate_hermite(const HurstParams& params, const SimConfig& cfg,
                          HermiteBackend backend = HermiteBackend::Auto, double t0 = 0.0);

/// Stationary moving average y_t = int_{t-L}^t x(t-s) dZ_s by left-point
/// Young-Stieltjes quadrature; the burn-in of length cfg.history_truncation
/// is discarded and the returned segment starts at t = 0.
struct VolterraOptions {
  bool richardson = false;  // one-level Richardson extrapolation of the Young sums
};
PathGrid simulate_volterra(const KernelSpec& kernel, const HurstParams& params,
                           const SimConfig& cfg, const VolterraOptions& opts = {});

/// Stationary Hermite Ornstein-Uhlenbeck path via the exact one-step
/// relaxation recursion with Young increments of the forcing integral.
PathGrid simulate_hou(double lambda, double sigma, const HurstParams& params,
                      const SimConfig& cfg);

/// Same recursion over a caller-supplied driver path (shared-noise studies);
/// y starts from y0 at the first grid point of Z and every out_stride-th
/// point is returned.
PathGrid hou_on_path(const PathGrid& Z, double lambda, double sigma, double y0,
                     long out_stride = 1);

/// Volterra moving average over a caller-supplied driver path.
PathGrid volterra_on_path(const PathGrid& Z, const KernelSpec& kernel, double burn_in,
                          long out_stride = 1, const VolterraOptions& opts = {});

/// Exact stationary variance of the discretized moving average (the law the
/// simulator actually produces): Toeplitz sum over the left-point quadrature
/// weights, folding in one Richardson level when enabled. Even-parity output
/// points of the extrapolated scheme.
double volterra_discrete_variance(const KernelSpec& kernel, double H, double dt, int refinement,
                                  bool richardson);

class Rng;

namespace detail {
/// Deterministic per-(H, dt, size) circulant eigenvalues for fGn embedding.
const std::vector<double>& fgn_embedding_eigenvalues(double H, double dt, std::size_t M);
/// fGn sample of length n with Hurst H and step dt.
std::vector<double> sample_fgn(double H, double dt, std::size_t n, Rng& rng);

/// Precomputed quadrature scheme for the rank-2 multiple Wiener-Ito backend;
/// immutable and shared across replicas.
struct Rank2Scheme {
  HurstParams params;
  double dt = 0.0;
  long n_steps = 0;
  int s_refine = 2;
  std::vector<double> cell_w;    // Wiener cell widths, left to right
  std::vector<double> q;         // [n_s][n_cells] cell-averaged kernel rows
  std::size_t n_cells = 0;
  std::size_t n_s = 0;
  double history = 0.0;          // left end of the cell range (positive number)
  double tail_deficit_bound = 0.0;
  double raw_variance_ratio = 0.0;  // exact Var_disc(T)/T^{2H} before normalization
  double norm_factor = 1.0;         // 1/sqrt(ratio), applied to every sample
};
std::shared_ptr<const Rank2Scheme> rank2_scheme(const HurstParams& params, double dt,
                                                long n_steps, int s_refine);
}  // namespace detail

}  // namespace hml
