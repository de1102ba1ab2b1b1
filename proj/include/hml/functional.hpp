#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hml/hurst.hpp"
#include "hml/kernel.hpp"
#include "hml/path_grid.hpp"
#include "hml/power_series.hpp"

namespace hml {

/// Normalized functionals of one series at one eps across replicas:
/// values[r][i] = eps^{H*(w) v 1/2} int_0^{T_i/eps} G(y_t) dt.
struct FunctionalSample {
  double eps = 0.0;
  std::vector<double> T_grid;           // sorted, within [0,1]
  std::vector<std::vector<double>> values;  // replica-major
  RegimeClassification regime;
  std::string series_id;

  std::size_t replicas() const { return values.size(); }
  /// Column at the largest T (the law the limit theorems speak about at T=1).
  std::vector<double> terminal() const;
};

enum class Centering { None, Mean, Projection };

struct CenteringContext {
  int m = 1;
  double sigma_y = 1.0;                  // exact stationary std-dev of y
  std::optional<double> mc_mean;         // required for Mean with m >= 2
  std::optional<int> projection_rank;    // target rank; default = Hermite rank
};

/// Pointwise sum_k c_k y_t^k with the selected centering. Mean-centering is
/// exact (Gaussian moments) for m = 1 and uses the supplied calibration mean
/// otherwise. Projection-centering subtracts the closed-form Hermite
/// projections onto chaoses < w and exists only for m = 1.
PathGrid evaluate_series(const PowerSeries& series, const PathGrid& path, Centering centering,
                         const CenteringContext& ctx = {});

/// One replica row: trapezoidal time integral of Gpath over [0, T/eps],
/// scaled by eps^{max(H*,1/2)}. T = 0 gives exactly 0.
std::vector<double> normalized_functional(const PathGrid& Gpath, double eps,
                                          const RegimeClassification& regime,
                                          const std::vector<double>& T_grid);

/// How the driving moving average is produced for the statistics drivers.
struct FunctionalDriver {
  HurstParams params;
  KernelSpec kernel;
  double dt_cap = 0.05;
  double resolution_factor = 100.0;      // dt = min(dt_cap, eps*T_max*factor)
  double burn_in = 50.0;
  int inner_refinement = 1;
  bool richardson = false;               // extrapolate the Young sums
};

double driver_dt(const FunctionalDriver& drv, double eps, double T_max);

/// Simulate one y replica covering [0, T_max/eps]; stream indexes the replica.
PathGrid driver_path(const FunctionalDriver& drv, double eps, double T_max,
                     std::uint64_t seed, std::uint64_t stream);

/// Chaos rank of the series with respect to the driver: exact Hermite rank for
/// m = 1; declared rank, else Mehler-polarized Monte Carlo, for m >= 2.
struct ChaosRankOptions {
  double tol = 1e-3;
  int replicas = 2000;
  std::uint64_t seed = 2024;
  double quad_dt = 0.2;
};
struct ChaosRankEstimate {
  int rank = 0;
  bool exact = false;       // true for m = 1 or a declared rank
  double energy = 0.0;      // estimated projection energy at the rank
  double stderr_energy = 0.0;
};
ChaosRankEstimate chaos_rank(const PowerSeries& series, const HurstParams& params,
                             const KernelSpec& kernel, double tol);
ChaosRankEstimate chaos_rank(const PowerSeries& series, const HurstParams& params,
                             const KernelSpec& kernel, const ChaosRankOptions& opts);

/// Build a FunctionalSample: replicas * |T_grid| normalized functionals.
FunctionalSample sample_functional(const PowerSeries& series, const FunctionalDriver& drv,
                                   double eps, const std::vector<double>& T_grid, int replicas,
                                   std::uint64_t seed, Centering centering = Centering::None,
                                   const std::string& series_id = "G");

/// Two series evaluated on the same driver replicas (joint experiments).
std::pair<FunctionalSample, FunctionalSample> sample_functional_pair(
    const PowerSeries& seriesA, const PowerSeries& seriesB, const FunctionalDriver& drv,
    double eps, const std::vector<double>& T_grid, int replicas, std::uint64_t seed,
    Centering centering = Centering::None);

struct SlopePoint {
  double eps = 0.0;
  double log_inv_eps = 0.0;
  double log_variance = 0.0;
  double se_log_variance = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double predicted = 0.0;       // 1 for SRD, (2H0-2)w+2 for LRD
  bool boundary = false;        // log-corrected fit, no limit law asserted
  std::vector<SlopePoint> points;
};

/// Regress log Var[int_0^{1/eps} G(y) dt] on log(1/eps) across the ladder.
ScalingFit scaling_exponent(const PowerSeries& series, const FunctionalDriver& drv,
                            const std::vector<double>& eps_ladder, int replicas,
                            std::uint64_t seed, int rank_w);

struct CovarianceEstimate {
  double lambda = 0.0;       // 2 int_0^cutoff cov + tail bound in the budget
  double stderr_lambda = 0.0;
  double tail_bound = 0.0;
  std::vector<double> lag_grid;
  std::vector<double> covariances;
  std::vector<double> covariance_se;
};

/// Lemma-type SRD limit covariance 2 int_0^inf E[GA(y_s) GB(y_0)] ds by Monte
/// Carlo lag covariances + quadrature; both series must be short-range.
CovarianceEstimate limit_covariance_srd(const PowerSeries& seriesA, const PowerSeries& seriesB,
                                        const FunctionalDriver& drv, double lag_cutoff,
                                        int replicas, std::uint64_t seed, int rank_a, int rank_b);

struct KappaEstimate {
  double kappa = 0.0;
  double stderr_kappa = 0.0;
  std::vector<double> per_eps;   // kappa(eps) along the ladder
  std::vector<double> per_eps_se;
};

/// kappa = lim_eps ||eps^{H*(w)} int_0^{1/eps} G(y)||_{L2}; extrapolated as the
/// mean of the two smallest-eps estimates with their gap folded into stderr.
KappaEstimate kappa_estimate(const PowerSeries& series, const FunctionalDriver& drv,
                             const std::vector<double>& eps_ladder, int replicas,
                             std::uint64_t seed, int rank_w);

}  // namespace hml
