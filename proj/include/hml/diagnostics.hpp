#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hml/functional.hpp"
#include "hml/path_grid.hpp"

namespace hml {

struct MomentStats {
  std::size_t n = 0;
  double mean = 0.0, variance = 0.0, skewness = 0.0, excess_kurtosis = 0.0;
  double se_mean = 0.0, se_variance = 0.0, se_skewness = 0.0, se_kurtosis = 0.0;
};

/// Sample moments with bootstrap standard errors (deterministic resampling).
MomentStats moment_stats(const std::vector<double>& x, int bootstrap = 200,
                         std::uint64_t seed = 7);

struct KsResult {
  double statistic = 0.0;
  double critical_5pct = 0.0;
  bool reject = false;
};

/// Composite KS distance against a normal fitted by the sample's own mean and
/// variance (Lilliefors-style critical value).
KsResult ks_fitted_normal(const std::vector<double>& x);

/// Two-sample Kolmogorov-Smirnov test at significance alpha.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.05);

struct DiagnosticsReport {
  std::size_t replicas = 0;
  double excess_kurtosis = 0.0, se_kurtosis = 0.0;
  double skewness = 0.0, se_skewness = 0.0;
  double ks_statistic = 0.0, ks_critical = 0.0;
  std::array<double, 3> holder_quantiles{};  // 0.5 / 0.9 / 0.99 across replicas
  double holder_gamma = 0.0;
  double cross_covariance = 0.0, se_cross = 0.0;           // terminal corr(A,B)
  double independence_statistic = 0.0, se_independence = 0.0;  // corr(A^2,B^2)
  bool independent_at_3se = false;
  std::string label;  // e.g. "expect non-Gaussian" for LRD input
};

DiagnosticsReport gaussianity_report(const FunctionalSample& sample, std::uint64_t seed = 7,
                                     double holder_gamma = 0.45);

/// Independence diagnostics between two samples built on the same noise
/// replicas: correlation of the pair and of their squares at the terminal T.
DiagnosticsReport cross_independence(const FunctionalSample& srd, const FunctionalSample& lrd);

/// max over grid pairs of |X_t - X_s| / |t-s|^gamma (O(n^2)).
double holder_seminorm(const PathGrid& path, double gamma);

struct WeakDistanceReport {
  double ks = 0.0;
  double ks_critical = 0.0;
  bool pass = false;
  std::array<double, 4> moment_gaps{};  // mean, variance, skewness, kurtosis
  std::array<double, 4> moment_ses{};
};

/// Terminal-marginal weak distance: two-sample KS plus first-four-moment gaps.
WeakDistanceReport weak_distance(const std::vector<double>& a, const std::vector<double>& b,
                                 double alpha = 0.05);

}  // namespace hml
