#pragma once

#include <string>
#include <vector>

#include "hml/hurst.hpp"

namespace hml {

/// Moving-average kernel x on [0, inf). Exponential is closed-form; Tabulated
/// interpolates linearly on a uniform lag grid and is zero beyond it.
struct KernelSpec {
  enum class Variant { Exponential, Tabulated };
  Variant variant = Variant::Exponential;

  // Exponential
  double lambda = 1.0;

  // Tabulated
  double lag_step = 0.0;
  std::vector<double> values;        // x(0), x(lag_step), ...
  double asserted_decay = 0.0;       // claimed tail exponent, informational

  double eval(double s) const;       // 0 for s < 0 and beyond the table
  double l1_norm() const;            // int |x|
  double support_end() const;        // where the numeric representation ends
  /// Smallest s with the remaining |x| mass below mass_tol * l1_norm().
  double effective_support(double mass_tol = 1e-3) const;

  static KernelSpec exponential(double lambda);
  static KernelSpec tabulated(double lag_step, std::vector<double> values,
                              double asserted_decay = 0.0);
};

/// Cross-correlation c(w) = int_0^inf x(a) x(a+|w|) da; absolute_value takes
/// |x| instead of x.
double kernel_cross_correlation(const KernelSpec& k, double w, bool absolute_value);

/// int_R c(w) |w - s|^{2H-2} dw for the kernel cross-correlation c, with the
/// |.|^{2H-2} singularity absorbed by the substitution u = v^{2H-1}.
double weighted_lag_integral(const KernelSpec& k, double H, double s, bool absolute_value);

/// Stationary covariance E[y_t y_{t+s}] of the moving average y = x * dZ^{H,m}
/// (depends on the Hermite family only through H):
/// rho(s) = H(2H-1) int int x(a)x(b)|b-a-s|^{2H-2} da db.
double stationary_covariance(const KernelSpec& k, double H, double s);

/// H(2H-1) int int |x(u)||x(v)||u-v|^{2H-2} du dv; also the variance of y
/// when x >= 0.
double weighted_norm(const KernelSpec& k, double H);

/// Variance of the stationary moving average, = stationary_covariance at 0.
double stationary_variance(const KernelSpec& k, double H);

struct KernelValidation {
  bool passed = false;
  double c_fit = 0.0;                 // fitted constant in c * (1 ^ s^{2H-2})
  double ratio_spread = 0.0;          // max/min of D(lag)/(1 ^ lag^{2H-2})
  double l1 = 0.0;
  double weighted = 0.0;              // |H|-norm
  std::vector<double> lags;
  std::vector<double> envelope_ratios;
  std::string message;
};

/// Decay certificate of Assumption-type: D(lag) = int int |x||x||u-v|^{2H-2}
/// must stay within a constant of 1 ^ lag^{2H-2} on the validation lags.
KernelValidation validate_kernel(const KernelSpec& k, const HurstParams& p,
                                 const std::vector<double>& lags,
                                 double max_ratio_spread = 3.0);

}  // namespace hml
