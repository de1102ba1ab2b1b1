#pragma once

#include <stdexcept>
#include <string>

namespace hml {

/// Parameters of the Hermite family: Hurst index H in (1/2,1) and rank m,
/// with the derived kernel exponent H0 = 1 + (H-1)/m and the variance
/// normalization K(H,m) fixed by Var = 1 at t = 1.
struct HurstParams {
  double H = 0.0;
  int m = 0;
  double H0 = 0.0;  // 1 + (H-1)/m
  double K = 0.0;   // K^2 * B(H0-1/2, 2-2H0) = H(2H-1)
};

enum class Regime { ShortRange, LongRange, Boundary };

struct RegimeClassification {
  double h_star = 0.0;
  Regime regime = Regime::Boundary;
  double scaling_exponent = 0.0;  // exponent of eps in alpha(eps), max(h_star, 1/2)
  bool excluded_by_limit_theorem = false;  // set on Boundary
};

HurstParams make_params(double H, int m);

/// Effective Hurst index of a chaos-degree-d functional: H*(d) = (H0-1)d + 1.
double h_star(const HurstParams& p, int d);

RegimeClassification classify_regime(const HurstParams& p, int d);

/// Normalization alpha(eps) = eps^{1/2} (SRD) or eps^{H*(w)} (LRD).
/// Throws on the boundary H*(w) = 1/2, which the limit theorem excludes.
double scaling_alpha(const HurstParams& p, int w, double eps);

const char* regime_name(Regime r);

}  // namespace hml
