#include "hml/hurst.hpp"

#include <cmath>

namespace hml {

static double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

HurstParams make_params(double H, int m) {
  if (!(H > 0.5 && H < 1.0))
    throw std::invalid_argument("make_params: H must lie in (1/2,1), got " + std::to_string(H));
  if (m < 1)
    throw std::invalid_argument("make_params: rank m must be >= 1, got " + std::to_string(m));
  HurstParams p;
  p.H = H;
  p.m = m;
  p.H0 = 1.0 + (H - 1.0) / static_cast<double>(m);
  // Var(Z_1) = K^2 m! B(H0-1/2, 2-2H0)^m int int |s-s'|^{2H-2} over [0,1]^2
  // = K^2 m! B^m / (H(2H-1)), so K^2 = H(2H-1) / (m! B^m); the m = 1 case is
  // the familiar K^2 B = H(2H-1).
  double log_fac = 0.0;
  for (int j = 2; j <= m; ++j) log_fac += std::log(static_cast<double>(j));
  const double k2 = H * (2.0 * H - 1.0) /
                    std::exp(log_fac + m * log_beta(p.H0 - 0.5, 2.0 - 2.0 * p.H0));
  p.K = std::sqrt(k2);
  return p;
}

double h_star(const HurstParams& p, int d) {
  if (d < 1) throw std::invalid_argument("h_star: chaos degree d must be >= 1");
  return (p.H0 - 1.0) * static_cast<double>(d) + 1.0;
}

RegimeClassification classify_regime(const HurstParams& p, int d) {
  RegimeClassification rc;
  rc.h_star = h_star(p, d);
  if (rc.h_star < 0.5) {
    rc.regime = Regime::ShortRange;
  } else if (rc.h_star > 0.5) {
    rc.regime = Regime::LongRange;
  } else {
    rc.regime = Regime::Boundary;
    rc.excluded_by_limit_theorem = true;
  }
  rc.scaling_exponent = std::max(rc.h_star, 0.5);
  return rc;
}

double scaling_alpha(const HurstParams& p, int w, double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("scaling_alpha: eps must lie in (0,1]");
  const RegimeClassification rc = classify_regime(p, w);
  if (rc.regime == Regime::Boundary)
    throw std::invalid_argument(
        "scaling_alpha: H*(w) = 1/2 is the boundary case, excluded from the limit theorem");
  return std::pow(eps, rc.scaling_exponent);
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::ShortRange: return "short_range";
    case Regime::LongRange: return "long_range";
    case Regime::Boundary: return "boundary";
  }
  return "unknown";
}

}  // namespace hml
