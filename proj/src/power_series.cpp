#include "hml/power_series.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hml {

static void validate_decay(const std::vector<double>& c, double growth_bound) {
  if (c.empty()) throw std::invalid_argument("PowerSeries: empty coefficient list");
  if (!(growth_bound >= 0.0) || !std::isfinite(growth_bound))
    throw std::invalid_argument("PowerSeries: growth bound must be finite and non-negative");
  double log_fac = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    if (!std::isfinite(c[k])) throw std::invalid_argument("PowerSeries: non-finite coefficient");
    if (k > 0) log_fac += std::log(static_cast<double>(k));
    if (std::abs(c[k]) > growth_bound * std::exp(-log_fac) * (1.0 + 1e-12))
      throw std::invalid_argument("PowerSeries: |c_" + std::to_string(k) +
                                  "| violates the growth bound C/k!");
  }
}

PowerSeries PowerSeries::from_coefficients(std::vector<double> c, std::optional<int> declared_rank) {
  if (c.empty()) throw std::invalid_argument("PowerSeries: empty coefficient list");
  double bound = 0.0, log_fac = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    if (k > 0) log_fac += std::log(static_cast<double>(k));
    bound = std::max(bound, std::abs(c[k]) * std::exp(log_fac));
  }
  PowerSeries s;
  s.coefficients = std::move(c);
  s.growth_bound = bound;
  s.declared_rank = declared_rank;
  validate_decay(s.coefficients, s.growth_bound);
  return s;
}

PowerSeries PowerSeries::with_growth_bound(std::vector<double> c, double growth_bound,
                                           std::optional<int> declared_rank) {
  validate_decay(c, growth_bound);
  PowerSeries s;
  s.coefficients = std::move(c);
  s.growth_bound = growth_bound;
  s.declared_rank = declared_rank;
  return s;
}

double PowerSeries::eval(double x) const {
  double acc = 0.0;
  for (size_t i = coefficients.size(); i-- > 0;) acc = acc * x + coefficients[i];
  return acc;
}

double hermite_poly(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_poly: n must be >= 0");
  if (n == 0) return 1.0;
  double hm1 = 1.0, h = x;
  for (int j = 1; j < n; ++j) {
    const double hp1 = x * h - static_cast<double>(j) * hm1;
    hm1 = h;
    h = hp1;
  }
  return h;
}

PowerSeries hermite_series(int n, double sigma) {
  if (n < 0) throw std::invalid_argument("hermite_series: n must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("hermite_series: sigma must be positive");
  // He_n monomial coefficients via the recurrence He_{n+1} = x He_n - n He_{n-1}
  std::vector<double> prev{1.0}, cur{0.0, 1.0};
  if (n == 0) cur = prev;
  for (int j = 1; j < n; ++j) {
    std::vector<double> next(j + 2, 0.0);
    for (size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (size_t i = 0; i < prev.size(); ++i) next[i] -= static_cast<double>(j) * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  // He_n(x/sigma): scale the degree-i coefficient by sigma^{-i}
  double scale = 1.0;
  for (size_t i = 0; i < cur.size(); ++i) {
    cur[i] *= scale;
    scale /= sigma;
  }
  return PowerSeries::from_coefficients(std::move(cur), n >= 1 ? std::optional<int>(n) : std::nullopt);
}

double gaussian_moment(int n) {
  if (n < 0) throw std::invalid_argument("gaussian_moment: n must be >= 0");
  if (n % 2 == 1) return 0.0;
  double v = 1.0;
  for (int j = n - 1; j >= 1; j -= 2) v *= static_cast<double>(j);
  return v;
}

double monomial_hermite_coeff(int k, int d) {
  if (k < 0 || d < 0) throw std::invalid_argument("monomial_hermite_coeff: negative index");
  if (d > k || (k - d) % 2 != 0) return 0.0;
  const int p = (k - d) / 2;
  // k! / (d! 2^p p!) computed in logs
  double lg = std::lgamma(k + 1.0) - std::lgamma(d + 1.0) - p * std::log(2.0) - std::lgamma(p + 1.0);
  return std::exp(lg);
}

std::vector<double> hermite_coefficients(const PowerSeries& s, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("hermite_coefficients: sigma must be positive");
  const int deg = s.degree();
  std::vector<double> g(deg + 1, 0.0);
  for (int k = 0; k <= deg; ++k) {
    if (s.coefficients[k] == 0.0) continue;
    const double sk = std::pow(sigma, k);
    for (int d = k % 2; d <= k; d += 2)
      g[d] += s.coefficients[k] * sk * monomial_hermite_coeff(k, d);
  }
  return g;
}

int hermite_rank(const PowerSeries& s, double sigma, double tol) {
  const auto g = hermite_coefficients(s, sigma);
  for (int d = 1; d < static_cast<int>(g.size()); ++d)
    if (std::abs(g[d]) > tol) return d;
  throw std::runtime_error("hermite_rank: series is trivial after centering (all g_d vanish)");
}

// (m!)^k m^k (2km)^2 L^{km}: the summed form of the reduction majorant
static double log_envelope(int k, const TruncationEnv& env) {
  if (k == 0) return 0.0;
  const double km = static_cast<double>(k) * env.m;
  double lg = k * std::lgamma(env.m + 1.0);
  lg += k * std::log(static_cast<double>(env.m));
  lg += 2.0 * std::log(2.0 * km);
  lg += km * std::log(env.frak_L);
  return lg;
}

int truncation_order(const PowerSeries& s, double moment_bound, double tol,
                     const TruncationEnv& env) {
  if (!(moment_bound > 0.0)) throw std::invalid_argument("truncation_order: moment_bound must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("truncation_order: tol must be positive");
  if (env.m < 1 || !(env.frak_L > 0.0))
    throw std::invalid_argument("truncation_order: invalid envelope parameters");

  const int deg = s.degree();
  std::vector<double> term(deg + 1, 0.0);
  for (int k = 0; k <= deg; ++k) {
    const double ck = std::abs(s.coefficients[k]);
    if (ck == 0.0) continue;
    term[k] = ck * std::exp(k * std::log(moment_bound) + log_envelope(k, env));
  }
  // Majorant terms still growing at the stored horizon signal a divergent
  // implied tail (moment_bound beats the coefficient decay).
  if (deg >= 3 && term[deg] > tol && term[deg] >= term[deg - 1] && term[deg - 1] >= term[deg - 2])
    throw std::runtime_error(
        "truncation_order: majorant terms grow through the stored horizon (no finite M)");

  std::vector<double> tail(deg + 2, 0.0);
  for (int k = deg; k >= 0; --k) tail[k] = tail[k + 1] + term[k];
  for (int M = 0; M <= deg; ++M)
    if (tail[M + 1] < tol) return M;
  return deg;
}

}  // namespace hml
