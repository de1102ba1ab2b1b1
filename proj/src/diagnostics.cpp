#include "hml/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hml/rng.hpp"

namespace hml {

static std::array<double, 4> raw_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double sd = std::sqrt(m2);
  const double skew = m2 > 0 ? m3 / (sd * sd * sd) : 0.0;
  const double kurt = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return {mean, m2 * n / (n - 1.0), skew, kurt};
}

MomentStats moment_stats(const std::vector<double>& x, int bootstrap, std::uint64_t seed) {
  if (x.size() < 8) throw std::invalid_argument("moment_stats: need at least 8 samples");
  MomentStats ms;
  ms.n = x.size();
  const auto m = raw_moments(x);
  ms.mean = m[0];
  ms.variance = m[1];
  ms.skewness = m[2];
  ms.excess_kurtosis = m[3];

  Rng rng(seed, 0);
  std::array<std::vector<double>, 4> boots;
  std::vector<double> resample(x.size());
  for (int b = 0; b < bootstrap; ++b) {
    for (auto& v : resample)
      v = x[static_cast<std::size_t>(rng.uniform01() * static_cast<double>(x.size()))];
    const auto bm = raw_moments(resample);
    for (int i = 0; i < 4; ++i) boots[i].push_back(bm[i]);
  }
  auto sd_of = [](const std::vector<double>& v) {
    const double m0 = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double acc = 0;
    for (double y : v) acc += (y - m0) * (y - m0);
    return std::sqrt(acc / (v.size() - 1.0));
  };
  ms.se_mean = sd_of(boots[0]);
  ms.se_variance = sd_of(boots[1]);
  ms.se_skewness = sd_of(boots[2]);
  ms.se_kurtosis = sd_of(boots[3]);
  return ms;
}

static double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

KsResult ks_fitted_normal(const std::vector<double>& x) {
  if (x.size() < 8) throw std::invalid_argument("ks_fitted_normal: need at least 8 samples");
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  const auto m = raw_moments(x);
  const double mu = m[0], sd = std::sqrt(m[1]);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf((s[i] - mu) / sd);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  KsResult r;
  r.statistic = d;
  // Lilliefors 5% critical value, large-sample approximation
  r.critical_5pct = 0.886 / (std::sqrt(n) - 0.01 + 0.85 / std::sqrt(n));
  r.reject = d > r.critical_5pct;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  if (a.size() < 8 || b.size() < 8)
    throw std::invalid_argument("ks_two_sample: need at least 8 samples each");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // consume ties on both sides before comparing the empirical CDFs
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  r.critical_5pct = c * std::sqrt((na + nb) / (na * nb));
  r.reject = d > r.critical_5pct;
  return r;
}

double holder_seminorm(const PathGrid& path, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("holder_seminorm: gamma must lie in (0,1)");
  double best = 0.0;
  const std::size_t n = path.values.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dtg = std::pow(path.dt * static_cast<double>(j - i), gamma);
      best = std::max(best, std::abs(path.values[j] - path.values[i]) / dtg);
    }
  return best;
}

DiagnosticsReport gaussianity_report(const FunctionalSample& sample, std::uint64_t seed,
                                     double holder_gamma) {
  if (sample.replicas() < 16)
    throw std::invalid_argument("gaussianity_report: too few replicas");
  DiagnosticsReport rep;
  rep.replicas = sample.replicas();
  const auto term = sample.terminal();
  const auto ms = moment_stats(term, 200, seed);
  rep.excess_kurtosis = ms.excess_kurtosis;
  rep.se_kurtosis = ms.se_kurtosis;
  rep.skewness = ms.skewness;
  rep.se_skewness = ms.se_skewness;
  const auto ks = ks_fitted_normal(term);
  rep.ks_statistic = ks.statistic;
  rep.ks_critical = ks.critical_5pct;
  rep.holder_gamma = holder_gamma;
  if (sample.T_grid.size() >= 3) {
    std::vector<double> seminorms(sample.replicas());
    const double dt = sample.T_grid[1] - sample.T_grid[0];
    for (std::size_t r = 0; r < sample.replicas(); ++r) {
      PathGrid p = make_path(sample.T_grid.front(), dt, sample.values[r]);
      seminorms[r] = holder_seminorm(p, holder_gamma);
    }
    std::sort(seminorms.begin(), seminorms.end());
    auto q = [&](double p) {
      return seminorms[std::min(seminorms.size() - 1,
                                static_cast<std::size_t>(p * static_cast<double>(seminorms.size())))];
    };
    rep.holder_quantiles = {q(0.5), q(0.9), q(0.99)};
  }
  rep.label = sample.regime.regime == Regime::LongRange ? "expect non-Gaussian" : "";
  return rep;
}

static double plain_corr(const std::vector<double>& u, const std::vector<double>& v) {
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suu = 0, svv = 0, suv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    svv += (v[i] - mv) * (v[i] - mv);
    suv += (u[i] - mu) * (v[i] - mv);
  }
  return suv / std::sqrt(suu * svv);
}

DiagnosticsReport cross_independence(const FunctionalSample& a, const FunctionalSample& b) {
  if (a.replicas() != b.replicas())
    throw std::invalid_argument("cross_independence: replica mismatch");
  if (a.replicas() < 16) throw std::invalid_argument("cross_independence: too few replicas");
  DiagnosticsReport rep;
  rep.replicas = a.replicas();
  const auto ta = a.terminal();
  const auto tb = b.terminal();
  std::vector<double> sa(ta.size()), sb(tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    sa[i] = ta[i] * ta[i];
    sb[i] = tb[i] * tb[i];
  }

  rep.cross_covariance = plain_corr(ta, tb);
  rep.independence_statistic = plain_corr(sa, sb);

  // bootstrap standard errors: the squares of chaos functionals are heavy
  // tailed and the Fisher formula badly understates their sampling noise
  Rng rng(0xB007, 0);
  const int B = 300;
  const std::size_t n = ta.size();
  std::vector<double> ra(n), rb(n), qa(n), qb(n);
  std::vector<double> boots_plain, boots_sq;
  for (int bi = 0; bi < B; ++bi) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
      ra[i] = ta[j];
      rb[i] = tb[j];
      qa[i] = sa[j];
      qb[i] = sb[j];
    }
    boots_plain.push_back(plain_corr(ra, rb));
    boots_sq.push_back(plain_corr(qa, qb));
  }
  auto sd_of = [](const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  rep.se_cross = sd_of(boots_plain);
  rep.se_independence = sd_of(boots_sq);
  rep.independent_at_3se = std::abs(rep.cross_covariance) <= 3.0 * rep.se_cross &&
                           std::abs(rep.independence_statistic) <= 3.0 * rep.se_independence;
  rep.label = "independence";
  return rep;
}

WeakDistanceReport weak_distance(const std::vector<double>& a, const std::vector<double>& b,
                                 double alpha) {
  if (a.size() < 1000 || b.size() < 1000)
    throw std::invalid_argument("weak_distance: need at least 10^3 samples each");
  WeakDistanceReport rep;
  const auto ks = ks_two_sample(a, b, alpha);
  rep.ks = ks.statistic;
  rep.ks_critical = ks.critical_5pct;
  rep.pass = !ks.reject;
  const auto ma = moment_stats(a);
  const auto mb = moment_stats(b);
  rep.moment_gaps = {ma.mean - mb.mean, ma.variance - mb.variance, ma.skewness - mb.skewness,
                     ma.excess_kurtosis - mb.excess_kurtosis};
  rep.moment_ses = {std::hypot(ma.se_mean, mb.se_mean), std::hypot(ma.se_variance, mb.se_variance),
                    std::hypot(ma.se_skewness, mb.se_skewness),
                    std::hypot(ma.se_kurtosis, mb.se_kurtosis)};
  return rep;
}

}  // namespace hml
