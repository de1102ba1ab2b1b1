#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "doctest.h"
#include "hml/contraction.hpp"
#include "hml/functional.hpp"
#include "hml/hurst.hpp"
#include "hml/power_series.hpp"

using namespace hml;

namespace {

// Lanczos gamma, independent of std::lgamma, for the K(H,m) oracle
double lanczos_gamma(double x) {
  static const double g[] = {676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,    -176.61502916214059,
                             12.507343278686905,    -0.13857109526572012,
                             9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) return M_PI / (std::sin(M_PI * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = 0.99999999999980993;
  const double t = x + 7.5;
  for (int i = 0; i < 8; ++i) a += g[i] / (x + i + 1);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double beta_oracle(double a, double b) {
  return lanczos_gamma(a) * lanczos_gamma(b) / lanczos_gamma(a + b);
}

// brute-force partial-pairing count of k items leaving exactly d free: the
// first live item either stays free or pairs with one of the n-1 others
long pairing_oracle(int k, int d) {
  std::function<long(int, int)> f = [&](int n, int free) -> long {
    if (n == 0) return free == d ? 1 : 0;
    long total = f(n - 1, free + 1);
    if (n >= 2) total += (n - 1) * f(n - 2, free);
    return total;
  };
  return f(k, 0);
}

}  // namespace

TEST_CASE("make_params derived fields") {
  auto p = make_params(0.7, 1);
  CHECK(p.H0 == doctest::Approx(0.7));
  auto p2 = make_params(0.7, 2);
  CHECK(p2.H0 == doctest::Approx(0.85));

  // K via the independent gamma oracle
  const double k_expected = std::sqrt(0.7 * 0.4 / beta_oracle(0.2, 0.6));
  CHECK(p.K == doctest::Approx(k_expected).epsilon(1e-10));

  // invariant: K^2 m! B(H0-1/2, 2-2H0)^m = H(2H-1) (unit variance at t=1)
  // and H*(m) = H, over a grid; m = 1 reduces to K^2 B = H(2H-1)
  for (double H : {0.55, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    for (int m : {1, 2, 3, 5}) {
      auto q = make_params(H, m);
      CHECK(q.H0 > 1.0 - 0.5 / m);
      CHECK(q.H0 < 1.0);
      double fac = 1.0;
      for (int j = 2; j <= m; ++j) fac *= j;
      const double lhs =
          q.K * q.K * fac * std::pow(beta_oracle(q.H0 - 0.5, 2.0 - 2.0 * q.H0), m);
      CHECK(lhs == doctest::Approx(H * (2 * H - 1)).epsilon(1e-9));
      CHECK(h_star(q, m) == doctest::Approx(H).epsilon(1e-14));
    }
  }

  CHECK_THROWS_AS(make_params(0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_params(1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_params(0.7, 0), std::invalid_argument);
}

TEST_CASE("h_star and regimes") {
  auto p = make_params(0.7, 2);
  CHECK(h_star(p, 2) == doctest::Approx(0.7));
  CHECK(h_star(p, 4) == doctest::Approx(0.4));
  CHECK(h_star(make_params(0.9, 1), 2) == doctest::Approx(0.8));

  CHECK(classify_regime(p, 4).regime == Regime::ShortRange);
  CHECK(classify_regime(p, 4).scaling_exponent == doctest::Approx(0.5));
  auto lrd = classify_regime(make_params(0.9, 1), 2);
  CHECK(lrd.regime == Regime::LongRange);
  CHECK(lrd.scaling_exponent == doctest::Approx(0.8));
  auto bd = classify_regime(make_params(0.75, 1), 2);
  CHECK(bd.regime == Regime::Boundary);
  CHECK(bd.excluded_by_limit_theorem);

  // regime depends only on (H, m, d): invariance spot checks
  CHECK(classify_regime(p, 4).regime == classify_regime(make_params(0.7, 2), 4).regime);

  CHECK(scaling_alpha(make_params(0.7, 2), 4, 0.01) == doctest::Approx(0.1));
  CHECK(scaling_alpha(make_params(0.9, 1), 2, 0.01) == doctest::Approx(std::pow(0.01, 0.8)));
  CHECK_THROWS_AS(scaling_alpha(make_params(0.75, 1), 2, 0.01), std::invalid_argument);
}

TEST_CASE("enumerate_contractions basic") {
  auto v21 = enumerate_contractions(2, 1);
  REQUIRE(v21.size() == 2);
  std::set<int> deltas;
  for (const auto& v : v21) deltas.insert(v.delta);
  CHECK(deltas == std::set<int>{0, 2});

  auto v22 = enumerate_contractions(2, 2);
  REQUIRE(v22.size() == 3);
  deltas.clear();
  for (const auto& v : v22) deltas.insert(v.delta);
  CHECK(deltas == std::set<int>{0, 2, 4});

  // k=1: the single empty vector with delta = m
  auto v13 = enumerate_contractions(1, 3);
  REQUIRE(v13.size() == 1);
  CHECK(v13[0].r.empty());
  CHECK(v13[0].delta == 3);

  CHECK_THROWS_AS(enumerate_contractions(41, 1), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_contractions(21, 2), std::invalid_argument);
}

TEST_CASE("enumerate_contractions against box-filter oracle") {
  // independent enumeration: all r in [0,m]^{k-1}, filtered by the chain
  for (int m : {1, 2, 3}) {
    for (int k = 1; k * m <= 12; ++k) {
      std::set<std::vector<int>> oracle;
      std::vector<int> r(k - 1, 0);
      std::function<void(int)> gen = [&](int pos) {
        if (pos == k - 1) {
          ContractionVector v;
          v.k = k;
          v.m = m;
          v.r = r;
          int sum = 0;
          for (int x : r) sum += x;
          v.delta = k * m - 2 * sum;
          if (is_admissible(v)) oracle.insert(r);
          return;
        }
        for (int x = 0; x <= m; ++x) {
          r[pos] = x;
          gen(pos + 1);
        }
      };
      gen(0);
      auto got = enumerate_contractions(k, m);
      CHECK(got.size() == oracle.size());
      for (const auto& v : got) {
        CHECK(oracle.count(v.r) == 1);
        CHECK(is_admissible(v));
      }
    }
  }
  // worked example: k=3, m=1 has exactly the three vectors (0,0),(1,0),(0,1)
  auto v31 = enumerate_contractions(3, 1);
  CHECK(v31.size() == 3);
}

TEST_CASE("parity property: delta == km mod 2") {
  for (int m = 1; m <= 6; ++m)
    for (int k = 1; k <= 6 && k * m <= 36; ++k)
      for (const auto& v : enumerate_contractions(k, m)) {
        CHECK((v.delta % 2 + 2) % 2 == (k * m) % 2);
        CHECK(v.delta >= 0);
        CHECK(v.delta <= k * m);
      }
}

TEST_CASE("c1_constant exact values") {
  ContractionVector v;
  v.k = 2;
  v.m = 1;
  v.r = {1};
  v.delta = 0;
  CHECK(c1_constant(v) == 1);

  v.m = 2;
  v.delta = 2;
  CHECK(c1_constant(v) == 4);

  // x^3 = H3 + 3 H1: sum of C1 over delta=1 vectors equals 3
  mpz_class sum = 0;
  for (const auto& w : enumerate_contractions(3, 1))
    if (w.delta == 1) sum += c1_constant(w);
  CHECK(sum == 3);

  // reversed-order re-evaluation yields the identical integer
  for (const auto& w : enumerate_contractions(4, 2)) {
    mpz_class forward = c1_constant(w);
    mpz_class reversed = 1;
    {
      int sumr = 0;
      std::vector<mpz_class> factors;
      for (int j = 1; j <= w.k - 1; ++j) {
        const int rj = w.r[j - 1];
        const int degree = j * w.m - 2 * sumr;
        mpz_class f, b1, b2;
        mpz_fac_ui(f.get_mpz_t(), rj);
        mpz_bin_uiui(b1.get_mpz_t(), w.m, rj);
        mpz_bin_uiui(b2.get_mpz_t(), degree, rj);
        factors.push_back(f);
        factors.push_back(b1);
        factors.push_back(b2);
        sumr += rj;
      }
      for (auto it = factors.rbegin(); it != factors.rend(); ++it) reversed *= *it;
    }
    CHECK(forward == reversed);
  }
}

TEST_CASE("chaos_projection_profile vs Hermite pairing oracle (m=1)") {
  auto p21 = chaos_projection_profile(2, 1);
  CHECK(p21.size() == 2);
  CHECK(p21.at(0) == 1);
  CHECK(p21.at(2) == 1);

  auto p41 = chaos_projection_profile(4, 1);
  CHECK(p41.at(0) == 3);
  CHECK(p41.at(2) == 6);
  CHECK(p41.at(4) == 1);

  CHECK(chaos_projection_profile(6, 1).at(0) == 15);

  for (int k = 1; k <= 8; ++k) {
    auto prof = chaos_projection_profile(k, 1);
    for (int d = 0; d <= k; ++d) {
      const long expect = pairing_oracle(k, d);
      if (expect == 0) {
        CHECK(prof.count(d) == 0);
      } else {
        REQUIRE(prof.count(d) == 1);
        CHECK(prof.at(d) == expect);
      }
    }
    // degree-0 moment: (k-1)!! for even k, absent for odd k
    if (k % 2 == 0) {
      long dfac = 1;
      for (int j = k - 1; j >= 1; j -= 2) dfac *= j;
      CHECK(prof.at(0) == dfac);
    } else {
      CHECK(prof.count(0) == 0);
    }
  }
}

TEST_CASE("contraction graphs: constraints and multiplicity identity") {
  for (int m : {1, 2, 3}) {
    for (int k = 2; k * m <= 9; ++k) {
      for (const auto& v : enumerate_contractions(k, m)) {
        auto graphs = enumerate_graphs(v);
        REQUIRE(!graphs.empty());
        mpz_class mult_sum = 0;
        for (const auto& g : graphs) {
          // per-node edge sums match the contraction counts
          for (int j = 1; j < g.k; ++j) {
            int row = 0;
            for (int q = 0; q < j; ++q) row += g.beta[j][q];
            CHECK(row == v.r[j - 1]);
          }
          // free degrees: total = delta, per node incident + free = m
          CHECK(g.delta() == v.delta);
          for (int j = 0; j < g.k; ++j) {
            int incident = 0;
            for (int q = 0; q < j; ++q) incident += g.beta[j][q];
            for (int jj = j + 1; jj < g.k; ++jj) incident += g.beta[jj][j];
            CHECK(incident + g.free_degrees[j] == m);
          }
          mult_sum += g.multiplicity;
        }
        // sum of slot multiplicities recovers C1 up to the per-step factors
        mpz_class steps = 1;
        {
          for (int j = 1; j <= v.k - 1; ++j) {
            mpz_class f, b;
            mpz_fac_ui(f.get_mpz_t(), v.r[j - 1]);
            mpz_bin_uiui(b.get_mpz_t(), v.m, v.r[j - 1]);
            steps *= f * b;
          }
        }
        CHECK(mult_sum * steps == c1_constant(v));
      }
    }
  }
}

TEST_CASE("c4 bound") {
  CHECK(log_c4_bound(1, 1, 1, 1, 1.0) == doctest::Approx(std::log(8.0)));
  // exact recomputation: sqrt(2!2!) * (1!)^4 * 4^1 * (4*1)^2 * 1^4 * 1 / 2^2
  CHECK(c4_bound(2, 2, 1, 2, 1.0) == doctest::Approx(2.0 * 4.0 * 16.0 / 4.0));
  // strictly decreasing in d
  double prev = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 4; ++d) {
    const double c = log_c4_bound(4, 4, 1, d, 2.0);
    CHECK(c < prev);
    prev = c;
  }
  CHECK_THROWS_AS(log_c4_bound(2, 2, 1, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_c4_bound(2, 2, 1, 3, 1.0), std::invalid_argument);
}

TEST_CASE("power series basics") {
  auto s = PowerSeries::from_coefficients({0.0, 0.0, 1.0});  // x^2
  CHECK(s.eval(3.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(PowerSeries::with_growth_bound({0.0, 10.0}, 1.0), std::invalid_argument);

  // He_3(x) = x^3 - 3x; hermite_series(3, sigma) evaluates He_3(x/sigma)
  auto h3 = hermite_series(3, 1.0);
  CHECK(h3.eval(2.0) == doctest::Approx(hermite_poly(3, 2.0)));
  auto h3s = hermite_series(3, 2.0);
  CHECK(h3s.eval(1.0) == doctest::Approx(hermite_poly(3, 0.5)));

  CHECK(gaussian_moment(4) == doctest::Approx(3.0));
  CHECK(gaussian_moment(6) == doctest::Approx(15.0));
  CHECK(gaussian_moment(5) == 0.0);

  // x^4 = H4 + 6 H2 + 3
  CHECK(monomial_hermite_coeff(4, 4) == doctest::Approx(1.0));
  CHECK(monomial_hermite_coeff(4, 2) == doctest::Approx(6.0));
  CHECK(monomial_hermite_coeff(4, 0) == doctest::Approx(3.0));
}

TEST_CASE("hermite rank (exact, m=1)") {
  auto identity = PowerSeries::from_coefficients({0.0, 1.0});
  CHECK(hermite_rank(identity, 1.0) == 1);
  CHECK(hermite_rank(identity, 3.7) == 1);

  auto h2 = PowerSeries::from_coefficients({-1.0, 0.0, 1.0});  // x^2 - 1
  CHECK(hermite_rank(h2, 1.0) == 2);

  auto cube = PowerSeries::from_coefficients({0.0, 0.0, 0.0, 1.0});  // x^3 = H3 + 3H1
  CHECK(hermite_rank(cube, 1.0) == 1);
}

TEST_CASE("truncation_order") {
  auto poly = PowerSeries::from_coefficients({1.0, 1.0, 0.5, 1.0 / 6.0});
  CHECK(truncation_order(poly, 1.0, 1e-12) == 3);
  // vacuous tolerance
  CHECK(truncation_order(poly, 1.0, std::numeric_limits<double>::infinity()) == 0);

  // c_k = 1/k! stored to degree 30: verify against direct summation of the
  // majorant with the default envelope
  std::vector<double> c(31);
  double fac = 1.0;
  for (int k = 0; k <= 30; ++k) {
    if (k > 0) fac *= k;
    c[k] = 1.0 / fac;
  }
  auto expseries = PowerSeries::from_coefficients(c);
  const int M = truncation_order(expseries, 1.0, 1e-6);
  auto term = [&](int k) {
    // envelope for m=1, L=1: (2k)^2, majorant term c_k (2k)^2
    return (1.0 / std::exp(std::lgamma(k + 1.0))) * 4.0 * k * k;
  };
  double tail = 0.0;
  for (int k = M + 1; k <= 30; ++k) tail += term(k);
  CHECK(tail < 1e-6);
  double tail_before = 0.0;
  for (int k = M; k <= 30; ++k) tail_before += term(k);
  CHECK(tail_before >= 1e-6);

  // monotonicity: non-increasing in tol, non-decreasing in moment bound
  CHECK(truncation_order(expseries, 1.0, 1e-3) <= M);
  CHECK(truncation_order(expseries, 2.0, 1e-6) >= M);

  // growing majorant: divergence guard
  CHECK_THROWS_AS(truncation_order(expseries, 50.0, 1e-6), std::runtime_error);
}
