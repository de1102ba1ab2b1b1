#pragma once

#include <optional>
#include <vector>

namespace hml {

/// G(X) = sum_k c_k X^k with the decay certificate |c_k| <= C / k!.
struct PowerSeries {
  std::vector<double> coefficients;  // c_0 .. c_M
  double growth_bound = 1.0;         // C in |c_k| <= C/k!, validated at construction
  std::optional<int> declared_rank;  // user-asserted chaos rank, wins for m >= 2

  static PowerSeries from_coefficients(std::vector<double> c,
                                       std::optional<int> declared_rank = std::nullopt);
  static PowerSeries with_growth_bound(std::vector<double> c, double growth_bound,
                                       std::optional<int> declared_rank = std::nullopt);

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double eval(double x) const;  // Horner
};

/// Convenience constructors for the probabilists' Hermite polynomial He_n of a
/// N(0, sigma^2) argument, expanded in monomials of the raw variable.
PowerSeries hermite_series(int n, double sigma = 1.0);

/// He_n(x), probabilists' convention (He_0=1, He_1=x, He_2=x^2-1, ...).
double hermite_poly(int n, double x);

/// (n-1)!! for even n >= 0 (moment of a standard Gaussian); odd n gives 0.
double gaussian_moment(int n);  // E[Z^n], Z ~ N(0,1)

/// Coefficient of He_d in the monomial expansion x^k = sum_d b(k,d) He_d(x);
/// zero unless d <= k and d == k (mod 2). b(k,d) = k! / (d! 2^p p!), p=(k-d)/2.
double monomial_hermite_coeff(int k, int d);

/// Hermite coefficients g_d of G against N(0, sigma^2):
/// G(x) = sum_d g_d He_d(x/sigma), g_d = E[G(sigma Z) He_d(Z)] / d!.
std::vector<double> hermite_coefficients(const PowerSeries& s, double sigma);

/// Exact Hermite rank of G with respect to N(0, sigma^2): smallest d >= 1 with
/// |g_d| above an absolute tolerance. Throws if all coefficients vanish.
int hermite_rank(const PowerSeries& s, double sigma, double tol = 1e-12);

/// Combinatorial envelope parameters for the truncation majorant.
struct TruncationEnv {
  int m = 1;
  double frak_L = 1.0;
};

/// Smallest M with tail_{k>M} |c_k| * moment_bound^k * env(k) < tol, where
/// env(k) = sqrt((km)!) (m!)^k m^k (2km)^2 L^{km} mirrors the reduction
/// majorant. Beyond the stored coefficients the tail is extended with
/// growth_bound/k!; a non-decreasing extended tail raises "no finite M".
int truncation_order(const PowerSeries& s, double moment_bound, double tol,
                     const TruncationEnv& env = {});

}  // namespace hml
