#pragma once

#include <gmpxx.h>

#include <map>
#include <vector>

namespace hml {

/// One admissible contraction vector arising when (y_t)^k is expanded by
/// iterated product-formula applications. r has length k-1 (one entry per
/// multiplication step); delta = k*m - 2*sum(r) is the resulting chaos degree.
struct ContractionVector {
  int k = 1;
  int m = 1;
  std::vector<int> r;  // length k-1
  int delta = 0;

  bool operator==(const ContractionVector&) const = default;
};

/// Interaction graph of one admissible slot assignment behind a contraction
/// vector: k nodes of capacity m, internal edge multiplicities beta[j][q]
/// (j > q, stored lower-triangular), and per-node free degrees.
struct ContractionGraph {
  int k = 1;
  int m = 1;
  std::vector<std::vector<int>> beta;  // beta[j] has j entries (q = 0..j-1)
  std::vector<int> free_degrees;       // M_j, length k
  mpz_class multiplicity;              // number of slot choices realizing this edge table

  int delta() const;
};

// Product of enumerate_contractions for all k*m above this is refused.
inline constexpr int kDefaultCombinatorialCeiling = 40;

/// All admissible contraction vectors for (y^k), each exactly once.
/// k = 1 yields the single empty vector with delta = m.
std::vector<ContractionVector> enumerate_contractions(
    int k, int m, int ceiling = kDefaultCombinatorialCeiling);

bool is_admissible(const ContractionVector& v);

/// C1(r,k,m) = prod_j r_j! * C(m,r_j) * C(j*m - 2*sum_{l<j} r_l, r_j), exact.
mpz_class c1_constant(const ContractionVector& v);

/// Aggregate chaos-projection coefficients of (y_t)^k: for each attainable
/// degree d, the sum of C1 over admissible vectors with delta = d.
std::map<int, mpz_class> chaos_projection_profile(
    int k, int m, int ceiling = kDefaultCombinatorialCeiling);

/// All edge-multiplicity tables consistent with v, with multiplicities.
/// Summing multiplicity over the result and multiplying by
/// prod_j r_j! * C(m,r_j) recovers c1_constant(v).
std::vector<ContractionGraph> enumerate_graphs(const ContractionVector& v);

/// log of the Lemma-4.2 covariance bound constant
/// C4(k,k',m,d) = sqrt((km)!(k'm)!) (m!)^{k+k'} (k+k')^m ((k+k')m)^2 m^{k+k'} L^{(k+k')m} / d^2.
double log_c4_bound(int k, int k2, int m, int d, double frak_L);

/// exp(log_c4_bound); may overflow to +inf for large arguments.
double c4_bound(int k, int k2, int m, int d, double frak_L);

}  // namespace hml
