#include "hml/contraction.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hml {

int ContractionGraph::delta() const {
  return std::accumulate(free_degrees.begin(), free_degrees.end(), 0);
}

static void check_km(int k, int m, int ceiling) {
  if (k < 1 || m < 1) throw std::invalid_argument("contraction: k and m must be >= 1");
  if (static_cast<long long>(k) * m > ceiling)
    throw std::invalid_argument("contraction: k*m = " + std::to_string(k * m) +
                                " exceeds the combinatorial ceiling " + std::to_string(ceiling));
}

bool is_admissible(const ContractionVector& v) {
  if (v.k < 1 || v.m < 1) return false;
  if (static_cast<int>(v.r.size()) != v.k - 1) return false;
  int sum = 0;
  for (int j = 1; j <= v.k - 1; ++j) {
    const int rj = v.r[j - 1];
    const int degree = j * v.m - 2 * sum;  // accumulated free degree before step j
    if (rj < 0 || rj > std::min(v.m, degree)) return false;
    sum += rj;
  }
  return v.delta == v.k * v.m - 2 * sum;
}

std::vector<ContractionVector> enumerate_contractions(int k, int m, int ceiling) {
  check_km(k, m, ceiling);
  std::vector<ContractionVector> out;
  std::vector<int> r(k - 1, 0);

  // depth-first over steps j = 1..k-1; degree = accumulated free degree before step j
  auto rec = [&](auto&& self, int j, int sum) -> void {
    if (j == k) {
      ContractionVector v;
      v.k = k;
      v.m = m;
      v.r = r;
      v.delta = k * m - 2 * sum;
      out.push_back(std::move(v));
      return;
    }
    const int degree = j * m - 2 * sum;
    const int rmax = std::min(m, degree);
    for (int rj = 0; rj <= rmax; ++rj) {
      r[j - 1] = rj;
      self(self, j + 1, sum + rj);
    }
  };
  rec(rec, 1, 0);
  return out;
}

mpz_class c1_constant(const ContractionVector& v) {
  if (!is_admissible(v)) throw std::invalid_argument("c1_constant: vector not admissible");
  mpz_class c(1);
  int sum = 0;
  for (int j = 1; j <= v.k - 1; ++j) {
    const int rj = v.r[j - 1];
    const int degree = j * v.m - 2 * sum;
    mpz_class f, b1, b2;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(rj));
    mpz_bin_uiui(b1.get_mpz_t(), static_cast<unsigned long>(v.m), static_cast<unsigned long>(rj));
    mpz_bin_uiui(b2.get_mpz_t(), static_cast<unsigned long>(degree), static_cast<unsigned long>(rj));
    c *= f * b1 * b2;
    sum += rj;
  }
  return c;
}

std::map<int, mpz_class> chaos_projection_profile(int k, int m, int ceiling) {
  check_km(k, m, ceiling);
  std::map<int, mpz_class> profile;
  for (const auto& v : enumerate_contractions(k, m, ceiling)) profile[v.delta] += c1_constant(v);
  return profile;
}

std::vector<ContractionGraph> enumerate_graphs(const ContractionVector& v) {
  if (!is_admissible(v)) throw std::invalid_argument("enumerate_graphs: vector not admissible");
  const int k = v.k, m = v.m;
  std::vector<ContractionGraph> out;

  std::vector<std::vector<int>> beta(k);
  for (int j = 0; j < k; ++j) beta[j].assign(j, 0);
  std::vector<int> free_deg(k, m);  // remaining free degree while building

  // When node j (0-based, j >= 1) joins, it draws r[j-1] edges to nodes 0..j-1,
  // each consuming one free slot on both endpoints.
  auto emit = [&]() {
    ContractionGraph g;
    g.k = k;
    g.m = m;
    g.beta = beta;
    g.free_degrees = free_deg;
    g.multiplicity = 1;
    // slot choices: product over join steps of C(free slots available, beta)
    std::vector<int> avail(k, m);
    for (int j = 1; j < k; ++j) {
      for (int q = 0; q < j; ++q) {
        mpz_class b;
        mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(avail[q]),
                     static_cast<unsigned long>(beta[j][q]));
        g.multiplicity *= b;
        avail[q] -= beta[j][q];
      }
      avail[j] -= std::accumulate(beta[j].begin(), beta[j].end(), 0);
    }
    out.push_back(std::move(g));
  };

  // distribute need edges from node j among prior nodes q = 0..j-1
  auto distribute = [&](auto&& self, auto&& next_node, int j, int q, int need) -> void {
    if (q == j) {
      if (need == 0) next_node(next_node, j + 1);
      return;
    }
    const int cap = std::min(need, free_deg[q]);
    for (int e = 0; e <= cap; ++e) {
      beta[j][q] = e;
      free_deg[q] -= e;
      self(self, next_node, j, q + 1, need - e);
      free_deg[q] += e;
    }
    beta[j][q] = 0;
  };

  auto node = [&](auto&& self, int j) -> void {
    if (j == k) {
      emit();
      return;
    }
    const int need = v.r[j - 1];
    free_deg[j] -= need;
    distribute(distribute, self, j, 0, need);
    free_deg[j] += need;
  };

  if (k == 1) {
    emit();
  } else {
    node(node, 1);
  }
  return out;
}

double log_c4_bound(int k, int k2, int m, int d, double frak_L) {
  if (k < 1 || k2 < 1 || m < 1) throw std::invalid_argument("c4_bound: k, k', m must be >= 1");
  if (d == 0) throw std::invalid_argument("c4_bound: d = 0 rejected (division by d^2)");
  if (d < 0 || d > std::min(k, k2) * m)
    throw std::invalid_argument("c4_bound: need 0 < d <= min(k,k')*m");
  if (!(frak_L > 0.0)) throw std::invalid_argument("c4_bound: frak_L must be positive");
  const double kk = static_cast<double>(k + k2);
  double lg = 0.5 * (std::lgamma(static_cast<double>(k) * m + 1.0) +
                     std::lgamma(static_cast<double>(k2) * m + 1.0));
  lg += kk * std::lgamma(static_cast<double>(m) + 1.0);
  lg += m * std::log(kk);
  lg += 2.0 * std::log(kk * m);
  lg += kk * std::log(static_cast<double>(m));
  lg += kk * m * std::log(frak_L);
  lg -= 2.0 * std::log(static_cast<double>(d));
  return lg;
}

double c4_bound(int k, int k2, int m, int d, double frak_L) {
  return std::exp(log_c4_bound(k, k2, m, d, frak_L));
}

}  // namespace hml
