#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/group.hpp"

namespace qmetric::test {

/// Z, Z^2, Z x Z_2, Z x Z_3, Z x S_3, infinite dihedral.
inline std::vector<Group> all_families() {
  return {make_free_abelian(1),
          make_free_abelian(2),
          make_product_z_finite(FiniteGroupTable::cyclic(2)),
          make_product_z_finite(FiniteGroupTable::cyclic(3)),
          make_product_z_finite(FiniteGroupTable::symmetric3()),
          make_infinite_dihedral()};
}

/// The four families named by the acceptance checks.
inline std::vector<Group> core_families() {
  return {make_free_abelian(1), make_free_abelian(2), make_product_z_finite(FiniteGroupTable::cyclic(2)),
          make_infinite_dihedral()};
}

/// Largest singular value by dense SVD.
inline double dense_norm(const TruncatedOperator& t) {
  const auto n = static_cast<Eigen::Index>(t.dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t j = 0; j < t.dim(); ++j)
    for (const auto& e : t.column(j)) m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(j)) = e.value;
  if (n == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

/// Minimal word length by exhaustive search over all words of length <= max_len.
inline int brute_force_length(const Group& g, const GroupElement& target, int max_len) {
  std::vector<GroupElement> frontier = {g.identity()};
  if (target == g.identity()) return 0;
  for (int len = 1; len <= max_len; ++len) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier)
      for (const auto& s : g.generators()) {
        auto y = g.mul(x, s);
        if (y == target) return len;
        next.push_back(std::move(y));
      }
    frontier = std::move(next);
  }
  return -1;
}

inline AlgebraElement random_element(const std::vector<GroupElement>& pool, std::size_t max_support,
                                     std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(1, max_support);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AlgebraElement a;
  const std::size_t want = std::min(size(rng), pool.size());
  while (a.support_size() < want) {
    const auto& g = pool[pick(rng)];
    if (a.coeff(g) != cplx{}) continue;
    cplx c(u(rng), u(rng));
    if (std::abs(c) > 1.0 || c == cplx{}) continue;
    a.add(g, c);
  }
  return a;
}

}  // namespace qmetric::test
