#pragma once

// Canonical element forms and arithmetic for the three discrete group families:
//
//   free_abelian(n)        Z^n, elements are integer vectors, product is addition.
//   product_z_finite(F)    Z x F with the usual product of pairs (m, f)(m', f') = (m + m', f f').
//   infinite_dihedral      Z x| Z_2 with (m, s)(m', s') = (m + (-1)^s m', s xor s').
//
// Every element has exactly one representation, so equality of GroupElement values
// is equality in the group.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qmetric {

enum class Family { free_abelian, product_z_finite, infinite_dihedral };

std::string to_string(Family family);

struct GroupElement {
  std::vector<std::int64_t> z;  // length = rank for free_abelian, 1 otherwise
  int f = 0;                    // finite-component index; 0 and unused for free_abelian

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

std::string to_string(const GroupElement& g);

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept;
};

/// Finite group given by its Cayley table; table[i][j] is the index of i*j.
class FiniteGroupTable {
 public:
  /// Validates closure, identity, inverses and associativity; throws GroupError
  /// naming the first violating triple.
  static FiniteGroupTable from_table(std::vector<std::vector<int>> table);

  static FiniteGroupTable cyclic(int order);
  /// S_3 with elements indexed 0..5 as permutations of {0,1,2} in lexicographic order.
  static FiniteGroupTable symmetric3();

  int order() const noexcept { return static_cast<int>(table_.size()); }
  int mul(int a, int b) const { return table_[a][b]; }
  int inv(int a) const { return inverse_[a]; }
  int identity() const noexcept { return identity_; }
  const std::vector<std::vector<int>>& table() const noexcept { return table_; }

 private:
  FiniteGroupTable() = default;
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  int identity_ = 0;
};

struct GroupSpec {
  Family family = Family::free_abelian;
  int rank = 1;                                          // free_abelian only
  std::optional<FiniteGroupTable> finite;                // product_z_finite only
  std::optional<std::vector<GroupElement>> generators;   // symmetric override
};

/// Immutable group handle. All operations are pure.
class Group {
 public:
  explicit Group(GroupSpec spec);

  Family family() const noexcept { return spec_.family; }
  /// Length of the integer part of an element.
  std::size_t z_rank() const noexcept;
  const FiniteGroupTable* finite() const noexcept {
    return spec_.finite ? &*spec_.finite : nullptr;
  }
  /// Order of the finite component: |F| for product_z_finite, 2 for dihedral, 1 otherwise.
  int finite_order() const noexcept;
  bool uses_default_generators() const noexcept { return !spec_.generators.has_value(); }

  const GroupElement& identity() const noexcept { return identity_; }
  const std::vector<GroupElement>& generators() const noexcept { return generators_; }

  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  /// Left-to-right product of generators; the empty word is the identity.
  GroupElement word_eval(std::span<const std::size_t> word) const;

  /// Throws GroupError unless `g` has the shape and ranges of this family.
  void check_element(const GroupElement& g) const;
  bool is_identity(const GroupElement& g) const { return g == identity_; }

  std::string describe() const;

 private:
  GroupSpec spec_;
  GroupElement identity_;
  std::vector<GroupElement> generators_;
};

Group make_group(GroupSpec spec);

/// Convenience constructors for the families used throughout.
Group make_free_abelian(int rank);
Group make_product_z_finite(FiniteGroupTable finite);
Group make_infinite_dihedral();

}  // namespace qmetric
