#include "qmetric/group.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <sstream>

#include "qmetric/error.hpp"

namespace qmetric {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw GroupError("integer overflow in group product");
  return out;
}

std::int64_t checked_neg(std::int64_t a) {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(std::int64_t{0}, a, &out)) throw GroupError("integer overflow in inverse");
  return out;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::free_abelian: return "free_abelian";
    case Family::product_z_finite: return "product_z_finite";
    case Family::infinite_dihedral: return "infinite_dihedral";
  }
  return "unknown";
}

std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < g.z.size(); ++i) os << (i ? "," : "") << g.z[i];
  os << ';' << g.f << ')';
  return os.str();
}

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
  // splitmix-style mixing of each coordinate
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(g.f);
  for (auto v : g.z) {
    std::uint64_t x = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    h ^= x ^ (x >> 31);
  }
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// FiniteGroupTable

FiniteGroupTable FiniteGroupTable::from_table(std::vector<std::vector<int>> table) {
  const int n = static_cast<int>(table.size());
  if (n < 1) throw GroupError("finite group table must have order >= 1");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(table[i].size()) != n)
      throw GroupError("finite group table row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < n; ++j)
      if (table[i][j] < 0 || table[i][j] >= n)
        throw GroupError("table entry (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  }

  int identity = -1;
  for (int e = 0; e < n && identity < 0; ++e) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = table[e][i] == i && table[i][e] == i;
    if (ok) identity = e;
  }
  if (identity < 0) throw GroupError("finite group table has no two-sided identity");

  std::vector<int> inverse(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (table[i][j] == identity && table[j][i] == identity) {
        inverse[i] = j;
        break;
      }
    }
    if (inverse[i] < 0) throw GroupError("element " + std::to_string(i) + " has no inverse");
  }

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]])
          throw GroupError("table is not associative at triple (" + std::to_string(a) + "," +
                           std::to_string(b) + "," + std::to_string(c) + ")");

  FiniteGroupTable out;
  out.table_ = std::move(table);
  out.inverse_ = std::move(inverse);
  out.identity_ = identity;
  return out;
}

FiniteGroupTable FiniteGroupTable::cyclic(int order) {
  if (order < 1) throw GroupError("cyclic group order must be >= 1");
  std::vector<std::vector<int>> t(order, std::vector<int>(order));
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) t[i][j] = (i + j) % order;
  return from_table(std::move(t));
}

FiniteGroupTable FiniteGroupTable::symmetric3() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));

  auto index_of = [&](const std::array<int, 3>& q) {
    return static_cast<int>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::vector<int>> t(6, std::vector<int>(6));
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      std::array<int, 3> c{};
      for (int k = 0; k < 3; ++k) c[k] = perms[i][perms[j][k]];  // (i*j)(k) = i(j(k))
      t[i][j] = index_of(c);
    }
  }
  return from_table(std::move(t));
}

// ---------------------------------------------------------------------------
// Group

Group::Group(GroupSpec spec) : spec_(std::move(spec)) {
  switch (spec_.family) {
    case Family::free_abelian:
      if (spec_.rank < 1) throw GroupError("free_abelian rank must be >= 1");
      identity_ = GroupElement{std::vector<std::int64_t>(spec_.rank, 0), 0};
      for (int i = 0; i < spec_.rank; ++i) {
        for (std::int64_t s : {1, -1}) {
          GroupElement g = identity_;
          g.z[i] = s;
          generators_.push_back(std::move(g));
        }
      }
      break;
    case Family::product_z_finite: {
      if (!spec_.finite) throw GroupError("product_z_finite requires a finite group table");
      const auto& F = *spec_.finite;
      identity_ = GroupElement{{0}, F.identity()};
      // symmetric closure of {(1, f)}: (1, f) and its inverse (-1, f^{-1})
      for (int f = 0; f < F.order(); ++f) {
        generators_.push_back(GroupElement{{1}, f});
        generators_.push_back(GroupElement{{-1}, F.inv(f)});
      }
      break;
    }
    case Family::infinite_dihedral:
      identity_ = GroupElement{{0}, 0};
      generators_ = {GroupElement{{1}, 0}, GroupElement{{-1}, 0}, GroupElement{{0}, 1}};
      break;
  }

  if (spec_.generators) {
    const auto& gens = *spec_.generators;
    if (gens.empty()) throw GroupError("generator override must be non-empty");
    std::set<GroupElement> set;
    for (const auto& g : gens) {
      check_element(g);
      set.insert(g);
    }
    for (const auto& g : set)
      if (!set.contains(inv(g)))
        throw GroupError("generator override is not symmetric: missing inverse of " + to_string(g));
    generators_.assign(gens.begin(), gens.end());
  }
}

std::size_t Group::z_rank() const noexcept {
  return spec_.family == Family::free_abelian ? static_cast<std::size_t>(spec_.rank) : 1;
}

int Group::finite_order() const noexcept {
  switch (spec_.family) {
    case Family::product_z_finite: return spec_.finite->order();
    case Family::infinite_dihedral: return 2;
    default: return 1;
  }
}

void Group::check_element(const GroupElement& g) const {
  if (g.z.size() != z_rank())
    throw GroupError("element " + to_string(g) + " has integer part of length " +
                     std::to_string(g.z.size()) + ", expected " + std::to_string(z_rank()));
  const int fo = finite_order();
  if (spec_.family == Family::free_abelian ? g.f != 0 : (g.f < 0 || g.f >= fo))
    throw GroupError("element " + to_string(g) + " has finite part out of range for " +
                     to_string(spec_.family));
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
  check_element(a);
  check_element(b);
  GroupElement out;
  switch (spec_.family) {
    case Family::free_abelian:
      out.z.resize(a.z.size());
      for (std::size_t i = 0; i < a.z.size(); ++i) out.z[i] = checked_add(a.z[i], b.z[i]);
      break;
    case Family::product_z_finite:
      out.z = {checked_add(a.z[0], b.z[0])};
      out.f = spec_.finite->mul(a.f, b.f);
      break;
    case Family::infinite_dihedral:
      out.z = {checked_add(a.z[0], a.f ? checked_neg(b.z[0]) : b.z[0])};
      out.f = a.f ^ b.f;
      break;
  }
  return out;
}

GroupElement Group::inv(const GroupElement& a) const {
  check_element(a);
  GroupElement out;
  switch (spec_.family) {
    case Family::free_abelian:
      out.z.resize(a.z.size());
      for (std::size_t i = 0; i < a.z.size(); ++i) out.z[i] = checked_neg(a.z[i]);
      break;
    case Family::product_z_finite:
      out.z = {checked_neg(a.z[0])};
      out.f = spec_.finite->inv(a.f);
      break;
    case Family::infinite_dihedral:
      // reflections are involutions; rotations invert the integer part
      out.z = {a.f ? a.z[0] : checked_neg(a.z[0])};
      out.f = a.f;
      break;
  }
  return out;
}

GroupElement Group::word_eval(std::span<const std::size_t> word) const {
  GroupElement acc = identity_;
  for (auto idx : word) {
    if (idx >= generators_.size())
      throw GroupError("generator index " + std::to_string(idx) + " out of range (have " +
                       std::to_string(generators_.size()) + ")");
    acc = mul(acc, generators_[idx]);
  }
  return acc;
}

std::string Group::describe() const {
  std::ostringstream os;
  os << to_string(spec_.family);
  if (spec_.family == Family::free_abelian) os << "(rank=" << spec_.rank << ")";
  if (spec_.family == Family::product_z_finite) os << "(|F|=" << spec_.finite->order() << ")";
  if (spec_.generators) os << "[custom generators]";
  return os.str();
}

Group make_group(GroupSpec spec) { return Group(std::move(spec)); }

Group make_free_abelian(int rank) {
  GroupSpec s;
  s.family = Family::free_abelian;
  s.rank = rank;
  return Group(std::move(s));
}

Group make_product_z_finite(FiniteGroupTable finite) {
  GroupSpec s;
  s.family = Family::product_z_finite;
  s.finite = std::move(finite);
  return Group(std::move(s));
}

Group make_infinite_dihedral() {
  GroupSpec s;
  s.family = Family::infinite_dihedral;
  return Group(std::move(s));
}

}  // namespace qmetric
