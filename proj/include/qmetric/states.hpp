#pragma once

// States on the reduced group C*-algebra, represented by their coefficient
// functions g -> phi(lambda_g). Every metric computed here depends on nothing else.

#include <optional>
#include <variant>
#include <vector>

#include "qmetric/algebra.hpp"

namespace qmetric {

struct TraceState {};        // phi(lambda_g) = [g == e]
struct ConstantOneState {};  // phi(lambda_g) = 1
/// g -> prod_i z_i^{m_i} on the integer part of g.
struct CharacterState {
  std::vector<cplx> z;
};
/// Explicit table; entries missing from the table read as zero unless strict.
struct TableState {
  AlgebraElement::Map entries;
  bool strict = false;
};
/// phi(lambda_g) = <lambda_g xi, xi> for a finitely supported unit vector xi.
struct VectorState {
  AlgebraElement xi;
};
/// phi(a) = tau(rho a) with rho = b^*b / tau(b^*b).
struct DensityState {
  AlgebraElement b;
  AlgebraElement rho;
};

class StateRep {
 public:
  using Variant = std::variant<TraceState, ConstantOneState, CharacterState, TableState, VectorState, DensityState>;

  static StateRep trace();
  static StateRep one();
  /// Requires |z_i| = 1 and a family on which the map is a homomorphism.
  static StateRep character(const Group& group, std::vector<cplx> z);
  static StateRep table(AlgebraElement::Map entries, bool strict = false);
  /// Requires sum |xi(h)|^2 = 1 within 1e-12.
  static StateRep vector(const Group& group, AlgebraElement xi);
  static StateRep density(const Group& group, AlgebraElement b);

  const Variant& variant() const noexcept { return v_; }
  const char* kind() const noexcept;

  /// phi(lambda_g).
  cplx coeff(const GroupElement& g, const Group& group) const;

 private:
  explicit StateRep(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct PsdCheck {
  bool pass = false;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

inline constexpr std::size_t kMaxGramSize = 2000;

/// Smallest eigenvalue of the Gram matrix [phi(lambda_{g_i^{-1} g_j})] over the
/// ball; passes iff it is >= -tol * max(1, largest |eigenvalue|).
PsdCheck pd_check(const StateRep& s, const Ball& ball, double tol = 1e-8);

struct KappaBound {
  double kappa_upper = 1.0;  // (sum_g |rho(g)|)^2, certified
  double kappa_lower = 1.0;  // (||compression of rho||)^2
};

/// Certified constant kappa with phi <= kappa tau, for density states only.
KappaBound kappa_bounds(const StateRep& s, const Ball& ball, const NormOptions& opts = {});

}  // namespace qmetric
