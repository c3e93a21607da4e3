#include "qmetric/states.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qmetric/error.hpp"

namespace qmetric {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

StateRep StateRep::trace() { return StateRep(TraceState{}); }
StateRep StateRep::one() { return StateRep(ConstantOneState{}); }

StateRep StateRep::character(const Group& group, std::vector<cplx> z) {
  if (z.size() != group.z_rank())
    throw DomainError("character needs " + std::to_string(group.z_rank()) + " parameters, got " +
                      std::to_string(z.size()));
  for (const auto& zi : z)
    if (std::abs(std::abs(zi) - 1.0) > 1e-12) throw DomainError("character parameters must have modulus 1");
  if (group.family() == Family::infinite_dihedral &&
      !(std::abs(z[0] - 1.0) <= 1e-12 || std::abs(z[0] + 1.0) <= 1e-12))
    throw DomainError("on the infinite dihedral group only z = +1 or -1 define characters");
  return StateRep(CharacterState{std::move(z)});
}

StateRep StateRep::table(AlgebraElement::Map entries, bool strict) {
  return StateRep(TableState{std::move(entries), strict});
}

StateRep StateRep::vector(const Group& group, AlgebraElement xi) {
  double s = 0;
  for (const auto& [h, x] : xi.terms()) {
    group.check_element(h);
    s += std::norm(x);
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("vector state needs a unit vector, got squared norm " + std::to_string(s));
  return StateRep(VectorState{std::move(xi)});
}

StateRep StateRep::density(const Group& group, AlgebraElement b) {
  if (b.empty()) throw DomainError("density generator b must be nonzero");
  for (const auto& [g, x] : b.terms()) group.check_element(g);
  AlgebraElement rho = conv_mul(group, star(group, b), b);
  const double tr = trace_coeff(group, rho).real();  // = sum |b_g|^2 > 0
  rho *= 1.0 / tr;
  return StateRep(DensityState{std::move(b), std::move(rho)});
}

const char* StateRep::kind() const noexcept {
  return std::visit(overloaded{[](const TraceState&) { return "trace"; },
                               [](const ConstantOneState&) { return "one"; },
                               [](const CharacterState&) { return "character"; },
                               [](const TableState&) { return "table"; },
                               [](const VectorState&) { return "vector"; },
                               [](const DensityState&) { return "density"; }},
                    v_);
}

cplx StateRep::coeff(const GroupElement& g, const Group& group) const {
  group.check_element(g);
  return std::visit(
      overloaded{
          [&](const TraceState&) { return group.is_identity(g) ? cplx(1.0) : cplx{}; },
          [&](const ConstantOneState&) { return cplx(1.0); },
          [&](const CharacterState& c) {
            // z^m by squaring: exact for z in {1, -1, i, -i}, O(log m) roundings otherwise
            cplx out = 1.0;
            for (std::size_t i = 0; i < c.z.size(); ++i) {
              cplx base = g.z[i] < 0 ? std::conj(c.z[i]) : c.z[i];
              for (std::uint64_t m = g.z[i] < 0 ? 0 - static_cast<std::uint64_t>(g.z[i]) : g.z[i]; m; m >>= 1) {
                if (m & 1) out *= base;
                base *= base;
              }
            }
            return out;
          },
          [&](const TableState& t) {
            auto it = t.entries.find(g);
            if (it != t.entries.end()) return it->second;
            if (t.strict) throw OutOfBallError("table state has no entry for " + to_string(g), -1);
            return cplx{};
          },
          [&](const VectorState& v) {
            // <lambda_g xi, xi> = sum_h xi(g^{-1} h) conj(xi(h))
            const GroupElement ginv = group.inv(g);
            cplx acc{};
            for (const auto& [h, x] : v.xi.terms()) acc += v.xi.coeff(group.mul(ginv, h)) * std::conj(x);
            return acc;
          },
          [&](const DensityState& d) { return d.rho.coeff(group.inv(g)); },
      },
      v_);
}

PsdCheck pd_check(const StateRep& s, const Ball& ball, double tol) {
  const std::size_t n = ball.size();
  if (n > kMaxGramSize)
    throw ResourceError("Gram matrix of size " + std::to_string(n) + " exceeds the dense limit of " +
                        std::to_string(kMaxGramSize));
  const Group& group = ball.group();
  std::vector<GroupElement> inverses;
  inverses.reserve(n);
  for (const auto& e : ball.entries()) inverses.push_back(group.inv(e.element));

  Eigen::MatrixXcd gram(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      gram(i, j) = s.coeff(group.mul(inverses[i], ball[j].element), group);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  PsdCheck out;
  out.min_eigenvalue = ev.minCoeff();
  out.max_eigenvalue = ev.maxCoeff();
  const double scale = std::max(1.0, std::max(std::abs(out.min_eigenvalue), std::abs(out.max_eigenvalue)));
  out.pass = out.min_eigenvalue >= -tol * scale;
  return out;
}

KappaBound kappa_bounds(const StateRep& s, const Ball& ball, const NormOptions& opts) {
  const auto* d = std::get_if<DensityState>(&s.variant());
  if (!d) throw DomainError(std::string("kappa_bounds needs a density state, got ") + s.kind());
  double l1 = 0;
  for (const auto& [g, x] : d->rho.terms()) l1 += std::abs(x);
  KappaBound kb;
  kb.kappa_upper = l1 * l1;
  const double lower = norm_estimate(op_matrix(d->rho, ball), opts).value;
  kb.kappa_lower = std::min(lower * lower, kb.kappa_upper);
  return kb;
}

}  // namespace qmetric
