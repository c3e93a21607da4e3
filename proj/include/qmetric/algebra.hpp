#pragma once

// The group algebra K(G) of finitely supported sums a = sum_g alpha_g lambda_g,
// its compressions to l^2 of a ball, the Dirac commutator [D, a] with
// D(delta_g) = L(g) delta_g, and operator-norm estimation.
//
// Commutator sign convention: [D, a] has entry alpha_g (L(gh) - L(h)) at (gh, h).

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "qmetric/group.hpp"
#include "qmetric/word_length.hpp"

namespace qmetric {

using cplx = std::complex<double>;

/// Finitely supported coefficient map g -> alpha_g. Exact zeros are never stored.
class AlgebraElement {
 public:
  using Map = std::map<GroupElement, cplx>;

  AlgebraElement() = default;
  static AlgebraElement basis(const GroupElement& g, cplx coeff = 1.0);

  /// Adds `c` to the coefficient at g, dropping the entry if it becomes zero.
  void add(const GroupElement& g, cplx c);
  cplx coeff(const GroupElement& g) const;

  const Map& terms() const noexcept { return terms_; }
  std::size_t support_size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  AlgebraElement& operator*=(cplx s);
  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b);

 private:
  Map terms_;
};

/// Convolution product: (ab)(k) = sum_{gh = k} alpha_g beta_h.
AlgebraElement conv_mul(const Group& group, const AlgebraElement& a, const AlgebraElement& b);
/// a*(g) = conj(alpha_{g^{-1}}).
AlgebraElement star(const Group& group, const AlgebraElement& a);
/// tau(a) = <a delta_e, delta_e> = alpha_e.
cplx trace_coeff(const Group& group, const AlgebraElement& a);

/// Sparse matrix over l^2(ball), stored column by column.
class TruncatedOperator {
 public:
  struct Entry {
    std::size_t row;
    cplx value;
  };

  TruncatedOperator() = default;
  explicit TruncatedOperator(std::size_t dim) : dim_(dim), col_start_(dim + 1, 0) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  std::span<const Entry> column(std::size_t j) const {
    return {entries_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
  }
  cplx at(std::size_t row, std::size_t col) const;

  /// y = T x
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  /// x = T^* y
  void apply_adjoint(std::span<const cplx> y, std::span<cplx> x) const;

  /// Coordinate-format text: "row col re im" per line, 0-based ball positions.
  void write_coordinate(std::ostream& os) const;

  /// Columns must be appended in order 0..dim-1.
  void append_column(std::vector<Entry> col);

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> col_start_{0};
  std::size_t next_col_ = 0;
};

/// Compression of the left convolution operator of `a` to l^2(ball).
TruncatedOperator op_matrix(const AlgebraElement& a, const Ball& ball);
/// Compression of [D, a] to l^2(ball); rows leaving the ball are dropped.
TruncatedOperator commutator_matrix(const AlgebraElement& a, const Ball& ball);

enum class NormMethod {
  power,    // power iteration on T^*T
  lanczos,  // restarted Lanczos on T^*T; same guarantee, faster on clustered spectra
};

struct NormOptions {
  double tol = 1e-9;
  int max_iter = 10000;  // matrix-vector products with T^*T
  NormMethod method = NormMethod::power;
};

struct NormEstimate {
  double value = 0.0;  // ||T v|| for a unit vector v, hence <= ||T||
  bool converged = false;
  int iterations = 0;
  std::vector<cplx> right;  // unit v
  std::vector<cplx> left;   // T v / ||T v||
};

/// Largest singular value by power iteration (or Lanczos) on T^*T, started
/// from the normalized all-ones vector, stopped on relative Rayleigh-quotient
/// change below tol. The result is never below the largest column norm of T.
NormEstimate norm_estimate(const TruncatedOperator& t, const NormOptions& opts = {},
                           std::span<const cplx> start = {});
double norm_lower(const TruncatedOperator& t, double tol = 1e-9, int max_iter = 10000);

/// sum_g |alpha_g| L(g), a certified upper bound for ||[D, a]||.
double commutator_norm_upper_l1(const AlgebraElement& a, const Ball& ball);
/// (sum_g |alpha_g|^2 L(g)^2)^{1/2}, a certified lower bound for ||[D, a]||.
double weighted_l2_lower(const AlgebraElement& a, const Ball& ball);

/// Precomputed commutators [D, lambda_g] for a fixed list of group elements on
/// a fixed ball, so that [D, sum_i alpha_i lambda_{g_i}] can be assembled and
/// differentiated cheaply.
class CommutatorBasis {
 public:
  CommutatorBasis(const Ball& ball, std::vector<GroupElement> elements);

  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }

  TruncatedOperator assemble(std::span<const cplx> alpha) const;
  /// u^* [D, lambda_{g_i}] v for every basis element.
  std::vector<cplx> sandwich(std::span<const cplx> u, std::span<const cplx> v) const;

 private:
  struct Shift {
    std::size_t target;  // ball position of g_i h, or npos
    double weight;       // L(g_i h) - L(h)
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t dim_ = 0;
  std::vector<GroupElement> elements_;
  std::vector<std::vector<Shift>> shifts_;  // [i][h]
};

}  // namespace qmetric
