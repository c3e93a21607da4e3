#include "qmetric/algebra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "qmetric/error.hpp"

namespace qmetric {

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement AlgebraElement::basis(const GroupElement& g, cplx coeff) {
  AlgebraElement a;
  a.add(g, coeff);
  return a;
}

void AlgebraElement::add(const GroupElement& g, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(g, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

cplx AlgebraElement::coeff(const GroupElement& g) const {
  auto it = terms_.find(g);
  return it == terms_.end() ? cplx{} : it->second;
}

AlgebraElement& AlgebraElement::operator*=(cplx s) {
  if (s == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [g, c] : terms_) c *= s;
  return *this;
}

AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) {
  for (const auto& [g, c] : b.terms()) a.add(g, c);
  return a;
}

AlgebraElement conv_mul(const Group& group, const AlgebraElement& a, const AlgebraElement& b) {
  AlgebraElement out;
  for (const auto& [g, x] : a.terms())
    for (const auto& [h, y] : b.terms()) out.add(group.mul(g, h), x * y);
  return out;
}

AlgebraElement star(const Group& group, const AlgebraElement& a) {
  AlgebraElement out;
  for (const auto& [g, x] : a.terms()) out.add(group.inv(g), std::conj(x));
  return out;
}

cplx trace_coeff(const Group& group, const AlgebraElement& a) { return a.coeff(group.identity()); }

// ---------------------------------------------------------------------------
// TruncatedOperator

cplx TruncatedOperator::at(std::size_t row, std::size_t col) const {
  for (const auto& e : column(col))
    if (e.row == row) return e.value;
  return {};
}

void TruncatedOperator::append_column(std::vector<Entry> col) {
  if (next_col_ >= dim_) throw DomainError("too many columns appended to truncated operator");
  std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
  for (auto& e : col)
    if (e.value != cplx{}) entries_.push_back(e);
  col_start_[++next_col_] = entries_.size();
}

void TruncatedOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  std::fill(y.begin(), y.end(), cplx{});
  for (std::size_t j = 0; j < dim_; ++j) {
    const cplx xj = x[j];
    if (xj == cplx{}) continue;
    for (const auto& e : column(j)) y[e.row] += e.value * xj;
  }
}

void TruncatedOperator::apply_adjoint(std::span<const cplx> y, std::span<cplx> x) const {
  for (std::size_t j = 0; j < dim_; ++j) {
    cplx acc{};
    for (const auto& e : column(j)) acc += std::conj(e.value) * y[e.row];
    x[j] = acc;
  }
}

void TruncatedOperator::write_coordinate(std::ostream& os) const {
  os << "% dim " << dim_ << " nnz " << entries_.size() << '\n';
  const auto old = os.precision(17);
  for (std::size_t j = 0; j < dim_; ++j)
    for (const auto& e : column(j)) os << e.row << ' ' << j << ' ' << e.value.real() << ' ' << e.value.imag() << '\n';
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Compressions

namespace {

template <class Weight>
TruncatedOperator build_compression(const AlgebraElement& a, const Ball& ball, Weight weight) {
  const Group& group = ball.group();
  for (const auto& [g, x] : a.terms()) group.check_element(g);

  TruncatedOperator t(ball.size());
  std::vector<TruncatedOperator::Entry> col;
  for (std::size_t j = 0; j < ball.size(); ++j) {
    col.clear();
    const auto& h = ball[j];
    for (const auto& [g, x] : a.terms()) {
      auto i = ball.index_of(group.mul(g, h.element));
      if (!i) continue;
      col.push_back({*i, x * weight(ball[*i].length, h.length)});
    }
    t.append_column(col);
  }
  return t;
}

}  // namespace

TruncatedOperator op_matrix(const AlgebraElement& a, const Ball& ball) {
  return build_compression(a, ball, [](int, int) { return 1.0; });
}

TruncatedOperator commutator_matrix(const AlgebraElement& a, const Ball& ball) {
  return build_compression(a, ball, [](int lgh, int lh) { return static_cast<double>(lgh - lh); });
}

// ---------------------------------------------------------------------------
// Norm estimation

namespace {

double norm2(std::span<const cplx> v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}


// Restarted Lanczos on T^*T with full reorthogonalization; returns the unit
// top Ritz vector. Each restart begins from the previous Ritz vector; a cycle
// ends early once the Ritz residual is below tol * theta.
std::vector<cplx> lanczos_top(const TruncatedOperator& t, std::vector<cplx> y, const NormOptions& opts,
                              NormEstimate& est) {
  const std::size_t n = t.dim();
  const auto k_max = static_cast<Eigen::Index>(std::min<std::size_t>(n, 40));
  const double res_tol = opts.tol;
  Eigen::MatrixXcd q(static_cast<Eigen::Index>(n), k_max);
  std::vector<cplx> tv(n), w(n);
  Eigen::Map<Eigen::VectorXcd> wv(w.data(), static_cast<Eigen::Index>(n));
  std::vector<double> alpha, beta;

  // top Ritz pair of the current tridiagonal matrix
  auto ritz = [&](double& theta, Eigen::VectorXd& s) {
    const auto k = static_cast<Eigen::Index>(alpha.size());
    const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
    const Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    theta = es.eigenvalues()(k - 1);
    s = es.eigenvectors().col(k - 1);
  };

  double prev = -1.0;
  int matvecs = 0;
  while (true) {
    q.col(0) = Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<Eigen::Index>(n));
    Eigen::Index j = 0;  // index of the newest basis vector
    alpha.clear();
    beta.clear();
    bool done = false;
    double theta = 0.0;
    Eigen::VectorXd s;
    while (true) {
      t.apply(std::span<const cplx>(q.col(j).data(), n), tv);
      t.apply_adjoint(tv, w);
      ++matvecs;
      const double a = q.col(j).dot(wv).real();
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd h = q.leftCols(j + 1).adjoint() * wv;
        wv.noalias() -= q.leftCols(j + 1) * h;
      }
      const double b = wv.norm();
      const bool last = j + 1 == k_max || matvecs >= opts.max_iter;
      const bool exhausted = b <= 1e-13 * std::max(std::abs(a), 1e-300) || static_cast<std::size_t>(j + 1) == n;
      // the Ritz pair is refreshed every few steps; residual is b |s_last|
      if (exhausted || last || j % 4 == 0) {
        ritz(theta, s);
        if (exhausted || theta <= 0 || b * std::abs(s(s.size() - 1)) <= res_tol * theta) {
          done = true;
          break;
        }
      }
      if (last) break;
      beta.push_back(b);
      q.col(++j) = wv / b;
    }

    Eigen::Map<Eigen::VectorXcd> yv(y.data(), static_cast<Eigen::Index>(n));
    yv = q.leftCols(s.size()) * s.cast<cplx>();
    const double sn = yv.norm();
    if (sn > 0) yv /= sn;

    est.iterations = matvecs;
    if (done || (prev >= 0 && std::abs(theta - prev) <= opts.tol * theta)) {
      est.converged = true;
      return y;
    }
    if (matvecs >= opts.max_iter) return y;
    prev = theta;
  }
}

}  // namespace

NormEstimate norm_estimate(const TruncatedOperator& t, const NormOptions& opts,
                           std::span<const cplx> start) {
  if (!(opts.tol > 0)) throw DomainError("norm tolerance must be positive");
  if (opts.max_iter < 1) throw DomainError("max_iter must be >= 1");
  const std::size_t n = t.dim();
  NormEstimate est;
  if (n == 0) {
    est.converged = true;
    return est;
  }

  std::vector<cplx> v(n), w(n), x(n);
  if (start.size() == n && norm2(start) > 0) {
    const double s = norm2(start);
    for (std::size_t i = 0; i < n; ++i) v[i] = start[i] / s;
  } else {
    std::fill(v.begin(), v.end(), cplx(1.0 / std::sqrt(static_cast<double>(n))));
  }

  double lambda = 0.0, prev = -1.0;
  std::vector<cplx> best_v = v;
  double best = 0.0;
  if (opts.method == NormMethod::lanczos) {
    best_v = lanczos_top(t, v, opts, est);
    t.apply(best_v, w);
    best = norm2(w);
  }
  for (int it = 1; opts.method == NormMethod::power && it <= opts.max_iter; ++it) {
    t.apply(v, w);
    lambda = 0;
    for (const auto& y : w) lambda += std::norm(y);  // v^* T^*T v with ||v|| = 1
    est.iterations = it;
    if (lambda >= best * best) {
      best = std::sqrt(lambda);
      best_v = v;
    }
    if (lambda == 0.0 || (prev >= 0 && std::abs(lambda - prev) <= opts.tol * lambda)) {
      est.converged = true;
      break;
    }
    prev = lambda;
    t.apply_adjoint(w, x);
    const double s = norm2(x);
    if (s == 0.0) {
      est.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] / s;
  }

  est.value = best;
  est.right = std::move(best_v);

  // Any unit column e_j gives ||T e_j|| <= ||T||; keep the better of the two.
  double col_best = 0.0;
  std::size_t col_arg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (const auto& e : t.column(j)) s += std::norm(e.value);
    if (s > col_best) {
      col_best = s;
      col_arg = j;
    }
  }
  col_best = std::sqrt(col_best);
  if (col_best > est.value) {
    est.value = col_best;
    std::fill(est.right.begin(), est.right.end(), cplx{});
    est.right[col_arg] = 1.0;
  }

  est.left.assign(n, cplx{});
  t.apply(est.right, est.left);
  const double s = norm2(est.left);
  if (s > 0)
    for (auto& y : est.left) y /= s;
  return est;
}

double norm_lower(const TruncatedOperator& t, double tol, int max_iter) {
  return norm_estimate(t, NormOptions{tol, max_iter}).value;
}

double commutator_norm_upper_l1(const AlgebraElement& a, const Ball& ball) {
  double s = 0;
  for (const auto& [g, x] : a.terms()) s += std::abs(x) * length(ball, g);
  return s;
}

double weighted_l2_lower(const AlgebraElement& a, const Ball& ball) {
  double s = 0;
  for (const auto& [g, x] : a.terms()) {
    const double l = length(ball, g);
    s += std::norm(x) * l * l;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// CommutatorBasis

CommutatorBasis::CommutatorBasis(const Ball& ball, std::vector<GroupElement> elements)
    : dim_(ball.size()), elements_(std::move(elements)) {
  const Group& group = ball.group();
  shifts_.resize(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    group.check_element(elements_[i]);
    auto& row = shifts_[i];
    row.resize(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      auto k = ball.index_of(group.mul(elements_[i], ball[j].element));
      if (k)
        row[j] = Shift{*k, static_cast<double>(ball[*k].length - ball[j].length)};
      else
        row[j] = Shift{npos, 0.0};
    }
  }
}

TruncatedOperator CommutatorBasis::assemble(std::span<const cplx> alpha) const {
  if (alpha.size() != elements_.size()) throw DomainError("coefficient count does not match basis size");
  TruncatedOperator t(dim_);
  std::vector<TruncatedOperator::Entry> col;
  for (std::size_t j = 0; j < dim_; ++j) {
    col.clear();
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      const auto& s = shifts_[i][j];
      if (s.target == npos || alpha[i] == cplx{} || s.weight == 0.0) continue;
      col.push_back({s.target, alpha[i] * s.weight});
    }
    t.append_column(col);
  }
  return t;
}

std::vector<cplx> CommutatorBasis::sandwich(std::span<const cplx> u, std::span<const cplx> v) const {
  std::vector<cplx> out(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    cplx acc{};
    for (std::size_t j = 0; j < dim_; ++j) {
      const auto& s = shifts_[i][j];
      if (s.target == npos) continue;
      acc += std::conj(u[s.target]) * s.weight * v[j];
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace qmetric
