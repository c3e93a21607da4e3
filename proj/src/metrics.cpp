#include "qmetric/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qmetric/error.hpp"

namespace qmetric {

std::vector<cplx> delta_coeffs(const StateRep& phi, const StateRep& psi, const Ball& ball) {
  const Group& group = ball.group();
  std::vector<cplx> c(ball.size());
  for (std::size_t i = 1; i < ball.size(); ++i) {
    const auto& g = ball[i].element;
    c[i] = phi.coeff(g, group) - psi.coeff(g, group);
  }
  return c;
}

MetricBracket d_inf(const StateRep& phi, const StateRep& psi, const Ball& ball) {
  const int r = ball.radius();
  if (r < 1) throw DomainError("d_inf needs ball radius >= 1");
  const auto c = delta_coeffs(phi, psi, ball);
  MetricBracket out;
  out.ball_radius = r;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < ball.size(); ++i) {
    const double v = std::abs(c[i]) / ball[i].length;
    if (v > out.lo) {
      out.lo = v;
      arg = i;
    }
  }
  // |c_g| <= 2 and L(g) >= r + 1 outside the ball
  out.tail_bound = 2.0 / (r + 1);
  out.hi = std::max(out.lo, *out.tail_bound);
  if (arg) out.diagnostics["argmax"] = to_string(ball[arg].element);
  out.diagnostics["argmax_length"] = arg ? ball[arg].length : 0;
  return out;
}

MetricBracket d_2(const StateRep& phi, const StateRep& psi, const Ball& ball, const GrowthReport& growth) {
  const int r = ball.radius();
  if (r < 1) throw DomainError("d_2 needs ball radius >= 1");
  const auto c = delta_coeffs(phi, psi, ball);

  // per-shell partial sums of |c_g|^2 / L(g)^2
  std::vector<double> shell(r + 1, 0.0);
  for (std::size_t i = 1; i < ball.size(); ++i) {
    const double l = ball[i].length;
    shell[ball[i].length] += std::norm(c[i]) / (l * l);
  }
  std::vector<double> cumulative(r + 1, 0.0);
  for (int k = 1; k <= r; ++k) cumulative[k] = cumulative[k - 1] + shell[k];

  MetricBracket out;
  out.ball_radius = r;
  out.lo = std::sqrt(cumulative[r]);
  const bool analytic = growth.shell_bound && growth.shell_bound->provenance == BoundProvenance::analytic;
  if (analytic) {
    // |c_g|^2 <= 4 and at most B elements per shell, each with 1/L^2 <= 1/k^2
    const double tail = 4.0 * static_cast<double>(growth.shell_bound->value) / r;
    out.tail_bound = tail;
    out.hi = std::sqrt(cumulative[r] + tail);
  } else {
    // divergence/convergence evidence: squared partial sums at sub-radii
    nlohmann::json partials = nlohmann::json::array();
    for (int k = 1; k <= r; k = (k < 16 ? k + 1 : k * 2)) partials.push_back({{"radius", k}, {"partial", cumulative[k]}});
    if (partials.back()["radius"] != r) partials.push_back({{"radius", r}, {"partial", cumulative[r]}});
    out.diagnostics["partial_sums"] = partials;
    if (r >= 2) {
      // slope of partial(k) against ln k; a positive plateau-free slope signals divergence
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (int k = 1; k <= r; ++k) {
        const double x = std::log(static_cast<double>(k)), y = cumulative[k];
        sx += x, sy += y, sxx += x * x, sxy += x * y;
      }
      const double n = r;
      out.diagnostics["log_slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    // an empirical shell bound gives a tail estimate but not a certified one
    if (growth.shell_bound) out.diagnostics["empirical_tail"] = 4.0 * static_cast<double>(growth.shell_bound->value) / r;
    out.diagnostics["divergent"] = !growth.shell_bound.has_value();
  }
  return out;
}

MetricBracket connes_bracket(const StateRep& phi, const StateRep& psi, const Ball& ball,
                             const GrowthReport& growth) {
  const auto inf = d_inf(phi, psi, ball);
  const auto two = d_2(phi, psi, ball, growth);
  MetricBracket out;
  out.ball_radius = ball.radius();
  out.lo = inf.lo;
  out.hi = two.hi;
  out.tail_bound = two.tail_bound;
  out.diagnostics["d_inf"] = {{"lo", inf.lo}, {"hi", inf.hi}};
  out.diagnostics["d_2"] = {{"lo", two.lo}, {"hi", two.hi_finite() ? nlohmann::json(two.hi) : nlohmann::json("inf")}};
  out.diagnostics["d_2_detail"] = two.diagnostics;
  return out;
}

// ---------------------------------------------------------------------------
// Spectral point estimate

namespace {

struct RatioEval {
  double ratio = 0.0;
  double sigma = 0.0;
  cplx sum{};
  NormEstimate norm;
};

class RatioProblem {
 public:
  RatioProblem(const CommutatorBasis& basis, std::vector<cplx> c, NormOptions norm)
      : basis_(basis), c_(std::move(c)), norm_(norm) {}

  RatioEval eval(std::span<const cplx> alpha, std::span<const cplx> warm = {}) const {
    RatioEval out;
    for (std::size_t i = 0; i < alpha.size(); ++i) out.sum += alpha[i] * c_[i];
    out.norm = norm_estimate(basis_.assemble(alpha), norm_, warm);
    out.sigma = out.norm.value;
    out.ratio = out.sigma > 0 ? std::abs(out.sum) / out.sigma : 0.0;
    return out;
  }

  const std::vector<cplx>& c() const noexcept { return c_; }
  const CommutatorBasis& basis() const noexcept { return basis_; }

 private:
  const CommutatorBasis& basis_;
  std::vector<cplx> c_;
  NormOptions norm_;
};

struct AscentResult {
  std::vector<cplx> alpha;
  RatioEval best;
  int iterations = 0;
  bool converged = false;
  bool norm_converged = true;
};

AscentResult ratio_ascent(const RatioProblem& prob, std::size_t start, const HeuristicOptions& opts) {
  // At a multiple top singular value one singular pair gives only one
  // subgradient. On failure, draw another pair from a random start vector and
  // step along the average of the subgradients drawn so far, which moves
  // toward the centre of the subdifferential.
  constexpr int kSubgradientRetries = 6;
  const std::size_t m = prob.basis().size();
  const std::size_t n = prob.basis().dim();
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ start);
  std::normal_distribution<double> gauss;

  AscentResult res;
  res.alpha.assign(m, cplx{});
  res.alpha[start] = 1.0;
  res.best = prob.eval(res.alpha);
  res.norm_converged = res.best.norm.converged;

  double step = 0.0;
  int retries = 0, stalled = 0;
  std::vector<cplx> sw_acc;
  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    auto& cur = res.best;
    if (cur.sigma <= 0 || std::abs(cur.sum) == 0.0) {
      res.converged = true;
      break;
    }
    // commutator norm is phase invariant: rotate so that sum alpha_g c_g > 0, scale to sigma = 1
    const cplx phase = std::conj(cur.sum) / std::abs(cur.sum);
    for (auto& a : res.alpha) a *= phase / cur.sigma;
    cur.sum = std::abs(cur.sum) / cur.sigma;
    for (auto& x : cur.norm.right) x *= std::conj(phase);  // keeps T v = sigma u after the rotation
    cur.sigma = 1.0;

    // subgradient of sigma from the top singular pair; gradient of |sum|
    const auto sw = prob.basis().sandwich(cur.norm.left, cur.norm.right);
    if (retries == 0) sw_acc.assign(m, cplx{});
    for (std::size_t i = 0; i < m; ++i) sw_acc[i] += sw[i];
    std::vector<cplx> dir(m);
    double dnorm = 0, anorm = 0;
    for (std::size_t i = 0; i < m; ++i) {
      dir[i] = std::conj(prob.c()[i] - cur.ratio * sw_acc[i] / static_cast<double>(retries + 1));
      dnorm += std::norm(dir[i]);
      anorm += std::norm(res.alpha[i]);
    }
    dnorm = std::sqrt(dnorm);
    anorm = std::sqrt(anorm);
    if (dnorm == 0.0) {
      res.converged = true;
      break;
    }
    if (step == 0.0) step = 0.25 * anorm / dnorm;

    bool improved = false;
    std::vector<cplx> trial(m);
    RatioEval cand;
    double h = step;
    for (int halving = 0; halving < 20; ++halving) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = res.alpha[i] + h * dir[i];
      cand = prob.eval(trial, cur.norm.right);
      if (cand.ratio > cur.ratio * (1 + 1e-12)) {  // ignore gains at the norm's noise level
        improved = true;
        break;
      }
      h *= 0.5;
    }
    if (!improved) {
      if (retries++ >= kSubgradientRetries) {
        res.converged = true;
        break;
      }
      std::vector<cplx> v0(n);
      for (auto& x : v0) x = {gauss(rng), gauss(rng)};
      const double ratio = cur.ratio;
      cur = prob.eval(res.alpha, v0);
      cur.ratio = std::max(cur.ratio, ratio);
      continue;
    }
    retries = 0;
    const double gain = (cand.ratio - cur.ratio) / cur.ratio;
    res.alpha = trial;
    res.best = std::move(cand);
    res.norm_converged = res.norm_converged && res.best.norm.converged;
    stalled = gain < opts.rel_improvement && h == step ? stalled + 1 : 0;
    step = 2.0 * h;
    if (stalled >= 3) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace

HeuristicResult connes_heuristic(const StateRep& phi, const StateRep& psi, const Group& group,
                                 int support_radius, int trunc_radius, const HeuristicOptions& opts) {
  if (support_radius < 1) throw DomainError("heuristic support radius must be >= 1");
  if (trunc_radius < 2 * support_radius) throw DomainError("heuristic truncation radius must be >= 2 * support radius");
  if (opts.restarts < 1) throw DomainError("heuristic needs at least one start");

  const Ball support = enumerate_ball(group, support_radius);
  const auto c_all = delta_coeffs(phi, psi, support);

  std::vector<GroupElement> elems;
  std::vector<cplx> c;
  std::vector<int> lengths;
  for (std::size_t i = 1; i < support.size(); ++i) {
    elems.push_back(support[i].element);
    c.push_back(c_all[i]);
    lengths.push_back(support[i].length);
  }

  HeuristicResult out;
  out.diagnostics["support_radius"] = support_radius;
  out.diagnostics["trunc_radius"] = trunc_radius;
  out.diagnostics["basis_size"] = elems.size();

  // starting singletons ranked by |c_g| / L(g), ties broken by ball order
  std::vector<std::size_t> order(elems.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(c[a]) / lengths[a] > std::abs(c[b]) / lengths[b];
  });
  while (!order.empty() && std::abs(c[order.back()]) == 0.0) order.pop_back();
  if (order.empty()) {
    out.diagnostics["note"] = "states agree on the support ball";
    return out;
  }
  if (order.size() > static_cast<std::size_t>(opts.restarts)) order.resize(opts.restarts);

  const Ball trunc = enumerate_ball(group, trunc_radius);
  const CommutatorBasis basis(trunc, elems);
  const RatioProblem prob(basis, c, opts.norm);

  nlohmann::json runs = nlohmann::json::array();
  AscentResult best;
  best.best.ratio = -1.0;
  for (std::size_t start : order) {
    auto run = ratio_ascent(prob, start, opts);
    runs.push_back({{"start", to_string(elems[start])},
                    {"start_ratio", std::abs(c[start]) / lengths[start]},
                    {"ratio", run.best.ratio},
                    {"iterations", run.iterations},
                    {"converged", run.converged},
                    {"norm_converged", run.norm_converged}});
    out.converged = out.converged && run.converged;
    if (run.best.ratio > best.best.ratio) best = std::move(run);
  }
  out.estimate = best.best.ratio;
  out.diagnostics["runs"] = runs;

  // stability of the truncated norm: re-evaluate the best alpha on ball(2R)
  const Ball wide = enumerate_ball(group, 2 * trunc_radius);
  const CommutatorBasis wide_basis(wide, elems);
  const RatioProblem wide_prob(wide_basis, c, opts.norm);
  const auto wide_eval = wide_prob.eval(best.alpha);
  out.sigma_drift = out.estimate - wide_eval.ratio;
  out.diagnostics["sigma_R"] = best.best.sigma;
  out.diagnostics["sigma_2R"] = wide_eval.sigma;
  out.diagnostics["ratio_2R"] = wide_eval.ratio;

  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t i = 0; i < elems.size(); ++i)
    if (std::abs(best.alpha[i]) > 1e-14)
      coeffs.push_back({{"element", to_string(elems[i])}, {"re", best.alpha[i].real()}, {"im", best.alpha[i].imag()}});
  out.diagnostics["alpha"] = coeffs;
  if (!out.converged) out.diagnostics["warning"] = "ratio ascent hit the iteration cap";
  return out;
}

}  // namespace qmetric
