#include "qmetric/word_length.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "qmetric/error.hpp"

namespace qmetric {

std::size_t max_ball_from_env() {
  const char* raw = std::getenv("QMETRIC_MAX_BALL");
  if (!raw || !*raw) return kDefaultMaxBall;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(raw, raw + std::strlen(raw), value);
  if (ec != std::errc() || *ptr != '\0' || value == 0)
    throw ConfigError("QMETRIC_MAX_BALL", std::string("not a positive integer: ") + raw);
  return value;
}

std::optional<std::size_t> Ball::index_of(const GroupElement& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Ball::cumulative_size(int c) const {
  if (c < 0) return 0;
  if (c > radius_) throw OutOfBallError("cumulative size requested beyond ball radius", c);
  std::size_t total = 0;
  for (int k = 0; k <= c; ++k) total += shell_sizes_[k];
  return total;
}

Ball enumerate_ball(const Group& group, int radius, std::size_t max_elements) {
  if (radius < 0) throw DomainError("ball radius must be non-negative");
  Ball ball(group);
  ball.radius_ = radius;

  auto push = [&](GroupElement g, int len) {
    if (ball.entries_.size() >= max_elements)
      throw ResourceError("ball of radius " + std::to_string(radius) + " exceeds the cap of " +
                          std::to_string(max_elements) + " elements");
    ball.index_.emplace(g, ball.entries_.size());
    ball.entries_.push_back(BallEntry{std::move(g), len});
  };

  push(group.identity(), 0);
  ball.shell_sizes_.push_back(1);
  std::size_t layer_begin = 0;
  for (int k = 1; k <= radius; ++k) {
    const std::size_t layer_end = ball.entries_.size();
    std::vector<GroupElement> next;
    std::unordered_map<GroupElement, bool, GroupElementHash> seen;
    for (std::size_t i = layer_begin; i < layer_end; ++i) {
      for (const auto& s : group.generators()) {
        GroupElement h = group.mul(ball.entries_[i].element, s);
        if (ball.index_.contains(h) || seen.contains(h)) continue;
        seen.emplace(h, true);
        next.push_back(std::move(h));
      }
    }
    std::sort(next.begin(), next.end());
    for (auto& g : next) push(std::move(g), k);
    ball.shell_sizes_.push_back(next.size());
    layer_begin = layer_end;
  }
  return ball;
}

int length(const Ball& ball, const GroupElement& g) {
  if (auto idx = ball.index_of(g)) return ball[*idx].length;
  ball.group().check_element(g);
  throw OutOfBallError("element " + to_string(g) + " lies outside the ball of radius " +
                           std::to_string(ball.radius()) + "; enumerate a radius >= " +
                           std::to_string(ball.radius() + 1),
                       ball.radius() + 1);
}

std::optional<std::size_t> analytic_shell_bound(const Group& group) {
  if (!group.uses_default_generators()) return std::nullopt;
  switch (group.family()) {
    case Family::free_abelian:
      if (group.z_rank() == 1) return 2;
      return std::nullopt;
    case Family::product_z_finite: {
      // Shells k >= 3 hold exactly the 2n elements (+-k, f). Shell 2 additionally
      // holds the n - 1 elements (0, f) with f != e, reachable as (1, f)(-1, e).
      const std::size_t n = static_cast<std::size_t>(group.finite_order());
      return std::max(2 * n, 3 * n - 1);
    }
    case Family::infinite_dihedral:
      return 4;
  }
  return std::nullopt;
}

GrowthReport growth_fit(const Ball& ball) {
  const int r = ball.radius();
  if (r < 3) throw DomainError("growth_fit needs radius >= 3, got " + std::to_string(r));

  GrowthReport rep;
  rep.shell_sizes = ball.shell_sizes();

  const double n = r + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cum = 0;
  std::vector<double> ys;
  for (int c = 0; c <= r; ++c) {
    cum += rep.shell_sizes[c];
    const double x = c, y = static_cast<double>(cum);
    ys.push_back(y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  rep.fit_k = (n * sxy - sx * sy) / denom;
  rep.fit_l = (sy - rep.fit_k * sx) / n;
  double ss = 0;
  for (int c = 0; c <= r; ++c) {
    const double e = ys[c] - (rep.fit_k * c + rep.fit_l);
    ss += e * e;
  }
  rep.residual = std::sqrt(ss / n);

  if (auto b = analytic_shell_bound(ball.group())) {
    rep.shell_bound = ShellBound{*b, BoundProvenance::analytic};
  } else if (!ball.group().uses_default_generators() &&
             !(ball.group().family() == Family::free_abelian && ball.group().z_rank() > 1)) {
    // Linear-growth family with custom generators: observed maximum only.
    std::size_t mx = 0;
    for (int k = 1; k <= r; ++k) mx = std::max(mx, rep.shell_sizes[k]);
    rep.shell_bound = ShellBound{mx, BoundProvenance::empirical};
  }
  return rep;
}

SquareSumEvidence square_sum_evidence(const Ball& ball) {
  const int r = ball.radius();
  if (r < 1) throw DomainError("square_sum_evidence needs radius >= 1");
  SquareSumEvidence ev;
  const auto& shells = ball.shell_sizes();
  for (int k = 1; k <= r; ++k) ev.partial += static_cast<double>(shells[k]) / (double(k) * k);
  if (auto b = analytic_shell_bound(ball.group())) ev.tail_bound = static_cast<double>(*b) / r;
  return ev;
}

}  // namespace qmetric
