#pragma once

// Word length via breadth-first search on the Cayley graph.

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qmetric/group.hpp"

namespace qmetric {

/// Default cap on enumerated ball sizes; QMETRIC_MAX_BALL overrides it.
inline constexpr std::size_t kDefaultMaxBall = 200000;
std::size_t max_ball_from_env();

struct BallEntry {
  GroupElement element;
  int length = 0;
};

/// The finite set {g : L(g) <= r} with exact word lengths, ordered by
/// (length, canonical element order). Entry 0 is the identity.
class Ball {
 public:
  const Group& group() const noexcept { return group_; }
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<BallEntry>& entries() const noexcept { return entries_; }
  const BallEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> index_of(const GroupElement& g) const;
  bool contains(const GroupElement& g) const { return index_of(g).has_value(); }

  /// Number of elements of length exactly k, k = 0..radius.
  const std::vector<std::size_t>& shell_sizes() const noexcept { return shell_sizes_; }
  /// Number of elements with length <= c; c may not exceed radius.
  std::size_t cumulative_size(int c) const;

 private:
  friend Ball enumerate_ball(const Group& group, int radius, std::size_t max_elements);
  explicit Ball(const Group& group) : group_(group) {}

  Group group_;
  int radius_ = 0;
  std::vector<BallEntry> entries_;
  std::unordered_map<GroupElement, std::size_t, GroupElementHash> index_;
  std::vector<std::size_t> shell_sizes_;
};

/// BFS from the identity. Throws ResourceError once more than `max_elements`
/// elements would be needed.
Ball enumerate_ball(const Group& group, int radius, std::size_t max_elements = max_ball_from_env());

/// Exact word length of an element of the ball; OutOfBallError otherwise.
int length(const Ball& ball, const GroupElement& g);

enum class BoundProvenance { analytic, empirical };

struct ShellBound {
  std::size_t value = 0;
  BoundProvenance provenance = BoundProvenance::analytic;
};

struct GrowthReport {
  std::vector<std::size_t> shell_sizes;
  double fit_k = 0.0;     // slope of #ball(c) ~ k c + l
  double fit_l = 0.0;
  double residual = 0.0;  // root-mean-square residual of the fit
  std::optional<ShellBound> shell_bound;
};

/// Analytic bound on every shell size k >= 1, when the family has linear
/// growth under its default generators.
std::optional<std::size_t> analytic_shell_bound(const Group& group);

/// Least-squares fit of cumulative ball sizes against the radius. Requires radius >= 3.
GrowthReport growth_fit(const Ball& ball);

struct SquareSumEvidence {
  double partial = 0.0;               // sum over 0 < L(g) <= r of 1/L(g)^2
  std::optional<double> tail_bound;   // B / r when an analytic shell bound B exists
};

SquareSumEvidence square_sum_evidence(const Ball& ball);

}  // namespace qmetric
