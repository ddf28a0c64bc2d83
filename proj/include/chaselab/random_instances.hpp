#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "chaselab/engine.hpp"
#include "chaselab/geometry.hpp"
#include "chaselab/metric_space.hpp"

namespace chaselab {

using Rng = std::mt19937_64;

// n points with every pairwise distance drawn from [lo, hi], hi <= 2 lo, so
// the triangle inequality holds automatically. integer = true draws from the
// integers in [lo, hi] instead (ties then occur on purpose).
FiniteMetricSpace random_metric_space(std::size_t n, double lo, double hi, bool integer, Rng& rng);

// Shortest-path metric of a random connected graph with integer weights in
// [1, max_weight].
FiniteMetricSpace random_graph_metric(std::size_t n, double edge_prob, int max_weight, Rng& rng);

// T nested balls: each center is a member of the previous ball and each
// radius stays below the distance to the nearest non-member, so nesting holds
// by construction. Openness is random.
std::vector<BallSpec> random_nested_balls(const MetricSpace& space, std::size_t T, Rng& rng);

// T arbitrary (not necessarily nested) balls with at most max_members members.
std::vector<BallSpec> random_balls(const MetricSpace& space, std::size_t T,
                                   std::size_t max_members, Rng& rng);

// Adaptive nested balls: each request lies inside the previous one and
// leaves out the player's current point, so every step forces a move. Stops
// after T requests or when the current point is the last member.
class EvictingNestedAdversary final : public FiniteAdversary {
 public:
  EvictingNestedAdversary(const MetricSpace& space, std::size_t T, std::uint64_t seed);
  std::optional<BallSpec> next(std::span<const PointId> positions) override;

 private:
  const MetricSpace& space_;
  std::size_t T_;
  Rng rng_;
  PointSet members_;
  std::size_t issued_ = 0;
};

// T nested axis boxes inside [-1, 1]^d.
std::vector<ConvexBody> random_nested_boxes(std::size_t d, std::size_t T, Rng& rng);

}  // namespace chaselab
