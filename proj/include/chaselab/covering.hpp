#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "chaselab/metric_space.hpp"
#include "chaselab/point_set.hpp"

namespace chaselab {

enum class Exactness { exact, greedy_upper_bound, estimate };

std::string_view to_string(Exactness e);

struct CoverOptions {
  // Targets up to this many points are solved exactly by branch and bound
  // (hard ceiling 64).
  std::size_t exact_threshold = 20;
};

struct CoverResult {
  std::size_t count = 0;
  std::vector<PointId> centers;  // ascending
  Exactness exactness = Exactness::exact;
};

// N_r(target): fewest open balls B(c, r), c anywhere in the space, covering
// target. Throws InvalidArgument for r <= 0 or an empty target.
CoverResult covering_number(const MetricSpace& space, const PointSet& target, double r,
                            const CoverOptions& options = {});

// Neighborhoods {y : d(c, y) < r} for every enumerable c.
std::vector<PointSet> open_neighborhoods(const MetricSpace& space, double r);

// Set cover of target by the given candidate sets (index = center id).
// Candidates that miss the target are ignored.
CoverResult cover_with_sets(const PointSet& target, std::span<const PointSet> candidates,
                            const CoverOptions& options = {});
// Restricts the candidates to the listed indices of `candidates`.
CoverResult cover_with_sets(const PointSet& target, std::span<const PointSet> candidates,
                            std::span<const PointId> candidate_ids,
                            const CoverOptions& options = {});

}  // namespace chaselab
