#include "chaselab/covering.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "chaselab/errors.hpp"

namespace chaselab {

std::string_view to_string(Exactness e) {
  switch (e) {
    case Exactness::exact:
      return "exact";
    case Exactness::greedy_upper_bound:
      return "greedy-upper-bound";
    case Exactness::estimate:
      return "estimate";
  }
  return "unknown";
}

std::vector<PointSet> open_neighborhoods(const MetricSpace& space, double r) {
  const std::size_t n = space.size();
  std::vector<PointSet> out(n, PointSet(n));
  for (PointId c = 0; c < n; ++c) {
    out[c].insert(c);
    for (PointId y = c + 1; y < n; ++y) {
      if (space.distance(c, y) < r) {
        out[c].insert(y);
        out[y].insert(c);
      }
    }
  }
  return out;
}

namespace {

struct Candidate {
  PointId id;
  std::uint64_t mask;
};

// Branch and bound over <=64-element universes.
class ExactCover {
 public:
  ExactCover(std::vector<Candidate> cands, std::uint64_t universe)
      : cands_(std::move(cands)), universe_(universe) {}

  std::vector<PointId> solve(std::vector<PointId> incumbent) {
    best_ = std::move(incumbent);
    std::vector<PointId> chosen;
    search(universe_, chosen);
    return best_;
  }

 private:
  void search(std::uint64_t uncovered, std::vector<PointId>& chosen) {
    if (uncovered == 0) {
      if (chosen.size() < best_.size()) best_ = chosen;
      return;
    }
    if (chosen.size() + 1 >= best_.size()) return;

    int max_gain = 0;
    for (const auto& c : cands_) max_gain = std::max(max_gain, std::popcount(c.mask & uncovered));
    const std::size_t need = static_cast<std::size_t>(
        (std::popcount(uncovered) + max_gain - 1) / max_gain);
    if (chosen.size() + need >= best_.size()) return;

    // Branch on the uncovered element with the fewest covering candidates.
    int pivot = -1;
    std::size_t pivot_options = SIZE_MAX;
    for (std::uint64_t bits = uncovered; bits != 0; bits &= bits - 1) {
      const int e = std::countr_zero(bits);
      std::size_t options = 0;
      for (const auto& c : cands_) options += (c.mask >> e) & 1U;
      if (options < pivot_options) {
        pivot_options = options;
        pivot = e;
      }
    }
    std::vector<const Candidate*> branch;
    for (const auto& c : cands_) {
      if ((c.mask >> pivot) & 1U) branch.push_back(&c);
    }
    std::stable_sort(branch.begin(), branch.end(), [&](const Candidate* a, const Candidate* b) {
      return std::popcount(a->mask & uncovered) > std::popcount(b->mask & uncovered);
    });
    for (const Candidate* c : branch) {
      chosen.push_back(c->id);
      search(uncovered & ~c->mask, chosen);
      chosen.pop_back();
      if (chosen.size() + 1 >= best_.size()) return;
    }
  }

  std::vector<Candidate> cands_;
  std::uint64_t universe_;
  std::vector<PointId> best_;
};

std::vector<PointId> greedy_cover(const PointSet& target, std::span<const PointSet> candidates,
                                  std::span<const PointId> ids) {
  PointSet uncovered = target;
  std::vector<PointId> chosen;
  while (!uncovered.empty()) {
    std::size_t best_gain = 0;
    PointId best = 0;
    for (PointId c : ids) {
      const std::size_t gain = candidates[c].count_and(uncovered);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best_gain == 0) throw InvalidArgument("target cannot be covered by the candidate sets");
    chosen.push_back(best);
    uncovered.subtract(candidates[best]);
  }
  return chosen;
}

}  // namespace

CoverResult cover_with_sets(const PointSet& target, std::span<const PointSet> candidates,
                            const CoverOptions& options) {
  std::vector<PointId> ids(candidates.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return cover_with_sets(target, candidates, ids, options);
}

CoverResult cover_with_sets(const PointSet& target, std::span<const PointSet> candidates,
                            std::span<const PointId> candidate_ids, const CoverOptions& options) {
  if (target.empty()) throw InvalidArgument("covering target is empty");
  const std::size_t size = target.count();

  CoverResult result;
  result.centers = greedy_cover(target, candidates, candidate_ids);

  std::size_t max_gain = 0;
  for (PointId c : candidate_ids) max_gain = std::max(max_gain, candidates[c].count_and(target));
  const std::size_t lower = (size + max_gain - 1) / max_gain;

  if (result.centers.size() == lower) {
    result.exactness = Exactness::exact;
  } else if (size <= std::min<std::size_t>(options.exact_threshold, 64)) {
    // Compress the target to bit positions 0..size-1.
    const auto members = target.to_vector();
    std::vector<Candidate> cands;
    for (PointId c : candidate_ids) {
      std::uint64_t mask = 0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (candidates[c].contains(members[k])) mask |= std::uint64_t{1} << k;
      }
      if (mask != 0) cands.push_back({c, mask});
    }
    // Drop duplicates and strictly dominated masks; the lowest id survives.
    std::vector<Candidate> kept;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < cands.size() && !dominated; ++j) {
        if (i == j) continue;
        const bool subset = (cands[i].mask & ~cands[j].mask) == 0;
        if (!subset) continue;
        dominated = cands[i].mask != cands[j].mask || j < i;
      }
      if (!dominated) kept.push_back(cands[i]);
    }
    const std::uint64_t universe =
        size == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << size) - 1;
    ExactCover solver(std::move(kept), universe);
    result.centers = solver.solve(result.centers);
    result.exactness = Exactness::exact;
  } else {
    result.exactness = Exactness::greedy_upper_bound;
  }
  std::sort(result.centers.begin(), result.centers.end());
  result.count = result.centers.size();
  return result;
}

CoverResult covering_number(const MetricSpace& space, const PointSet& target, double r,
                            const CoverOptions& options) {
  if (!(r > 0.0)) throw InvalidArgument("covering radius must be > 0");
  if (target.empty()) throw InvalidArgument("covering target is empty");
  const auto hoods = open_neighborhoods(space, r);
  return cover_with_sets(target, hoods, options);
}

}  // namespace chaselab
