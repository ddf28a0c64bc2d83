#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chaselab/engine.hpp"
#include "chaselab/geometry.hpp"
#include "chaselab/metric_space.hpp"

namespace chaselab {

// Distances beyond this are refused.
inline constexpr double kDistanceCap = 3.2733906078961419e150;  // 2^500

// Grid P = {0..D-1}^k under l_inf (ids 0..n-1, row-major, last coordinate
// fastest) plus centers z_S for nonempty proper S of [n], laid out on a unit
// line in materialization order:
//   d(z_S, p_j) = R + [j in S],  d(z_S, z_T) = |pos(S) - pos(T)|,
// with R = gamma * 2^(n+1). Explicit mode materializes every z_S in bitmask
// order up front and needs n <= 12; lazy mode adds them on request.
class Theorem2Space final : public MetricSpace {
 public:
  static constexpr std::size_t kExplicitMaxN = 12;

  Theorem2Space(std::size_t k, std::size_t D, double gamma, SpaceMode mode);

  std::size_t size() const override { return n_ + centers_.size(); }
  double distance(PointId a, PointId b) const override;
  std::string name(PointId p) const override;
  std::string label(PointId p) const override { return is_grid(p) ? "P" : "Z"; }
  SpaceMode mode() const override { return mode_; }

  std::size_t k() const { return k_; }
  std::size_t side() const { return D_; }
  double gamma() const { return gamma_; }
  std::size_t n() const { return n_; }
  double R() const { return R_; }
  // Diameter of the full space P u Z, materialized or not.
  double diameter_bound() const { return R_ + 1.0; }

  bool is_grid(PointId p) const { return p < n_; }
  const std::vector<std::size_t>& grid_coords(PointId p) const { return coords_.at(p); }
  PointId grid_point(const std::vector<std::size_t>& coords) const;
  std::size_t materialized_centers() const { return centers_.size(); }

  // Id of z_S, materializing it if needed. S has capacity n and must be a
  // nonempty proper subset.
  PointId center(const PointSet& S);
  std::optional<PointId> find_center(const PointSet& S) const;
  const PointSet& subset_of(PointId z) const;

 private:
  std::size_t k_;
  std::size_t D_;
  double gamma_;
  SpaceMode mode_;
  std::size_t n_ = 0;
  double R_ = 0.0;
  std::vector<std::vector<std::size_t>> coords_;
  std::vector<PointSet> centers_;
  std::map<std::vector<std::uint64_t>, PointId> index_;
};

Theorem2Space build_theorem2_space(std::size_t k, std::size_t D, double gamma, SpaceMode mode);

// Requests closed balls B[z_S, R] with S the grid points visited so far. The
// member set is Z u {p_j : j not in S}, so each request evicts the player's
// current point. Stops when the player leaves P (player-escaped) or once S
// covers all of P, which makes n-1 requests for a player that stays in P.
class Theorem2Adversary final : public FiniteAdversary {
 public:
  using CenterFn = std::function<PointId(const PointSet&)>;

  // grid_ids[j] is the arena id of p_j; center(S) returns the arena id of z_S.
  Theorem2Adversary(const MetricSpace& arena, std::vector<PointId> grid_ids, CenterFn center,
                    double R);

  std::optional<BallSpec> next(std::span<const PointId> positions) override;
  TerminationReason stop_reason() const override { return reason_; }

  const PointSet& visited() const { return visited_; }

 private:
  const MetricSpace* arena_;
  std::vector<PointId> grid_ids_;
  std::map<PointId, std::size_t> grid_index_;
  CenterFn center_;
  double R_;
  PointSet visited_;
  TerminationReason reason_ = TerminationReason::adversary_stopped;
};

Theorem2Adversary theorem2_adversary(Theorem2Space& space);

// Pins coordinate t at step t to the sign farther from the player (ties to
// +1), emitting the faces F_1 > F_2 > ... > F_d of [-1,1]^d. The player must
// start at the origin.
class FLAdversary final : public NormedAdversary {
 public:
  explicit FLAdversary(const NormedSpace& space);
  std::optional<ConvexBody> next(std::span<const Vector> positions) override;
  const std::vector<int>& signs() const { return signs_; }

 private:
  std::size_t d_;
  std::vector<int> signs_;
};

FLAdversary fl_adversary(const NormedSpace& space);

// Parts glued with constant bridge distances: the distance between part i and
// any earlier part is bridge(i), so points of parts i < j sit bridge(j) apart.
// An optional lattice L in (R^m, l_p) hangs off every part with
// d(x, y) = offset(part of x) + ||y||.
//
// Global ids are stable: points are registered in the order they become
// enumerable, part by part at construction and on demand afterwards.
class GluedSpace final : public MetricSpace {
 public:
  struct Lattice {
    std::vector<Vector> points;
    double p = 2.0;
    std::vector<double> offsets;  // one per part
  };

  GluedSpace() = default;

  // bridge is ignored for the first part.
  std::size_t add_part(std::shared_ptr<MetricSpace> part, double bridge, std::string tag);
  void set_lattice(Lattice lattice);

  std::size_t size() const override { return registry_.size(); }
  double distance(PointId a, PointId b) const override;
  std::string name(PointId p) const override;
  std::string label(PointId p) const override;
  SpaceMode mode() const override;

  std::size_t part_count() const { return parts_.size(); }
  const MetricSpace& part(std::size_t i) const { return *parts_.at(i).space; }
  std::shared_ptr<MetricSpace> part_ptr(std::size_t i) const { return parts_.at(i).space; }
  double bridge(std::size_t i) const { return parts_.at(i).bridge; }
  const std::optional<Lattice>& lattice() const { return lattice_; }

  // Part index (part_count() for the lattice) and local index of a global id.
  std::pair<std::size_t, PointId> locate(PointId p) const { return registry_.at(p); }
  // Global id of a part point, registering any newly enumerable points of
  // that part first.
  PointId global_id(std::size_t part, PointId local);
  std::vector<PointId> part_ids(std::size_t part) const;
  // Registers points a lazy part gained since the last call.
  void sync(std::size_t part);

 private:
  struct Part {
    std::shared_ptr<MetricSpace> space;
    double bridge = 0.0;
    std::string tag;
    std::vector<PointId> global;  // local -> global
  };
  std::vector<Part> parts_;
  std::optional<Lattice> lattice_;
  std::vector<PointId> lattice_global_;
  std::vector<std::pair<std::size_t, PointId>> registry_;
};

// Z = X u Y with d(X, Y) = 2 gamma max(diam X, diam Y).
GluedSpace glue_pair(std::shared_ptr<MetricSpace> X, std::shared_ptr<MetricSpace> Y, double gamma);

struct LevelParams {
  std::size_t k = 2;
  std::size_t D = 2;
};

// D_N = max(N, 2), k_N = 2.
std::vector<LevelParams> default_phase1_levels(std::size_t N_max);

struct Phase1Space {
  GluedSpace space;
  double gamma = 2.0;
  std::vector<LevelParams> levels;
  std::vector<std::shared_ptr<Theorem2Space>> parts;  // X_1 .. X_N
  // level_radius[0] = R_1 = 2 gamma diam(X_1); level_radius[N-1] = R_N is
  // the bridge of level N.
  std::vector<double> level_radius;
};

// Y_N = X_N glued to Y_{N-1} at R_N = 2 gamma max(diam X_N, diam Y_{N-1}).
// Throws CapacityExceeded when a distance would pass 2^500.
Phase1Space build_phase1_space(double gamma, const std::vector<LevelParams>& levels,
                               SpaceMode mode = SpaceMode::lazy);

// Adversary of level N (1-based) playing inside the glued space.
Theorem2Adversary level_adversary(Phase1Space& phase1, std::size_t level);

// Lattice points of spacing step inside the open l_p ball B(0, r) of R^m,
// in lexicographic order.
std::vector<Vector> lattice_in_ball(std::size_t m, double p, double step, double r);

// Phase I space plus the lattice L with d(x, y) = R_N + ||y||_p for x in X_N.
// Requires r < R_1.
GluedSpace build_phase2_space(const Phase1Space& phase1, std::size_t m, double p,
                              double lattice_step, double r);

}  // namespace chaselab
