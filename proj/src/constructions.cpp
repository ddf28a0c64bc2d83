#include "chaselab/constructions.hpp"

#include <algorithm>
#include <cmath>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"

namespace chaselab {

namespace {

constexpr std::size_t kGridCap = 1u << 20;

void check_distance(double v, const std::string& what) {
  if (!(v <= kDistanceCap)) {
    throw CapacityExceeded(what + " exceeds the distance cap 2^500");
  }
}

}  // namespace

Theorem2Space::Theorem2Space(std::size_t k, std::size_t D, double gamma, SpaceMode mode)
    : k_(k), D_(D), gamma_(gamma), mode_(mode) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (D < 2) throw InvalidArgument("D must be >= 2");
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be > 1");
  n_ = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n_ > kGridCap / D) throw CapacityExceeded("grid has more than 2^20 points");
    n_ *= D;
  }
  if (n_ + 1 >= 500) throw CapacityExceeded("R = gamma 2^(n+1) exceeds the distance cap 2^500");
  R_ = std::ldexp(gamma, static_cast<int>(n_ + 1));
  check_distance(R_ + 1.0, "R");

  coords_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    coords_[i].resize(k);
    std::size_t rest = i;
    for (std::size_t c = k; c-- > 0;) {
      coords_[i][c] = rest % D;
      rest /= D;
    }
  }

  if (mode == SpaceMode::explicit_matrix) {
    if (n_ > kExplicitMaxN) {
      throw CapacityExceeded("explicit mode needs n <= 12, got n = " + std::to_string(n_));
    }
    const std::uint64_t full = (std::uint64_t{1} << n_) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      PointSet S(n_);
      for (std::size_t j = 0; j < n_; ++j) {
        if ((mask >> j) & 1U) S.insert(j);
      }
      center(S);
    }
  }
}

double Theorem2Space::distance(PointId a, PointId b) const {
  const std::size_t total = size();
  if (a >= total || b >= total) throw InvalidArgument("point id out of range");
  if (a == b) return 0.0;
  if (a < n_ && b < n_) {
    std::size_t m = 0;
    for (std::size_t c = 0; c < k_; ++c) {
      const auto x = coords_[a][c];
      const auto y = coords_[b][c];
      m = std::max(m, x > y ? x - y : y - x);
    }
    return static_cast<double>(m);
  }
  if (a >= n_ && b >= n_) return std::abs(static_cast<double>(a) - static_cast<double>(b));
  const PointId z = a >= n_ ? a : b;
  const PointId p = a >= n_ ? b : a;
  return centers_[z - n_].contains(p) ? R_ + 1.0 : R_;
}

std::string Theorem2Space::name(PointId p) const {
  if (p < n_) {
    std::string out = "p(";
    for (std::size_t c = 0; c < k_; ++c) {
      if (c > 0) out += ' ';
      out += std::to_string(coords_[p][c]);
    }
    return out + ")";
  }
  const auto& S = subset_of(p);
  std::string out = "z{";
  bool first = true;
  S.for_each([&](PointId j) {
    if (!first) out += ' ';
    first = false;
    out += std::to_string(j);
  });
  return out + "}";
}

PointId Theorem2Space::grid_point(const std::vector<std::size_t>& coords) const {
  if (coords.size() != k_) throw InvalidArgument("grid coordinate count mismatch");
  std::size_t id = 0;
  for (auto c : coords) {
    if (c >= D_) throw InvalidArgument("grid coordinate out of range");
    id = id * D_ + c;
  }
  return id;
}

std::optional<PointId> Theorem2Space::find_center(const PointSet& S) const {
  auto it = index_.find(S.words());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PointId Theorem2Space::center(const PointSet& S) {
  if (S.capacity() != n_) throw InvalidArgument("subset capacity must equal n");
  const std::size_t c = S.count();
  if (c == 0 || c == n_) throw InvalidArgument("z_S needs a nonempty proper subset S");
  if (auto found = find_center(S)) return *found;
  const PointId id = n_ + centers_.size();
  centers_.push_back(S);
  index_.emplace(S.words(), id);
  return id;
}

const PointSet& Theorem2Space::subset_of(PointId z) const {
  if (z < n_ || z >= size()) throw InvalidArgument("not a materialized center");
  return centers_[z - n_];
}

Theorem2Space build_theorem2_space(std::size_t k, std::size_t D, double gamma, SpaceMode mode) {
  return Theorem2Space(k, D, gamma, mode);
}

Theorem2Adversary::Theorem2Adversary(const MetricSpace& arena, std::vector<PointId> grid_ids,
                                     CenterFn center, double R)
    : arena_(&arena),
      grid_ids_(std::move(grid_ids)),
      center_(std::move(center)),
      R_(R),
      visited_(grid_ids_.size()) {
  if (grid_ids_.size() < 2) throw InvalidArgument("the grid needs at least two points");
  for (std::size_t j = 0; j < grid_ids_.size(); ++j) grid_index_.emplace(grid_ids_[j], j);
}

std::optional<BallSpec> Theorem2Adversary::next(std::span<const PointId> positions) {
  if (positions.empty()) throw InvalidArgument("no player position");
  visited_ = PointSet(grid_ids_.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const PointId x = positions[t];
    if (x >= arena_->size()) throw InvalidArgument("player position is outside the space");
    auto it = grid_index_.find(x);
    if (it == grid_index_.end()) {
      if (t == 0) throw InvalidArgument("the player must start at a grid point");
      reason_ = TerminationReason::player_escaped;
      return std::nullopt;
    }
    visited_.insert(it->second);
  }
  if (visited_.count() == grid_ids_.size()) {
    reason_ = TerminationReason::adversary_stopped;
    return std::nullopt;
  }
  return BallSpec{center_(visited_), R_, Openness::closed};
}

Theorem2Adversary theorem2_adversary(Theorem2Space& space) {
  std::vector<PointId> grid(space.n());
  for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = j;
  return Theorem2Adversary(space, std::move(grid),
                           [&space](const PointSet& S) { return space.center(S); }, space.R());
}

FLAdversary::FLAdversary(const NormedSpace& space) : d_(space.dim) {}

std::optional<ConvexBody> FLAdversary::next(std::span<const Vector> positions) {
  if (positions.empty()) throw InvalidArgument("no player position");
  for (const auto& x : positions) {
    if (static_cast<std::size_t>(x.size()) != d_) throw InvalidArgument("dimension mismatch");
  }
  if (!positions.front().isZero(0.0)) throw InvalidArgument("the player must start at the origin");
  const std::size_t t = positions.size() - 1;  // requests emitted so far
  if (t >= d_) return std::nullopt;
  signs_.resize(t);
  const double cur = positions.back()[static_cast<Eigen::Index>(t)];
  signs_.push_back(cur > 0.0 ? -1 : 1);
  Vector lo = Vector::Constant(static_cast<Eigen::Index>(d_), -1.0);
  Vector hi = Vector::Constant(static_cast<Eigen::Index>(d_), 1.0);
  for (std::size_t i = 0; i <= t; ++i) {
    lo[static_cast<Eigen::Index>(i)] = signs_[i];
    hi[static_cast<Eigen::Index>(i)] = signs_[i];
  }
  return make_box(std::move(lo), std::move(hi));
}

FLAdversary fl_adversary(const NormedSpace& space) { return FLAdversary(space); }

std::size_t GluedSpace::add_part(std::shared_ptr<MetricSpace> part, double bridge,
                                 std::string tag) {
  if (!part) throw InvalidArgument("null part");
  if (lattice_) throw InvalidArgument("parts must be added before the lattice");
  if (!parts_.empty()) {
    if (!(bridge > 0.0)) throw InvalidArgument("bridge distance must be > 0");
    check_distance(bridge, "bridge distance");
  }
  parts_.push_back({std::move(part), parts_.empty() ? 0.0 : bridge, std::move(tag), {}});
  sync(parts_.size() - 1);
  return parts_.size() - 1;
}

void GluedSpace::set_lattice(Lattice lattice) {
  if (lattice.offsets.size() != parts_.size()) {
    throw InvalidArgument("the lattice needs one offset per part");
  }
  for (double o : lattice.offsets) check_distance(o, "lattice offset");
  lattice_ = std::move(lattice);
  lattice_global_.clear();
  for (std::size_t i = 0; i < lattice_->points.size(); ++i) {
    lattice_global_.push_back(registry_.size());
    registry_.emplace_back(parts_.size(), i);
  }
}

void GluedSpace::sync(std::size_t part) {
  auto& p = parts_.at(part);
  while (p.global.size() < p.space->size()) {
    p.global.push_back(registry_.size());
    registry_.emplace_back(part, p.global.size() - 1);
  }
}

PointId GluedSpace::global_id(std::size_t part, PointId local) {
  sync(part);
  return parts_.at(part).global.at(local);
}

std::vector<PointId> GluedSpace::part_ids(std::size_t part) const {
  if (part == parts_.size()) return lattice_global_;
  return parts_.at(part).global;
}

double GluedSpace::distance(PointId a, PointId b) const {
  const auto [pa, la] = registry_.at(a);
  const auto [pb, lb] = registry_.at(b);
  const std::size_t L = parts_.size();
  if (pa == L && pb == L) {
    const auto& pts = lattice_->points;
    return lp_distance(std::span<const double>(pts[la].data(), pts[la].size()),
                       std::span<const double>(pts[lb].data(), pts[lb].size()), lattice_->p);
  }
  if (pa == L || pb == L) {
    const std::size_t part = pa == L ? pb : pa;
    const auto& y = lattice_->points[pa == L ? la : lb];
    return lattice_->offsets[part] +
           lp_norm(std::span<const double>(y.data(), y.size()), lattice_->p);
  }
  if (pa == pb) return parts_[pa].space->distance(la, lb);
  return parts_[std::max(pa, pb)].bridge;
}

std::string GluedSpace::name(PointId p) const {
  const auto [part, local] = registry_.at(p);
  if (part == parts_.size()) {
    const auto& y = lattice_->points[local];
    return "L." + format_vector(y);
  }
  return parts_[part].tag + "." + parts_[part].space->name(local);
}

std::string GluedSpace::label(PointId p) const {
  const auto [part, local] = registry_.at(p);
  if (part == parts_.size()) return "L";
  const std::string inner = parts_[part].space->label(local);
  return inner.empty() ? parts_[part].tag : parts_[part].tag + ":" + inner;
}

SpaceMode GluedSpace::mode() const {
  for (const auto& p : parts_) {
    if (p.space->mode() == SpaceMode::lazy) return SpaceMode::lazy;
  }
  return SpaceMode::explicit_matrix;
}

GluedSpace glue_pair(std::shared_ptr<MetricSpace> X, std::shared_ptr<MetricSpace> Y,
                     double gamma) {
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must be > 1");
  const double bridge = 2.0 * gamma * std::max(diameter(*X), diameter(*Y));
  GluedSpace out;
  out.add_part(std::move(X), 0.0, "X");
  // Two coincident-diameter-zero parts still need distinct points.
  out.add_part(std::move(Y), bridge > 0.0 ? bridge : 1.0, "Y");
  return out;
}

std::vector<LevelParams> default_phase1_levels(std::size_t N_max) {
  std::vector<LevelParams> out;
  for (std::size_t N = 1; N <= N_max; ++N) out.push_back({2, std::max<std::size_t>(N, 2)});
  return out;
}

Phase1Space build_phase1_space(double gamma, const std::vector<LevelParams>& levels,
                               SpaceMode mode) {
  if (levels.empty()) throw InvalidArgument("N_max must be >= 1");
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must be > 1");
  Phase1Space out;
  out.gamma = gamma;
  out.levels = levels;
  double diam_Y = 0.0;
  for (std::size_t N = 1; N <= levels.size(); ++N) {
    auto part = std::make_shared<Theorem2Space>(levels[N - 1].k, levels[N - 1].D, gamma, mode);
    const double diam_X = part->diameter_bound();
    double radius = 0.0;
    if (N == 1) {
      radius = 2.0 * gamma * diam_X;
      diam_Y = diam_X;
    } else {
      radius = 2.0 * gamma * std::max(diam_X, diam_Y);
      diam_Y = std::max({diam_Y, diam_X, radius});
    }
    check_distance(radius, "R_" + std::to_string(N));
    out.level_radius.push_back(radius);
    out.space.add_part(part, radius, "X" + std::to_string(N));
    out.parts.push_back(std::move(part));
  }
  return out;
}

Theorem2Adversary level_adversary(Phase1Space& phase1, std::size_t level) {
  if (level < 1 || level > phase1.parts.size()) throw InvalidArgument("no such level");
  const std::size_t part = level - 1;
  auto& space = phase1.space;
  auto t2 = phase1.parts[part];
  std::vector<PointId> grid(t2->n());
  for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = space.global_id(part, j);
  return Theorem2Adversary(
      space, std::move(grid),
      [&space, t2, part](const PointSet& S) { return space.global_id(part, t2->center(S)); },
      t2->R());
}

std::vector<Vector> lattice_in_ball(std::size_t m, double p, double step, double r) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(step > 0.0)) throw InvalidArgument("lattice_step must be > 0");
  if (!(r > 0.0)) throw InvalidArgument("r must be > 0");
  if (!(p >= 1.0)) throw InvalidArgument("p must be in [1, inf]");
  const auto K = static_cast<long long>(std::ceil(r / step));
  const double side = static_cast<double>(2 * K + 1);
  if (std::pow(side, static_cast<double>(m)) > 1e6) {
    throw CapacityExceeded("lattice box has more than 10^6 points");
  }
  std::vector<long long> idx(m, -K);
  std::vector<Vector> out;
  for (;;) {
    Vector y(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) y[static_cast<Eigen::Index>(i)] = static_cast<double>(idx[i]) * step;
    if (lp_norm(std::span<const double>(y.data(), m), p) < r) out.push_back(std::move(y));
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == K) {
      idx[i - 1] = -K;
      --i;
    }
    if (i == 0) break;
    ++idx[i - 1];
  }
  return out;
}

GluedSpace build_phase2_space(const Phase1Space& phase1, std::size_t m, double p,
                              double lattice_step, double r) {
  if (phase1.level_radius.empty()) throw InvalidArgument("empty Phase I space");
  if (!(r < phase1.level_radius.front())) {
    throw InvalidArgument("r must be < R_1 = " + csv::format_number(phase1.level_radius.front()));
  }
  GluedSpace out = phase1.space;
  GluedSpace::Lattice L;
  L.points = lattice_in_ball(m, p, lattice_step, r);
  L.p = p;
  L.offsets = phase1.level_radius;
  out.set_lattice(std::move(L));
  return out;
}

}  // namespace chaselab
