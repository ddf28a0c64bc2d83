#include "chaselab/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaselab/errors.hpp"

namespace chaselab {

namespace {

std::vector<std::string> numbered_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  return ids;
}

std::size_t pick(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

FiniteMetricSpace random_metric_space(std::size_t n, double lo, double hi, bool integer, Rng& rng) {
  if (n == 0) throw InvalidArgument("need at least one point");
  if (!(lo > 0.0) || !(hi >= lo) || hi > 2.0 * lo) {
    throw InvalidArgument("distance range must satisfy 0 < lo <= hi <= 2 lo");
  }
  std::vector<double> m(n * n, 0.0);
  std::uniform_real_distribution<double> real(lo, hi);
  std::uniform_int_distribution<long> whole(static_cast<long>(std::ceil(lo)),
                                            static_cast<long>(std::floor(hi)));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = integer ? static_cast<double>(whole(rng)) : real(rng);
      m[a * n + b] = v;
      m[b * n + a] = v;
    }
  }
  return FiniteMetricSpace::from_matrix(numbered_ids(n), std::move(m));
}

FiniteMetricSpace random_graph_metric(std::size_t n, double edge_prob, int max_weight, Rng& rng) {
  if (n == 0) throw InvalidArgument("need at least one point");
  if (max_weight < 1) throw InvalidArgument("max_weight must be >= 1");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> m(n * n, inf);
  std::uniform_int_distribution<int> weight(1, max_weight);
  std::bernoulli_distribution edge(edge_prob);
  for (std::size_t a = 0; a < n; ++a) m[a * n + a] = 0.0;
  // A random spanning path keeps the graph connected.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 1; i < n; ++i) {
    const double w = weight(rng);
    m[order[i - 1] * n + order[i]] = w;
    m[order[i] * n + order[i - 1]] = w;
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (edge(rng)) {
        const double w = weight(rng);
        m[a * n + b] = std::min(m[a * n + b], w);
        m[b * n + a] = m[a * n + b];
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        m[a * n + b] = std::min(m[a * n + b], m[a * n + k] + m[k * n + b]);
      }
    }
  }
  return FiniteMetricSpace::from_matrix(numbered_ids(n), std::move(m));
}

std::vector<BallSpec> random_nested_balls(const MetricSpace& space, std::size_t T, Rng& rng) {
  const std::size_t n = space.size();
  if (n == 0) throw InvalidArgument("empty space");
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = std::max(diameter(space), 1.0) * 1.05;

  std::vector<BallSpec> out;
  PointSet members = PointSet::full(n);
  for (std::size_t t = 0; t < T; ++t) {
    const auto candidates = members.to_vector();
    const PointId c = candidates[pick(candidates.size(), rng)];
    double limit = span;
    for (PointId y = 0; y < n; ++y) {
      if (!members.contains(y)) limit = std::min(limit, space.distance(c, y));
    }
    // An open ball of radius <= limit, or a closed one of radius < limit,
    // avoids every non-member.
    const bool open = coin(rng);
    double r = limit * (open ? 1.0 - unit(rng) : unit(rng));
    if (open && r == 0.0) r = limit;
    BallSpec ball{c, r, open ? Openness::open : Openness::closed};
    out.push_back(ball);
    members = ball_members(space, ball);
  }
  return out;
}

EvictingNestedAdversary::EvictingNestedAdversary(const MetricSpace& space, std::size_t T,
                                                 std::uint64_t seed)
    : space_(space), T_(T), rng_(seed), members_(PointSet::full(space.size())) {
  if (space.size() == 0) throw InvalidArgument("empty space");
}

std::optional<BallSpec> EvictingNestedAdversary::next(std::span<const PointId> positions) {
  if (issued_ >= T_) return std::nullopt;
  const PointId x = positions.back();
  PointSet candidates = members_;
  if (x < candidates.capacity()) candidates.erase(x);
  if (candidates.empty()) return std::nullopt;
  const auto ids = candidates.to_vector();
  const PointId c = ids[pick(ids.size(), rng_)];
  // Radius up to the nearest point that must stay out: non-members and x.
  double limit = space_.distance(c, x);
  for (PointId y = 0; y < space_.size(); ++y) {
    if (!members_.contains(y)) limit = std::min(limit, space_.distance(c, y));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool open = std::bernoulli_distribution(0.5)(rng_);
  double r = limit * (open ? 1.0 - unit(rng_) : unit(rng_));
  if (open && r == 0.0) r = limit;
  BallSpec ball{c, r, open ? Openness::open : Openness::closed};
  members_ = ball_members(space_, ball);
  ++issued_;
  return ball;
}

std::vector<BallSpec> random_balls(const MetricSpace& space, std::size_t T,
                                   std::size_t max_members, Rng& rng) {
  const std::size_t n = space.size();
  if (n == 0 || max_members == 0) throw InvalidArgument("empty space or member cap");
  std::vector<BallSpec> out;
  for (std::size_t t = 0; t < T; ++t) {
    const PointId c = pick(n, rng);
    std::vector<double> dist;
    for (PointId y = 0; y < n; ++y) dist.push_back(space.distance(c, y));
    std::sort(dist.begin(), dist.end());
    const std::size_t k = 1 + pick(std::min(max_members, n), rng);
    BallSpec ball{c, dist[k - 1], Openness::closed};
    if (ball_members(space, ball).count() > max_members) ball.openness = Openness::open;
    if (ball_members(space, ball).empty()) ball = {c, 0.0, Openness::closed};
    out.push_back(ball);
  }
  return out;
}

std::vector<ConvexBody> random_nested_boxes(std::size_t d, std::size_t T, Rng& rng) {
  if (d == 0) throw InvalidArgument("dimension must be >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector lo = Vector::Constant(static_cast<Eigen::Index>(d), -1.0);
  Vector hi = Vector::Constant(static_cast<Eigen::Index>(d), 1.0);
  std::vector<ConvexBody> out;
  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      const double w = hi[i] - lo[i];
      double a = std::min(hi[i], lo[i] + unit(rng) * w);
      double b = std::min(hi[i], lo[i] + unit(rng) * w);
      if (a > b) std::swap(a, b);
      lo[i] = a;
      hi[i] = b;
    }
    out.push_back(make_box(lo, hi));
  }
  return out;
}

}  // namespace chaselab
