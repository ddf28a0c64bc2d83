#include "chaselab/dimension.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <exception>
#include <mutex>
#include <thread>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"
#include "chaselab/parallel.hpp"

namespace chaselab {

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_thread_count(std::size_t threads) { g_threads = std::max<std::size_t>(1, threads); }
std::size_t thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  // The error of the lowest failing index wins, so failures are reproducible
  // regardless of scheduling.
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(mu);
            if (i < failed_at) {
              failed_at = i;
              error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

// Row-major cache of all pairwise distances of the enumerable points.
struct DistanceCache {
  std::size_t n = 0;
  std::vector<double> d;

  explicit DistanceCache(const MetricSpace& space) : n(space.size()), d(n * n, 0.0) {
    for (PointId a = 0; a < n; ++a) {
      for (PointId b = a + 1; b < n; ++b) {
        const double v = space.distance(a, b);
        d[a * n + b] = v;
        d[b * n + a] = v;
      }
    }
  }
  double operator()(PointId a, PointId b) const { return d[a * n + b]; }

  std::vector<double> levels() const {
    std::vector<double> out;
    for (PointId a = 0; a < n; ++a) {
      for (PointId b = a + 1; b < n; ++b) out.push_back(d[a * n + b]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove_if(out.begin(), out.end(), [](double v) { return v <= 0.0; }),
              out.end());
    return out;
  }

  // {y : d(x, y) < bound} / {y : d(x, y) <= bound}
  PointSet ball(PointId x, double bound, bool closed) const {
    PointSet s(n);
    for (PointId y = 0; y < n; ++y) {
      const double v = d[x * n + y];
      if (closed ? v <= bound : v < bound) s.insert(y);
    }
    return s;
  }

  std::vector<PointSet> hoods(double bound, bool closed) const {
    std::vector<PointSet> out;
    out.reserve(n);
    for (PointId c = 0; c < n; ++c) out.push_back(ball(c, bound, closed));
    return out;
  }
};

std::vector<PointId> touching(const PointSet& target, const std::vector<PointSet>& hoods) {
  std::vector<PointId> ids;
  for (PointId c = 0; c < hoods.size(); ++c) {
    if (hoods[c].intersects(target)) ids.push_back(c);
  }
  return ids;
}

}  // namespace

GammaCoverResult gamma_cover_constant(const MetricSpace& space, double gamma,
                                      const CoverOptions& options) {
  if (!(gamma > 1.0)) throw InvalidArgument("gamma must be > 1");
  if (space.size() == 0) throw InvalidArgument("gamma cover constant of an empty space");

  const DistanceCache dist(space);
  const std::size_t n = dist.n;
  const std::vector<double> levels = dist.levels();

  GammaCoverResult result;
  result.gamma = gamma;
  result.witness_radius = levels.empty() ? 1.0 : levels.front() / 2.0;

  std::vector<double> critical = levels;
  for (double v : levels) critical.push_back(gamma * v);
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

  struct CenterBest {
    std::size_t value = 1;
    double radius = 0.0;
    bool exact = true;            // value came from an exact cover
    std::size_t greedy_peak = 0;  // largest greedy-only count seen
  };
  std::vector<CenterBest> best(n);
  for (auto& b : best) b.radius = result.witness_radius;

  // Which centers see each level as one of their own distances.
  std::vector<std::vector<PointId>> centers_at(levels.size());
  for (PointId x = 0; x < n; ++x) {
    std::vector<double> mine;
    for (PointId y = 0; y < n; ++y) {
      if (y != x) mine.push_back(dist(x, y));
    }
    std::sort(mine.begin(), mine.end());
    mine.erase(std::unique(mine.begin(), mine.end()), mine.end());
    for (double v : mine) {
      auto it = std::lower_bound(levels.begin(), levels.end(), v);
      if (it != levels.end() && *it == v) centers_at[it - levels.begin()].push_back(x);
    }
  }

  for (std::size_t li = 0; li < levels.size(); ++li) {
    if (centers_at[li].empty()) continue;
    const double a = levels[li];
    const double next = *std::upper_bound(critical.begin(), critical.end(), a);
    const double radius = 0.5 * (a + next);
    const auto hoods = dist.hoods(radius / gamma, false);
    const auto& centers = centers_at[li];
    parallel_for(centers.size(), [&](std::size_t k) {
      const PointId x = centers[k];
      CenterBest& b = best[x];
      const PointSet target = dist.ball(x, radius, false);
      if (target.count() <= b.value) return;
      const auto ids = touching(target, hoods);
      const CoverResult cover = cover_with_sets(target, hoods, ids, options);
      if (cover.exactness == Exactness::exact) {
        if (cover.count > b.value) {
          b.value = cover.count;
          b.radius = radius;
          b.exact = true;
        }
      } else {
        b.greedy_peak = std::max(b.greedy_peak, cover.count);
        if (cover.count > b.value) {
          b.value = cover.count;
          b.radius = radius;
          b.exact = false;
        }
      }
    });
  }

  std::size_t greedy_peak = 0;
  bool attained_exactly = false;
  for (PointId x = 0; x < n; ++x) {
    greedy_peak = std::max(greedy_peak, best[x].greedy_peak);
    if (best[x].value > result.lambda) {
      result.lambda = best[x].value;
      result.witness_center = x;
      result.witness_radius = best[x].radius;
    }
  }
  for (PointId x = 0; x < n; ++x) {
    if (best[x].value == result.lambda && best[x].exact) attained_exactly = true;
  }
  if (result.lambda == 1) attained_exactly = true;
  result.exactness = attained_exactly && greedy_peak <= result.lambda
                         ? Exactness::exact
                         : Exactness::greedy_upper_bound;
  result.dim = std::log(static_cast<double>(result.lambda)) / std::log(gamma);
  return result;
}

AssouadResult assouad_estimate(const MetricSpace& space, const CoverOptions& options) {
  if (space.size() == 0) throw InvalidArgument("Assouad estimate of an empty space");
  AssouadResult result;
  if (space.size() == 1) {
    result.witness = {0, 0.0, 0.0, 1, 0.0, Exactness::exact};
    result.per_center.push_back(result.witness);
    return result;
  }
  const DistanceCache dist(space);
  const std::size_t n = dist.n;
  const std::vector<double> levels = dist.levels();
  if (levels.empty()) throw InvalidArgument("degenerate space: all points coincide");
  const std::size_t m = levels.size();

  // Closed neighborhoods {d <= c_j}; j = 0 is the singleton level c_0 = 0.
  std::vector<std::vector<PointSet>> hoods(m);
  hoods[0] = dist.hoods(0.0, true);
  for (std::size_t j = 1; j < m; ++j) hoods[j] = dist.hoods(levels[j - 1], true);

  std::vector<AssouadRecord> best(n);
  parallel_for(n, [&](std::size_t xi) {
    const PointId x = xi;
    AssouadRecord rec{x, levels.front(), levels.front(), 1, 0.0, Exactness::exact};
    for (std::size_t k = 0; k < m; ++k) {
      // Ball radius R -> c_k+, so B(x, R) = {d(x, .) <= c_k}.
      const PointSet target = dist.ball(x, levels[k], true);
      const double log_size = std::log(static_cast<double>(target.count()));
      for (std::size_t j = 0; j <= k; ++j) {
        // Cover radius r in (c_{j-1}, c_j]; the tightest ratio uses r = c_j.
        const double r = levels[j];
        const double ratio = levels[k] / r;
        const double log_scale = std::log1p(2.0 * ratio);
        if (log_size / log_scale <= rec.exponent) continue;
        const auto ids = touching(target, hoods[j]);
        const CoverResult cover = cover_with_sets(target, hoods[j], ids, options);
        const double exponent = std::log(static_cast<double>(cover.count)) / log_scale;
        if (exponent > rec.exponent) {
          rec = {x, r, levels[k], cover.count, exponent, cover.exactness};
        }
      }
    }
    best[x] = rec;
  });

  result.per_center = best;
  result.witness = best.front();
  for (const auto& rec : best) {
    if (rec.exponent > result.witness.exponent) result.witness = rec;
  }
  result.rho = result.witness.exponent;
  result.constant = std::pow(3.0, result.rho);
  return result;
}

void write_dimension_report(std::ostream& out, const MetricSpace& space,
                            const DimensionReport& report, const std::string& config_hash) {
  csv::Writer w(out);
  std::vector<std::string> header{"quantity", "gamma",          "value",
                                  "exactness", "witness_center", "witness_radius"};
  if (!config_hash.empty()) header.push_back("config_hash");
  w.row(header);
  auto emit = [&](std::vector<std::string> cells) {
    if (!config_hash.empty()) cells.push_back(config_hash);
    w.row(cells);
  };
  const auto& g = report.gamma_cover;
  const std::string gamma = csv::format_number(g.gamma);
  const std::string center = space.size() > 0 ? space.name(g.witness_center) : "";
  const std::string exact{to_string(g.exactness)};
  emit({"lambda_gamma", gamma, std::to_string(g.lambda), exact, center,
        csv::format_number(g.witness_radius)});
  emit({"dim_gamma", gamma, csv::format_number(g.dim), exact, center,
        csv::format_number(g.witness_radius)});
  if (report.assouad) {
    const auto& a = *report.assouad;
    const std::string ac = space.size() > 0 ? space.name(a.witness.center) : "";
    emit({"assouad_estimate", "", csv::format_number(a.rho), "estimate", ac,
          csv::format_number(a.witness.R)});
    emit({"assouad_constant", "", csv::format_number(a.constant), "estimate", ac,
          csv::format_number(a.witness.r)});
  }
}

EpsilonNet build_epsilon_net(const MetricSpace& space, double eps,
                             std::vector<PointId> insertion_order) {
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be > 0");
  EpsilonNet net;
  for (PointId p : insertion_order) {
    if (p >= space.size()) throw InvalidArgument("insertion order names an unknown point");
    const bool covered = std::any_of(net.points.begin(), net.points.end(),
                                     [&](PointId q) { return space.distance(q, p) < eps; });
    if (!covered) net.points.push_back(p);
  }
  net.insertion_order = std::move(insertion_order);
  return net;
}

EpsilonNet build_epsilon_net(const MetricSpace& space, double eps, std::uint64_t seed) {
  std::vector<PointId> order(space.size());
  std::iota(order.begin(), order.end(), PointId{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return build_epsilon_net(space, eps, std::move(order));
}

NetCheck check_epsilon_net(const MetricSpace& space, std::span<const PointId> net, double eps) {
  NetCheck check;
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = i + 1; j < net.size(); ++j) {
      if (space.distance(net[i], net[j]) < eps) check.separated = false;
    }
  }
  for (PointId p = 0; p < space.size(); ++p) {
    const bool hit = std::any_of(net.begin(), net.end(),
                                 [&](PointId q) { return q == p || space.distance(q, p) < eps; });
    if (!hit) check.covering = false;
  }
  return check;
}

}  // namespace chaselab
