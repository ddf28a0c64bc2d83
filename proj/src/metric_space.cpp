#include "chaselab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"
#include "chaselab/geometry.hpp"

namespace chaselab {

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<std::string> ids,
                                                 std::vector<double> matrix,
                                                 std::vector<std::string> labels) {
  const std::size_t n = ids.size();
  if (matrix.size() != n * n) {
    throw MalformedInput("distance matrix has " + std::to_string(matrix.size()) +
                         " entries, expected " + std::to_string(n * n));
  }
  if (!labels.empty() && labels.size() != n) {
    throw MalformedInput("label count does not match point count");
  }
  FiniteMetricSpace s;
  s.ids_ = std::move(ids);
  s.labels_ = std::move(labels);
  s.matrix_ = std::move(matrix);
  return s;
}

FiniteMetricSpace FiniteMetricSpace::lazy(std::vector<std::string> ids, DistanceFn dist,
                                          std::vector<std::string> labels) {
  if (!dist) throw InvalidArgument("lazy space needs a distance function");
  if (!labels.empty() && labels.size() != ids.size()) {
    throw MalformedInput("label count does not match point count");
  }
  FiniteMetricSpace s;
  s.ids_ = std::move(ids);
  s.labels_ = std::move(labels);
  s.dist_ = std::move(dist);
  return s;
}

FiniteMetricSpace FiniteMetricSpace::materialize(const MetricSpace& source) {
  std::vector<PointId> all(source.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return materialize(source, all);
}

FiniteMetricSpace FiniteMetricSpace::materialize(const MetricSpace& source,
                                                 std::span<const PointId> subset) {
  const std::size_t n = subset.size();
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<double> matrix(n * n);
  bool any_label = false;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(source.name(subset[i]));
    labels.push_back(source.label(subset[i]));
    any_label = any_label || !labels.back().empty();
    for (std::size_t j = 0; j < n; ++j) {
      matrix[i * n + j] = i == j ? 0.0 : source.distance(subset[i], subset[j]);
    }
  }
  if (!any_label) labels.clear();
  return from_matrix(std::move(ids), std::move(matrix), std::move(labels));
}

double FiniteMetricSpace::distance(PointId a, PointId b) const {
  if (dist_) return dist_(a, b);
  return matrix_[a * ids_.size() + b];
}

std::string FiniteMetricSpace::label(PointId p) const {
  return labels_.empty() ? std::string{} : labels_.at(p);
}

std::optional<PointId> FiniteMetricSpace::find(const std::string& id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<PointId>(it - ids_.begin());
}

FiniteMetricSpace FiniteMetricSpace::subspace(std::span<const PointId> subset) const {
  return materialize(*this, subset);
}

bool ball_contains(const MetricSpace& space, const BallSpec& ball, PointId y) {
  const double d = space.distance(ball.center, y);
  return ball.openness == Openness::open ? d < ball.radius : d <= ball.radius;
}

PointSet ball_members(const MetricSpace& space, const BallSpec& ball) {
  if (ball.center >= space.size()) {
    throw InvalidArgument("unknown ball center " + std::to_string(ball.center));
  }
  if (!(ball.radius >= 0.0)) throw InvalidArgument("ball radius must be >= 0");
  PointSet out(space.size());
  for (PointId y = 0; y < space.size(); ++y) {
    if (y == ball.center) {
      if (ball.openness == Openness::closed || ball.radius > 0.0) out.insert(y);
      continue;
    }
    if (ball_contains(space, ball, y)) out.insert(y);
  }
  return out;
}

double diameter(const MetricSpace& space) {
  double best = 0.0;
  for (PointId a = 0; a < space.size(); ++a) {
    for (PointId b = a + 1; b < space.size(); ++b) best = std::max(best, space.distance(a, b));
  }
  return best;
}

double diameter(const MetricSpace& space, const PointSet& subset) {
  const auto pts = subset.to_vector();
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, space.distance(pts[i], pts[j]));
    }
  }
  return best;
}

namespace {

void check_entry(double d, PointId a, PointId b) {
  if (!std::isfinite(d) || d < 0.0) {
    std::ostringstream msg;
    msg << "malformed distance d(" << a << "," << b << ") = " << d;
    throw MalformedInput(msg.str());
  }
}

void check_pairs(const MetricSpace& space, std::span<const PointId> sample, double rel_tol,
                 ValidationReport& report) {
  for (PointId a : sample) {
    const double self = space.distance(a, a);
    check_entry(self, a, a);
    if (self != 0.0) {
      report.violations.push_back({MetricViolation::Kind::self_distance, a, a, a, self});
    }
  }
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = i + 1; j < sample.size(); ++j) {
      const PointId a = sample[i];
      const PointId b = sample[j];
      const double ab = space.distance(a, b);
      const double ba = space.distance(b, a);
      check_entry(ab, a, b);
      check_entry(ba, b, a);
      if (ab <= 0.0) report.violations.push_back({MetricViolation::Kind::positivity, a, b, a, -ab});
      if (std::abs(ab - ba) > rel_tol * std::max({1.0, ab, ba})) {
        report.violations.push_back({MetricViolation::Kind::symmetry, a, b, a, std::abs(ab - ba)});
      }
    }
  }
}

void check_triangle(const MetricSpace& space, PointId a, PointId b, PointId c, double rel_tol,
                    ValidationReport& report) {
  const double ac = space.distance(a, c);
  const double via = space.distance(a, b) + space.distance(b, c);
  const double slack = ac - via;
  if (slack > rel_tol * std::max(1.0, ac)) {
    report.violations.push_back({MetricViolation::Kind::triangle, a, b, c, slack});
  }
}

}  // namespace

ValidationReport validate_metric(const MetricSpace& space, double rel_tol) {
  std::vector<PointId> all(space.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return validate_metric(space, all, rel_tol);
}

ValidationReport validate_metric(const MetricSpace& space, std::span<const PointId> sample,
                                 double rel_tol) {
  ValidationReport report;
  check_pairs(space, sample, rel_tol, report);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t k = i + 1; k < sample.size(); ++k) {
      for (std::size_t j = 0; j < sample.size(); ++j) {
        if (j == i || j == k) continue;
        check_triangle(space, sample[i], sample[j], sample[k], rel_tol, report);
      }
    }
  }
  return report;
}

ValidationReport validate_metric_random(const MetricSpace& space, std::span<const PointId> sample,
                                        std::size_t triples, std::uint64_t seed, double rel_tol) {
  ValidationReport report;
  if (sample.size() < 3) return validate_metric(space, sample, rel_tol);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  for (std::size_t t = 0; t < triples; ++t) {
    const PointId a = sample[pick(rng)];
    const PointId b = sample[pick(rng)];
    const PointId c = sample[pick(rng)];
    if (a == b || b == c || a == c) continue;
    const PointId pair[2] = {a, c};
    check_pairs(space, pair, rel_tol, report);
    check_triangle(space, a, b, c, rel_tol, report);
  }
  return report;
}

FiniteMetricSpace read_distance_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedInput("distance matrix: empty input");
  auto header = csv::split_line(line);
  if (header.size() < 2) throw MalformedInput("distance matrix: header needs at least one id");
  std::vector<std::string> ids(header.begin() + 1, header.end());
  const std::size_t n = ids.size();
  std::vector<double> matrix(n * n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = csv::split_line(line);
    if (row >= n) throw MalformedInput("distance matrix: more rows than ids");
    if (cells.size() != n + 1) {
      throw MalformedInput("distance matrix: row " + std::to_string(row + 1) + " has " +
                           std::to_string(cells.size() - 1) + " entries, expected " +
                           std::to_string(n));
    }
    if (cells[0] != ids[row]) {
      throw MalformedInput("distance matrix: row id '" + cells[0] + "' does not match header '" +
                           ids[row] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double d = csv::parse_number(cells[j + 1]);
      check_entry(d, row, j);
      matrix[row * n + j] = d;
    }
    ++row;
  }
  if (row != n) throw MalformedInput("distance matrix: fewer rows than ids");
  return FiniteMetricSpace::from_matrix(std::move(ids), std::move(matrix));
}

void write_distance_matrix(std::ostream& out, const MetricSpace& space) {
  csv::Writer w(out);
  std::vector<std::string> header{"id"};
  for (PointId i = 0; i < space.size(); ++i) header.push_back(space.name(i));
  w.row(header);
  for (PointId i = 0; i < space.size(); ++i) {
    std::vector<std::string> cells{space.name(i)};
    for (PointId j = 0; j < space.size(); ++j) {
      cells.push_back(csv::format_number(i == j ? 0.0 : space.distance(i, j)));
    }
    w.row(cells);
  }
}

FiniteMetricSpace read_coordinates(std::istream& in, double p) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedInput("coordinates: empty input");
  const auto header = csv::split_line(line);
  if (header.size() < 2) throw MalformedInput("coordinates: need id plus at least one column");
  const std::size_t d = header.size() - 1;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> coords;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = csv::split_line(line);
    if (cells.size() != d + 1) {
      throw MalformedInput("coordinates: row '" + cells[0] + "' has wrong column count");
    }
    ids.push_back(cells[0]);
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = csv::parse_number(cells[j + 1]);
      if (!std::isfinite(x[j])) throw MalformedInput("coordinates: non-finite entry");
    }
    coords.push_back(std::move(x));
  }
  const std::size_t n = ids.size();
  std::vector<double> matrix(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = lp_distance(coords[i], coords[j], p);
      matrix[i * n + j] = v;
      matrix[j * n + i] = v;
    }
  }
  return FiniteMetricSpace::from_matrix(std::move(ids), std::move(matrix));
}

}  // namespace chaselab
