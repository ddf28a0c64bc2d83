#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaselab/point_set.hpp"

namespace chaselab {

enum class SpaceMode { explicit_matrix, lazy };

// A finite (or finitely enumerated) metric space. Points are addressed by
// dense indices 0..size()-1; lazily materialized spaces may grow, but an index
// once handed out keeps its meaning.
class MetricSpace {
 public:
  virtual ~MetricSpace() = default;

  virtual std::size_t size() const = 0;
  virtual double distance(PointId a, PointId b) const = 0;
  virtual std::string name(PointId p) const = 0;
  virtual std::string label(PointId /*p*/) const { return {}; }
  virtual SpaceMode mode() const = 0;
};

// Explicit distance matrix or a distance callback over a fixed point list.
class FiniteMetricSpace final : public MetricSpace {
 public:
  using DistanceFn = std::function<double(PointId, PointId)>;

  FiniteMetricSpace() = default;

  // matrix is row-major size ids.size()^2. Labels may be empty.
  static FiniteMetricSpace from_matrix(std::vector<std::string> ids,
                                       std::vector<double> matrix,
                                       std::vector<std::string> labels = {});
  static FiniteMetricSpace lazy(std::vector<std::string> ids, DistanceFn dist,
                                std::vector<std::string> labels = {});
  // Explicit copy of the currently enumerable points of any space.
  static FiniteMetricSpace materialize(const MetricSpace& source);
  static FiniteMetricSpace materialize(const MetricSpace& source, std::span<const PointId> subset);

  std::size_t size() const override { return ids_.size(); }
  double distance(PointId a, PointId b) const override;
  std::string name(PointId p) const override { return ids_.at(p); }
  std::string label(PointId p) const override;
  SpaceMode mode() const override { return dist_ ? SpaceMode::lazy : SpaceMode::explicit_matrix; }

  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<PointId> find(const std::string& id) const;

  FiniteMetricSpace subspace(std::span<const PointId> subset) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  std::vector<double> matrix_;
  DistanceFn dist_;
};

enum class Openness { open, closed };

struct BallSpec {
  PointId center = 0;
  double radius = 0.0;
  Openness openness = Openness::closed;

  friend bool operator==(const BallSpec&, const BallSpec&) = default;
};

bool ball_contains(const MetricSpace& space, const BallSpec& ball, PointId y);

// Members among the enumerable points of the space.
PointSet ball_members(const MetricSpace& space, const BallSpec& ball);

double diameter(const MetricSpace& space);
double diameter(const MetricSpace& space, const PointSet& subset);

struct MetricViolation {
  enum class Kind { self_distance, positivity, symmetry, triangle };
  Kind kind;
  PointId a = 0;
  PointId b = 0;
  PointId c = 0;  // triangle only: d(a,c) <= d(a,b) + d(b,c) failed
  double slack = 0.0;
};

struct ValidationReport {
  std::vector<MetricViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Exhaustive check over every pair and triple of the enumerable points.
// Throws MalformedInput on non-finite or negative entries.
ValidationReport validate_metric(const MetricSpace& space, double rel_tol = 1e-12);
// Same checks restricted to a caller-chosen sample.
ValidationReport validate_metric(const MetricSpace& space, std::span<const PointId> sample,
                                 double rel_tol = 1e-12);
// Uniformly random triples from the sample, for spaces too big to scan.
ValidationReport validate_metric_random(const MetricSpace& space, std::span<const PointId> sample,
                                        std::size_t triples, std::uint64_t seed,
                                        double rel_tol = 1e-12);

// Distance-matrix CSV: header "id,<id1>,...", then one row per point
// "<id>,d1,...". An optional trailing "label" column is not used.
FiniteMetricSpace read_distance_matrix(std::istream& in);
void write_distance_matrix(std::ostream& out, const MetricSpace& space);

// Coordinate CSV: header "id,x1,...,xd", then "<id>,v1,...,vd". Distances use
// the l_p norm (p may be +inf).
FiniteMetricSpace read_coordinates(std::istream& in, double p);

}  // namespace chaselab
