#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chaselab/covering.hpp"
#include "chaselab/metric_space.hpp"

namespace chaselab {

struct GammaCoverResult {
  double gamma = 2.0;
  std::size_t lambda = 1;
  double dim = 0.0;  // log_gamma(lambda)
  PointId witness_center = 0;
  double witness_radius = 0.0;  // an R attaining N_{R/gamma}(B(x,R)) = lambda
  Exactness exactness = Exactness::exact;
};

// lambda_gamma = sup_{x, R>0} N_{R/gamma}(B(x, R)) with open balls.
//
// For a fixed center the ball only changes when R crosses some d(x, y), and on
// each interval (a, a'] the cover count is largest as R -> a+, where the cover
// radius R/gamma sits just above a/gamma. Each center therefore needs one
// cover per distinct distance from it. Throws InvalidArgument if gamma <= 1.
GammaCoverResult gamma_cover_constant(const MetricSpace& space, double gamma,
                                      const CoverOptions& options = {});

struct AssouadRecord {
  PointId center = 0;
  double r = 0.0;  // cover radius (attained)
  double R = 0.0;  // ball radius, exclusive lower end: the bound holds as R -> R+
  std::size_t count = 0;
  double exponent = 0.0;  // log(count) / log(1 + 2 R/r)
  Exactness count_exactness = Exactness::exact;
};

struct AssouadResult {
  double rho = 0.0;
  double constant = 1.0;  // C with N <= C (R/r)^rho over every sampled pair
  AssouadRecord witness;
  std::vector<AssouadRecord> per_center;  // the binding record of each center
};

// Scale-range covering exponent: the smallest rho with
//   N_r(B(x, R)) <= (1 + 2R/r)^rho
// over every center and every pair of radius cells r < R. The volume bound
// for normed spaces has this form with rho = d, so unit lattices in l_inf
// return their dimension exactly. Since (1 + 2s) <= 3s for s >= 1 the
// reported constant is C = 3^rho. A finite space has Assouad dimension 0;
// this is an estimate over the realized scales, never the limit.
// Throws InvalidArgument on an empty or fully coincident space.
AssouadResult assouad_estimate(const MetricSpace& space, const CoverOptions& options = {});

struct DimensionReport {
  GammaCoverResult gamma_cover;
  std::optional<AssouadResult> assouad;
};

// CSV columns: quantity,gamma,value,exactness,witness_center,witness_radius
// plus config_hash when one is given.
void write_dimension_report(std::ostream& out, const MetricSpace& space,
                            const DimensionReport& report,
                            const std::string& config_hash = {});

struct EpsilonNet {
  std::vector<PointId> points;          // in insertion order
  std::vector<PointId> insertion_order;  // the order candidates were offered
};

// Greedy net: scan points in the given order, keep a point unless it lies in
// an open eps-ball around an already kept point.
EpsilonNet build_epsilon_net(const MetricSpace& space, double eps,
                             std::vector<PointId> insertion_order);
// Insertion order is a seeded shuffle of all point indices.
EpsilonNet build_epsilon_net(const MetricSpace& space, double eps, std::uint64_t seed);

struct NetCheck {
  bool separated = true;  // pairwise d >= eps
  bool covering = true;   // every point inside some open B(net point, eps)
};
NetCheck check_epsilon_net(const MetricSpace& space, std::span<const PointId> net, double eps);

}  // namespace chaselab
