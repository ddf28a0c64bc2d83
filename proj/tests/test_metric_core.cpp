#include <sstream>

#include "chaselab/constructions.hpp"
#include "chaselab/covering.hpp"
#include "chaselab/csv.hpp"
#include "chaselab/dimension.hpp"
#include "chaselab/errors.hpp"
#include "chaselab/metric_space.hpp"
#include "chaselab/random_instances.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chaselab;

namespace {

FiniteMetricSpace path(std::size_t n) {
  std::vector<std::string> ids;
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i + 1));
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = std::abs(double(i) - double(j));
  }
  return FiniteMetricSpace::from_matrix(ids, m);
}

FiniteMetricSpace grid(std::size_t side) {
  std::vector<std::string> ids;
  const std::size_t n = side * side;
  std::vector<double> m(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    ids.push_back("g" + std::to_string(a));
    for (std::size_t b = 0; b < n; ++b) {
      const double dx = std::abs(double(a / side) - double(b / side));
      const double dy = std::abs(double(a % side) - double(b % side));
      m[a * n + b] = std::max(dx, dy);
    }
  }
  return FiniteMetricSpace::from_matrix(ids, m);
}

}  // namespace

TEST_CASE("point set basics") {
  PointSet s(130);
  s.insert(3);
  s.insert(129);
  CHECK(s.count() == 2);
  CHECK(s.contains(129));
  CHECK_FALSE(s.contains(4));
  CHECK(s.first() == 3);
  CHECK(s.to_vector() == std::vector<PointId>{3, 129});
  auto f = PointSet::full(130);
  CHECK(f.count() == 130);
  CHECK(s.is_subset_of(f));
  f.subtract(s);
  CHECK(f.count() == 128);
  CHECK_FALSE(f.intersects(s));
}

TEST_CASE("csv numbers round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 2.5, -7.0, 123456789.125}) {
    CHECK(csv::parse_number(csv::format_number(v)) == v);
  }
  CHECK(csv::format_number(2.0) == "2");
  CHECK(csv::split_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
}

TEST_CASE("validate_metric finds the broken triangle") {
  auto s = FiniteMetricSpace::from_matrix({"a", "b", "c"}, {0, 1, 3, 1, 0, 1, 3, 1, 0});
  const auto rep = validate_metric(s);
  REQUIRE(rep.violations.size() >= 1);
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.kind == MetricViolation::Kind::triangle && v.a == 0 && v.b == 1 && v.c == 2) {
      found = true;
      CHECK(v.slack == doctest::Approx(1.0));
    }
  }
  CHECK(found);
}

TEST_CASE("validate_metric accepts constructions and graph metrics") {
  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  CHECK(validate_metric(t).ok());
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    auto g = random_graph_metric(6, 0.4, 5, rng);
    CHECK(validate_metric(g).ok());
  }
}

TEST_CASE("malformed matrix input is rejected") {
  std::istringstream bad("id,a,b\na,0,1\nb,2,0\n");
  CHECK_FALSE(validate_metric(read_distance_matrix(bad)).ok());
  std::istringstream neg("id,a,b\na,0,-1\nb,-1,0\n");
  CHECK_THROWS_AS(validate_metric(read_distance_matrix(neg)), MalformedInput);
  std::istringstream ragged("id,a,b\na,0\nb,1,0\n");
  CHECK_THROWS_AS(read_distance_matrix(ragged), MalformedInput);
}

TEST_CASE("distance matrix csv round trip") {
  auto p = path(4);
  std::ostringstream out;
  write_distance_matrix(out, p);
  std::istringstream in(out.str());
  auto q = read_distance_matrix(in);
  REQUIRE(q.size() == 4);
  for (PointId a = 0; a < 4; ++a) {
    CHECK(q.name(a) == p.name(a));
    for (PointId b = 0; b < 4; ++b) CHECK(q.distance(a, b) == p.distance(a, b));
  }
}

TEST_CASE("ball membership") {
  auto p = path(5);
  CHECK(ball_members(p, {2, 0.0, Openness::closed}).to_vector() == std::vector<PointId>{2});
  CHECK(ball_members(p, {1, 2.0, Openness::open}).to_vector() == std::vector<PointId>{0, 1, 2});

  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  // z_S with S = {0, 4}: the closed ball of radius R holds Z and P \ S.
  PointSet S(t.n());
  S.insert(0);
  S.insert(4);
  const PointId z = *t.find_center(S);
  const auto ball = ball_members(t, {z, t.R(), Openness::closed});
  for (PointId y = 0; y < t.size(); ++y) {
    const bool expected = !t.is_grid(y) || !S.contains(y);
    CHECK(ball.contains(y) == expected);
  }
}

TEST_CASE("covering numbers") {
  auto p = path(5);
  PointSet all = PointSet::full(5);
  CHECK(covering_number(p, all, 10.0).count == 1);

  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  const PointId mid = t.grid_point({1, 1});
  const auto target = ball_members(t, {mid, 1.5, Openness::open});
  CHECK(target.count() == 9);
  const auto c = covering_number(t, target, 0.75);
  CHECK(c.count == 9);
  CHECK(c.exactness == Exactness::exact);
}

TEST_CASE("branch and bound equals subset enumeration") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto s = random_metric_space(8, 1.0, 2.0, trial % 2 == 0, rng);
    std::vector<double> ds;
    for (PointId a = 0; a < 8; ++a) {
      for (PointId b = a + 1; b < 8; ++b) ds.push_back(s.distance(a, b));
    }
    std::nth_element(ds.begin(), ds.begin() + ds.size() / 2, ds.end());
    const double r = ds[ds.size() / 2];
    const auto got = covering_number(s, PointSet::full(8), r);
    CHECK(got.count == oracle::min_cover(s, PointSet::full(8).to_vector(), r));
    CHECK(got.exactness == Exactness::exact);
  }
}

TEST_CASE("greedy fallback is flagged") {
  auto p = path(30);
  CoverOptions o;
  o.exact_threshold = 5;
  const auto c = covering_number(p, PointSet::full(30), 1.5);
  CHECK(c.count == 10);
  const auto g = covering_number(p, PointSet::full(30), 1.5, o);
  CHECK(g.count >= 10);
  CHECK(g.exactness != Exactness::estimate);
}

TEST_CASE("gamma cover constant") {
  auto one = path(1);
  const auto a = gamma_cover_constant(one, 2.0);
  CHECK(a.lambda == 1);
  CHECK(a.dim == 0.0);

  auto two = path(2);
  const auto b = gamma_cover_constant(two, 2.0);
  CHECK(b.lambda == 2);
  CHECK(b.dim == doctest::Approx(1.0));

  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    auto s = random_metric_space(7, 1.0, 2.0, i % 2 == 1, rng);
    CHECK(gamma_cover_constant(s, 2.0).lambda == oracle::gamma_cover(s, 2.0));
    CHECK(gamma_cover_constant(s, 3.0).lambda == oracle::gamma_cover(s, 3.0));
  }
  auto p = path(6);
  CHECK(gamma_cover_constant(p, 2.0).lambda == oracle::gamma_cover(p, 2.0));
}

TEST_CASE("gamma cover witness sits on the grid interior") {
  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  const auto g = gamma_cover_constant(t, 2.0);
  CHECK(g.lambda == 9);
  CHECK(g.exactness == Exactness::exact);
  CHECK(g.witness_center == t.grid_point({1, 1}));
}

TEST_CASE("glued space keeps the larger gamma cover constant") {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    auto X = std::make_shared<FiniteMetricSpace>(random_metric_space(5, 1.0, 2.0, false, rng));
    auto Y = std::make_shared<FiniteMetricSpace>(path(4));
    auto Z = glue_pair(X, Y, 2.0);
    const auto lx = gamma_cover_constant(*X, 2.0).lambda;
    const auto ly = gamma_cover_constant(*Y, 2.0).lambda;
    CHECK(gamma_cover_constant(Z, 2.0).lambda == std::max(lx, ly));
  }
}

TEST_CASE("assouad estimate") {
  CHECK(assouad_estimate(path(1)).rho == 0.0);
  const auto a = assouad_estimate(path(64));
  CHECK(a.rho >= 0.8);
  CHECK(a.rho <= 1.2);
  const auto g = assouad_estimate(grid(8));
  CHECK(g.rho >= 1.6);
  CHECK(g.rho <= 2.4);
  CHECK(g.constant == doctest::Approx(std::pow(3.0, g.rho)));
}

TEST_CASE("epsilon nets") {
  auto p = path(5);
  const auto big = build_epsilon_net(p, 100.0, std::uint64_t{9});
  CHECK(big.points.size() == 1);

  const auto net = build_epsilon_net(p, 2.0, std::vector<PointId>{0, 1, 2, 3, 4});
  CHECK(net.points == std::vector<PointId>{0, 2, 4});
  const auto chk = check_epsilon_net(p, net.points, 2.0);
  CHECK(chk.separated);
  CHECK(chk.covering);

  auto g = grid(8);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto n = build_epsilon_net(g, 1.5, seed);
    const auto c = check_epsilon_net(g, n.points, 1.5);
    CHECK(c.separated);
    CHECK(c.covering);
    // No 1.5-separated set is smaller than a cover by open 1.5-balls.
    CHECK(n.points.size() >= covering_number(g, PointSet::full(g.size()), 1.5).count);
  }
}

TEST_CASE("dimension report csv") {
  Theorem2Space t(1, 3, 2.0, SpaceMode::explicit_matrix);
  DimensionReport rep;
  rep.gamma_cover = gamma_cover_constant(t, 2.0);
  rep.assouad = assouad_estimate(t);
  std::ostringstream out;
  write_dimension_report(out, t, rep, "abc");
  const auto text = out.str();
  CHECK(text.find("abc") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);
}
