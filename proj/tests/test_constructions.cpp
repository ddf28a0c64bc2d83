#include <set>

#include "chaselab/constructions.hpp"
#include "chaselab/dimension.hpp"
#include "chaselab/engine.hpp"
#include "chaselab/errors.hpp"
#include "doctest.h"

using namespace chaselab;

TEST_CASE("smallest theorem 2 space") {
  Theorem2Space t(1, 2, 2.0, SpaceMode::explicit_matrix);
  CHECK(t.n() == 2);
  CHECK(t.R() == 16.0);
  CHECK(t.size() == 4);
  CHECK(t.materialized_centers() == 2);
  CHECK(validate_metric(t).ok());
}

TEST_CASE("theorem 2 space structure") {
  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  CHECK(t.n() == 9);
  CHECK(t.name(t.grid_point({1, 1})) == "p(1 1)");
  const PointId mid = t.grid_point({1, 1});
  CHECK(ball_members(t, {mid, 1.5, Openness::open}).count() == 9);
  for (PointId z = t.n(); z < t.size(); ++z) {
    const auto& S = t.subset_of(z);
    for (PointId p = 0; p < t.n(); ++p) {
      const double gap = t.distance(z, p) - t.R();
      CHECK(gap == (S.contains(p) ? 1.0 : 0.0));
    }
  }
  CHECK_THROWS_AS(Theorem2Space(2, 1, 2.0, SpaceMode::lazy), InvalidArgument);
  CHECK_THROWS_AS(Theorem2Space(2, 3, 1.0, SpaceMode::lazy), InvalidArgument);
  CHECK_THROWS_AS(Theorem2Space(2, 5, 2.0, SpaceMode::explicit_matrix), ChaseError);
}

TEST_CASE("theorem 2 adversary evicts the current point") {
  for (auto make : {greedy_nested_finite, greedy_projection_finite}) {
    Theorem2Space t(1, 3, 2.0, SpaceMode::lazy);
    auto adv = theorem2_adversary(t);
    auto sel = make();
    const auto tr = run_game(adv, *sel, t, 0);
    CHECK(tr.requests.size() == 2);
    CHECK(tr.termination == TerminationReason::adversary_stopped);
    PointId prev = tr.start;
    std::set<PointId> seen{prev};
    for (std::size_t i = 0; i < tr.requests.size(); ++i) {
      CHECK_FALSE(ball_contains(t, tr.requests[i], prev));
      prev = tr.trajectory[i];
      seen.insert(prev);
      CHECK(t.is_grid(prev));
    }
    CHECK(seen.size() == 3);
    CHECK(tr.cost >= 2.0);
    CHECK(tr.opt <= 2.0);
  }
}

TEST_CASE("theorem 2 opt never exceeds D - 1") {
  for (std::size_t D : {3u, 4u}) {
    Theorem2Space t(2, D, 2.0, SpaceMode::lazy);
    auto adv = theorem2_adversary(t);
    auto sel = greedy_projection_finite();
    const auto tr = run_game(adv, *sel, t, t.grid_point({1, 1}));
    CHECK(tr.requests.size() == t.n() - 1);
    CHECK(tr.opt <= double(D - 1));
  }
}

TEST_CASE("FL adversary") {
  NormedSpace s(3, kInf);
  FLAdversary adv(s);
  auto sel = greedy_projection_normed();
  const auto t = run_game(adv, *sel, s, Vector::Zero(3));
  CHECK(t.requests.size() == 3);
  CHECK(t.cost == 3.0);
  CHECK(t.opt == 1.0);
  CHECK(is_nested(t.requests));
  Vector prev = Vector::Zero(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double chosen = adv.signs()[i];
    CHECK(std::abs(prev[static_cast<Eigen::Index>(i)] - chosen) >= 1.0);
    CHECK((t.trajectory[i] - prev).cwiseAbs().maxCoeff() == 1.0);
    prev = t.trajectory[i];
  }
  FLAdversary again(s);
  Vector off = Vector::Zero(3);
  off[0] = 0.5;
  std::vector<Vector> pos{off};
  CHECK_THROWS(again.next(pos));
}

TEST_CASE("phase I levels") {
  const auto levels = default_phase1_levels(1);
  auto single = build_phase1_space(2.0, levels, SpaceMode::explicit_matrix);
  Theorem2Space ref(levels[0].k, levels[0].D, 2.0, SpaceMode::explicit_matrix);
  REQUIRE(single.space.size() == ref.size());
  for (PointId a = 0; a < ref.size(); ++a) {
    for (PointId b = 0; b < ref.size(); ++b) CHECK(single.space.distance(a, b) == ref.distance(a, b));
  }

  auto two = build_phase1_space(2.0, default_phase1_levels(2), SpaceMode::explicit_matrix);
  const auto a = two.space.part_ids(0);
  const auto b = two.space.part_ids(1);
  for (PointId x : a) {
    for (PointId y : b) CHECK(two.space.distance(x, y) == two.level_radius[1]);
  }
  CHECK(validate_metric(two.space).ok());
}

TEST_CASE("phase I glue keeps the larger gamma cover constant") {
  auto s = build_phase1_space(2.0, {{1, 2}, {1, 3}}, SpaceMode::explicit_matrix);
  const auto whole = gamma_cover_constant(s.space, 2.0).lambda;
  const auto x1 = gamma_cover_constant(*s.parts[0], 2.0).lambda;
  const auto x2 = gamma_cover_constant(*s.parts[1], 2.0).lambda;
  CHECK(whole == std::max(x1, x2));
}

TEST_CASE("level adversary inside the glued space") {
  auto s = build_phase1_space(2.0, default_phase1_levels(3));
  auto adv = level_adversary(s, 3);
  auto sel = greedy_nested_finite();
  const PointId x0 = s.space.global_id(2, 0);
  const auto t = run_game(adv, *sel, s.space, x0);
  const auto& part = *s.parts[2];
  CHECK(t.requests.size() == part.n() - 1);
  REQUIRE(t.ratio);
  CHECK(*t.ratio >= double(part.n() - 1) / double(part.side() - 1));
  CHECK(validate_metric(s.space).ok());
}

TEST_CASE("phase II lattice") {
  const auto pts = lattice_in_ball(1, 2.0, 0.25, 0.5);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0][0] == -0.25);
  CHECK(pts[1][0] == 0.0);
  CHECK(pts[2][0] == 0.25);

  auto p1 = build_phase1_space(2.0, default_phase1_levels(2), SpaceMode::explicit_matrix);
  auto p2 = build_phase2_space(p1, 1, 2.0, 0.25, 0.5);
  CHECK(validate_metric(p2).ok());
  const std::size_t L = p2.part_count();
  const auto lat = p2.part_ids(L);
  REQUIRE(lat.size() == 3);
  for (PointId x : p2.part_ids(1)) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(p2.distance(x, lat[i]) == p1.level_radius[1] + std::abs(pts[i][0]));
    }
  }
  CHECK_THROWS(build_phase2_space(p1, 1, 2.0, 0.25, 1e9));
}

TEST_CASE("phase II lattice is two dimensional") {
  const auto pts = lattice_in_ball(2, 2.0, 0.25, 1.0);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < pts.size(); ++i) ids.push_back(std::to_string(i));
  auto s = FiniteMetricSpace::lazy(ids, [&](PointId a, PointId b) { return (pts[a] - pts[b]).norm(); });
  const auto est = assouad_estimate(s);
  CHECK(est.rho >= 1.5);
  CHECK(est.rho <= 2.5);
}

TEST_CASE("glue pair bridge") {
  std::vector<double> m{0, 1, 1, 0};
  auto X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::from_matrix({"a", "b"}, m));
  auto Y = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::from_matrix({"c", "d"}, m));
  auto Z = glue_pair(X, Y, 2.0);
  CHECK(Z.size() == 4);
  CHECK(Z.distance(0, 2) == 4.0);
  CHECK(Z.distance(2, 3) == 1.0);
  CHECK(validate_metric(Z).ok());
}
