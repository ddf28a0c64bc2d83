#include <sstream>

#include "chaselab/constructions.hpp"
#include "chaselab/engine.hpp"
#include "chaselab/errors.hpp"
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

// Answers the center of every request, legal or not.
class CenterSelector final : public FiniteSelector {
 public:
  std::string name() const override { return "center"; }
  void init(const MetricSpace&, PointId) override {}
  PointId respond(const BallSpec& b, std::span<const BallSpec>) override { return b.center; }
};

class OutsideSelector final : public FiniteSelector {
 public:
  std::string name() const override { return "outside"; }
  void init(const MetricSpace&, PointId) override {}
  PointId respond(const BallSpec&, std::span<const BallSpec>) override { return 0; }
};

}  // namespace

TEST_CASE("hand-traced path game") {
  auto p = path(5);
  std::vector<BallSpec> req{{3, 2.0, Openness::closed}, {3, 1.0, Openness::closed}, {4, 1.0, Openness::closed}};
  ScriptedFiniteAdversary adv(req);
  auto sel = greedy_nested_finite();
  const auto t = run_game(adv, *sel, p, 0);
  CHECK(t.trajectory == std::vector<PointId>{1, 2, 3});
  CHECK(t.cost == 3.0);
  CHECK(t.opt == 3.0);
  REQUIRE(t.ratio);
  CHECK(*t.ratio == 1.0);
  CHECK(t.moved_steps == 3);
  CHECK(t.opt_solver == "nested");
}

TEST_CASE("staying inside costs nothing") {
  auto p = path(5);
  std::vector<BallSpec> req{{2, 2.0, Openness::closed}, {1, 1.0, Openness::closed}};
  for (auto make : {greedy_nested_finite, greedy_projection_finite}) {
    ScriptedFiniteAdversary adv(req);
    auto sel = make();
    const auto t = run_game(adv, *sel, p, 1);
    CHECK(t.cost == 0.0);
    CHECK(t.opt == 0.0);
    CHECK(t.degenerate());
  }
  CHECK(offline_opt_finite_dp(p, req, 1).value == 0.0);
}

TEST_CASE("illegal answers are contract violations") {
  auto p = path(5);
  std::vector<BallSpec> req{{4, 0.5, Openness::closed}};
  ScriptedFiniteAdversary adv(req);
  OutsideSelector sel;
  CHECK_THROWS_AS(run_game(adv, sel, p, 2), ContractViolation);
}

TEST_CASE("request budget stops the game") {
  auto p = path(5);
  std::vector<BallSpec> req(10, BallSpec{2, 1.0, Openness::closed});
  ScriptedFiniteAdversary adv(req);
  auto sel = greedy_nested_finite();
  const auto t = run_game(adv, *sel, p, 0, 3);
  CHECK(t.requests.size() == 3);
  CHECK(t.termination == TerminationReason::request_budget);
}

TEST_CASE("offline optimum") {
  auto p = path(5);
  std::vector<BallSpec> one{{4, 1.0, Openness::closed}};
  CHECK(offline_opt_nested(p, one, 0).value == 3.0);
  CHECK(offline_opt_finite_dp(p, one, 0).value == 3.0);
  std::vector<BallSpec> crossing{{4, 0.0, Openness::closed}, {0, 0.0, Openness::closed}};
  CHECK_FALSE(is_nested(p, crossing));
  CHECK_THROWS_AS(offline_opt_nested(p, crossing, 0), InvalidArgument);
  CHECK(offline_opt_finite_dp(p, crossing, 2).value == 6.0);
  CHECK_THROWS_AS(offline_opt_finite_dp(p, one, 0, 1), CapacityExceeded);
}

TEST_CASE("DP matches product enumeration") {
  Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    auto s = random_metric_space(6, 1.0, 2.0, i % 2 == 0, rng);
    const auto req = random_balls(s, 4, 6, rng);
    const PointId x0 = static_cast<PointId>(i % 6);
    CHECK(offline_opt_finite_dp(s, req, x0).value == oracle::product_opt(s, req, x0));
  }
}

TEST_CASE("DP matches the nested closed form") {
  Rng rng(22);
  for (int i = 0; i < 60; ++i) {
    auto s = random_metric_space(12, 1.0, 2.0, false, rng);
    const auto req = random_nested_balls(s, 5, rng);
    REQUIRE(is_nested(s, req));
    const PointId x0 = static_cast<PointId>(i % 12);
    CHECK(offline_opt_finite_dp(s, req, x0).value == offline_opt_nested(s, req, x0).value);
  }
}

TEST_CASE("greedy nested bound with ties uses the closed ball") {
  // Integer weights make ties common. The eviction count is bounded by the
  // closed ball around the start of radius opt.
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + i % 20;
    auto s = random_metric_space(n, 1.0, 2.0, true, rng);
    const auto req = random_nested_balls(s, 1 + i % 8, rng);
    const PointId x0 = static_cast<PointId>(i % n);
    ScriptedFiniteAdversary adv(req);
    auto sel = greedy_nested_finite();
    const auto t = run_game(adv, *sel, s, x0);
    if (t.moved_steps == 0) {
      CHECK(t.cost == 0.0);
    } else {
      CHECK(t.cost <= (2.0 * double(t.moved_steps) - 1.0) * t.opt);
    }
    CHECK(t.moved_steps <= ball_members(s, {x0, t.opt, Openness::closed}).count());
  }
}

TEST_CASE("theorem 2 game with the greedy player") {
  Theorem2Space t(2, 3, 2.0, SpaceMode::lazy);
  auto adv = theorem2_adversary(t);
  auto sel = greedy_nested_finite();
  const auto tr = run_game(adv, *sel, t, 0);
  CHECK(tr.requests.size() == 8);
  CHECK(tr.cost >= 8.0);
  CHECK(tr.opt <= 2.0);
  REQUIRE(tr.ratio);
  CHECK(*tr.ratio >= 4.0);
}

TEST_CASE("theorem 2 player that jumps to Z") {
  Theorem2Space t(2, 3, 2.0, SpaceMode::lazy);
  auto adv = theorem2_adversary(t);
  CenterSelector sel;
  const auto tr = run_game(adv, sel, t, 0);
  CHECK(tr.termination == TerminationReason::player_escaped);
  CHECK(tr.requests.size() == 1);
  REQUIRE(tr.ratio);
  CHECK(*tr.ratio >= t.R() / 2.0);
}

TEST_CASE("FL game in l_inf") {
  NormedSpace s(5, kInf);
  FLAdversary adv(s);
  auto sel = greedy_projection_normed();
  const auto t = run_game(adv, *sel, s, Vector::Zero(5));
  CHECK(t.cost == 5.0);
  CHECK(t.opt == 1.0);
  REQUIRE(t.ratio);
  CHECK(*t.ratio == 5.0);
  for (double c : t.step_costs) CHECK(c == 1.0);
}

TEST_CASE("FL game in l_2 and the Steiner selector") {
  NormedSpace s(4, 2.0);
  FLAdversary adv(s);
  auto sel = steiner_selector(500, 3);
  const auto t = run_game(adv, *sel, s, Vector::Zero(4));
  CHECK(t.opt == doctest::Approx(2.0));
  CHECK(t.cost >= 2.0);
  // A face of the cube is symmetric, so each answer is its center.
  for (std::size_t i = 0; i < t.trajectory.size(); ++i) {
    CHECK(contains(t.requests[i], t.trajectory[i]));
    CHECK(t.trajectory[i].cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK(t.trajectory.back().cwiseAbs() == Vector::Ones(4));
}

TEST_CASE("normed greedy stays put inside the request") {
  NormedSpace s(2, 2.0);
  std::vector<ConvexBody> req{make_box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0))};
  ScriptedNormedAdversary adv(req);
  auto sel = greedy_nested_normed();
  const auto t = run_game(adv, *sel, s, Vector::Constant(2, 0.5));
  CHECK(t.cost == 0.0);
  CHECK(t.degenerate());
}

TEST_CASE("competitive report") {
  std::vector<InstanceSummary> rows{{"a", 6.0, 2.0, 3.0, 2.0, std::nullopt}};
  const auto r = competitive_report(rows);
  CHECK(r.max_ratio == 3.0);
  CHECK(r.argmax == 0);
  CHECK(r.floor_violations == 0);
  std::vector<InstanceSummary> none{{"z", 0.0, 0.0, std::nullopt, std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(competitive_report(none), InvalidArgument);
}

TEST_CASE("transcript and summary csv") {
  auto p = path(5);
  std::vector<BallSpec> req{{3, 2.0, Openness::closed}, {4, 1.0, Openness::open}};
  ScriptedFiniteAdversary adv(req);
  auto sel = greedy_nested_finite();
  const auto t = run_game(adv, *sel, p, 0);
  std::ostringstream out;
  write_transcript(out, p, t, "walk", "h1");
  const auto text = out.str();
  CHECK(text.rfind("instance,step,request_id,request,x,step_cost,config_hash\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.find("B(p5;1)") != std::string::npos);

  std::ostringstream sum;
  std::vector<InstanceSummary> rows{summarize("walk", t, 1.0, std::nullopt)};
  write_summary(sum, rows, "h1");
  CHECK(sum.str().find("walk,") != std::string::npos);
}

TEST_CASE("evicting adversary moves the player every step") {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    auto s = random_metric_space(12, 1.0, 2.0, false, rng);
    EvictingNestedAdversary adv(s, 6, rng());
    auto sel = greedy_nested_finite();
    const auto t = run_game(adv, *sel, s, 0);
    CHECK(is_nested(s, t.requests));
    CHECK(t.moved_steps == t.requests.size());
    if (t.moved_steps > 0) CHECK(t.cost <= (2.0 * double(t.moved_steps) - 1.0) * t.opt);
    CHECK(t.moved_steps <= ball_members(s, {t.start, t.opt, Openness::open}).count());
  }
}
