// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <fstream>
#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "chaselab/constructions.hpp"
#include "chaselab/covering.hpp"
#include "chaselab/dimension.hpp"
#include "chaselab/embeddings.hpp"
#include "chaselab/engine.hpp"
#include "chaselab/experiment.hpp"
#include "chaselab/parallel.hpp"
#include "chaselab/random_instances.hpp"
#include "oracles.hpp"

using namespace chaselab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Recorder {
 public:
  void fail(const std::string& why) {
    if (out_.ok) out_.detail = why;
    out_.ok = false;
  }
  void check(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
  void note(const std::string& s) {
    if (out_.ok) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

// Exact integer value of a double that must hold one.
bool as_integer(double v, __int128& out) {
  if (!(v >= 0.0) || v > 9e15 || std::floor(v) != v) return false;
  out = static_cast<__int128>(v);
  return true;
}

// ---- 1 -------------------------------------------------------------------
Outcome fl_linf() {
  Recorder r;
  for (std::size_t d = 2; d <= 8; ++d) {
    NormedSpace s(d, kInf);
    for (const char* name : {"greedy-nested", "greedy-projection", "steiner"}) {
      FLAdversary adv(s);
      auto sel = make_normed_selector(name, 2000, 1);
      const auto t = run_game(adv, *sel, s, Vector::Zero(static_cast<Eigen::Index>(d)));
      if (!t.ratio) {
        r.fail(std::string(name) + " degenerate at d=" + std::to_string(d));
        continue;
      }
      r.check(*t.ratio >= double(d), std::string(name) + " ratio " + fmt(*t.ratio) + " < d=" +
                                         std::to_string(d));
      if (std::string(name) == "greedy-projection") {
        r.check(*t.ratio == double(d), "greedy-projection ratio " + fmt(*t.ratio) + " != d");
      }
    }
  }
  r.note("21 runs, every ratio >= d, greedy-projection = d");
  return r.result();
}

// ---- 2 -------------------------------------------------------------------
Outcome fl_lp() {
  Recorder r;
  double worst = kInf;
  for (std::size_t d : {4u, 9u, 16u}) {
    for (double p : {1.0, 2.0, 4.0}) {
      NormedSpace s(d, p);
      const double floor = std::pow(double(d), 1.0 - 1.0 / p);
      for (const char* name : {"greedy-nested", "greedy-projection", "steiner"}) {
        FLAdversary adv(s);
        auto sel = make_normed_selector(name, 2000, 1);
        const auto t = run_game(adv, *sel, s, Vector::Zero(static_cast<Eigen::Index>(d)));
        if (!t.ratio) {
          r.fail("degenerate run");
          continue;
        }
        worst = std::min(worst, *t.ratio - floor);
        r.check(*t.ratio >= floor - 1e-9, std::string(name) + " d=" + std::to_string(d) + " p=" +
                                              fmt(p) + " ratio " + fmt(*t.ratio) + " < " + fmt(floor));
      }
    }
  }
  r.note("27 runs, min(ratio - d^(1-1/p)) = " + fmt(worst));
  return r.result();
}

// Test-only player that jumps to the adversary's center at the first request.
class ZJumper final : public FiniteSelector {
 public:
  std::string name() const override { return "z-jumper"; }
  void init(const MetricSpace&, PointId) override {}
  PointId respond(const BallSpec& b, std::span<const BallSpec>) override { return b.center; }
};

// ---- 3 -------------------------------------------------------------------
Outcome theorem2_floor() {
  Recorder r;
  const std::vector<std::pair<std::size_t, std::size_t>> cases{{2, 3}, {2, 4}, {2, 5}, {3, 3}};
  std::size_t runs = 0;
  for (auto [k, D] : cases) {
    for (const char* name : {"greedy-nested", "greedy-projection", "z-jumper"}) {
      Theorem2Space t(k, D, 2.0, SpaceMode::lazy);
      auto adv = theorem2_adversary(t);
      std::unique_ptr<FiniteSelector> sel;
      if (std::string(name) == "z-jumper") {
        sel = std::make_unique<ZJumper>();
      } else {
        sel = make_finite_selector(name);
      }
      const auto tr = run_game(adv, *sel, t, 0);
      ++runs;
      __int128 cost = 0, opt = 0, R = 0;
      if (!as_integer(tr.cost, cost) || !as_integer(tr.opt, opt) || !as_integer(t.R(), R)) {
        r.fail("non-integer cost/opt in k=" + std::to_string(k) + " D=" + std::to_string(D));
        continue;
      }
      r.check(opt > 0, "opt is 0");
      const __int128 spread = static_cast<__int128>(D - 1);
      const bool escaped = tr.termination == TerminationReason::player_escaped;
      __int128 Dk = 1;
      for (std::size_t i = 0; i < k; ++i) Dk *= static_cast<__int128>(D);
      const std::string tag = std::string(name) + " k=" + std::to_string(k) + " D=" + std::to_string(D);
      if (escaped) {
        r.check(std::string(name) == "z-jumper", tag + " left P");
        r.check(cost * spread >= R * opt, tag + " ratio below R/(D-1)");
      } else {
        r.check(std::string(name) != "z-jumper", tag + " did not escape");
        r.check(cost * spread >= (Dk - 1) * opt, tag + " ratio below (D^k-1)/(D-1)");
        // (D^k - 1)/(D - 1) > D^(k-1)
        r.check((Dk - 1) > (Dk / static_cast<__int128>(D)) * spread, tag + " floor not above D^(k-1)");
      }
    }
  }
  r.note(std::to_string(runs) + " runs checked in integer arithmetic");
  return r.result();
}

// ---- 4 -------------------------------------------------------------------
Outcome theorem4() {
  Recorder r;
  Rng rng(2024);
  std::size_t moved_total = 0;
  std::size_t instances = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    auto s = random_metric_space(n, 1.0, 2.0, false, rng);
    const auto balls = random_nested_balls(s, T, rng);
    const PointId x0 = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    // Odd instances use an adversary that always evicts the current point.
    std::unique_ptr<FiniteAdversary> adv;
    if (i % 2 == 0) {
      adv = std::make_unique<ScriptedFiniteAdversary>(balls);
    } else {
      adv = std::make_unique<EvictingNestedAdversary>(s, T, rng());
    }
    auto sel = greedy_nested_finite();
    const auto t = run_game(*adv, *sel, s, x0);
    ++instances;
    moved_total += t.moved_steps;
    const double Tp = double(t.moved_steps);
    if (t.moved_steps == 0) {
      r.check(t.cost == 0.0, "instance " + std::to_string(i) + ": no moves but cost > 0");
    } else {
      r.check(t.cost <= (2.0 * Tp - 1.0) * t.opt,
              "instance " + std::to_string(i) + ": cost " + fmt(t.cost) + " > (2T'-1) opt");
    }
    const auto ball = ball_members(s, {x0, t.opt, Openness::open});
    r.check(t.moved_steps <= ball.count(), "instance " + std::to_string(i) + ": T' exceeds |B(x0, d*)|");
  }
  r.note(std::to_string(instances) + " instances, " + std::to_string(moved_total) +
         " moving steps, zero violations");
  return r.result();
}

// ---- 5 -------------------------------------------------------------------
Outcome offline_solvers() {
  Recorder r;
  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    auto s = random_metric_space(n, 1.0, 2.0, true, rng);
    const auto req = random_balls(s, T, 6, rng);
    const PointId x0 = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double dp = offline_opt_finite_dp(s, req, x0).value;
    const double brute = oracle::product_opt(s, req, x0);
    r.check(dp == brute, "product instance " + std::to_string(i) + ": dp " + fmt(dp) + " != " + fmt(brute));
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    auto s = random_metric_space(n, 1.0, 2.0, i % 2 == 0, rng);
    const auto req = random_nested_balls(s, T, rng);
    const PointId x0 = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double dp = offline_opt_finite_dp(s, req, x0).value;
    const double nested = offline_opt_nested(s, req, x0).value;
    r.check(dp == nested, "nested instance " + std::to_string(i) + ": dp != closed form");
  }
  r.note("400 instances, exact equality");
  return r.result();
}

// ---- 6 -------------------------------------------------------------------
Outcome covering_exactness() {
  Recorder r;
  Theorem2Space t(2, 3, 2.0, SpaceMode::explicit_matrix);
  const auto target = ball_members(t, {t.grid_point({1, 1}), 1.5, Openness::open});
  const auto c = covering_number(t, target, 0.75);
  r.check(c.count == 9 && c.exactness == Exactness::exact, "N_0.75 = " + std::to_string(c.count));
  Rng rng(66);
  int trials = 0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 14)(rng);
    auto s = (i % 3 == 0) ? random_graph_metric(n, 0.3, 6, rng)
                          : random_metric_space(n, 1.0, 2.0, i % 3 == 1, rng);
    std::vector<PointId> ids(n);
    for (std::size_t j = 0; j < n; ++j) ids[j] = j;
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(10, n))(rng);
    ids.resize(m);
    PointSet tgt(n);
    for (auto id : ids) tgt.insert(id);
    const PointId a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const PointId b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double radius = std::max(0.5, s.distance(a, b));
    const auto got = covering_number(s, tgt, radius);
    const auto want = oracle::min_cover(s, tgt.to_vector(), radius);
    r.check(got.exactness == Exactness::exact, "small target not solved exactly");
    r.check(got.count == want, "trial " + std::to_string(i) + ": " + std::to_string(got.count) +
                                   " != " + std::to_string(want));
    ++trials;
  }
  r.note("N = 9 on the grid ball; " + std::to_string(trials) + " random targets match enumeration");
  return r.result();
}

// ---- 7 -------------------------------------------------------------------
Outcome union_lemma() {
  Recorder r;
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const std::size_t nx = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    const std::size_t ny = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    auto X = std::make_shared<FiniteMetricSpace>(
        i % 2 ? random_graph_metric(nx, 0.3, 5, rng) : random_metric_space(nx, 1.0, 2.0, false, rng));
    auto Y = std::make_shared<FiniteMetricSpace>(random_metric_space(ny, 1.0, 2.0, i % 3 == 0, rng));
    auto Z = glue_pair(X, Y, 2.0);
    const auto lz = gamma_cover_constant(Z, 2.0).lambda;
    const auto lx = gamma_cover_constant(*X, 2.0).lambda;
    const auto ly = gamma_cover_constant(*Y, 2.0).lambda;
    r.check(lz == std::max(lx, ly), "pair " + std::to_string(i) + ": " + std::to_string(lz) +
                                        " != max(" + std::to_string(lx) + ", " + std::to_string(ly) + ")");
  }
  r.note("50 glued pairs, lambda(Z) = max(lambda(X), lambda(Y))");
  return r.result();
}

// ---- 8 -------------------------------------------------------------------
Outcome grid_sandwich() {
  Recorder r;
  const std::size_t side = 16;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < side * side; ++i) ids.push_back(std::to_string(i));
  auto g = FiniteMetricSpace::lazy(ids, [](PointId a, PointId b) {
    const double dx = std::abs(double(a / side) - double(b / side));
    const double dy = std::abs(double(a % side) - double(b % side));
    return std::max(dx, dy);
  });
  const auto res = gamma_cover_constant(FiniteMetricSpace::materialize(g), 2.0);
  const double upper = 2.0 * std::log2(5.0);
  r.check(res.dim >= 1.5, "dim " + fmt(res.dim) + " < 1.5");
  r.check(res.dim <= upper, "dim " + fmt(res.dim) + " > 2 log2 5");
  r.note("lambda = " + std::to_string(res.lambda) + " (" + std::string(to_string(res.exactness)) +
         "), dim = " + fmt(res.dim));
  return r.result();
}

// ---- 9 -------------------------------------------------------------------
Outcome transfer() {
  Recorder r;
  constexpr double tol = 1e-9;
  std::size_t runs = 0;
  double worst_scaling_gap = 0.0;
  for (int kind = 0; kind < 2; ++kind) {
    Rng rng(99 + kind);
    for (int i = 0; i < 100; ++i) {
      const std::size_t d = 2 + i % 4;
      const Embedding f = kind == 0 ? make_scaling(d, i % 2 ? 2.0 : kInf, 0.1 + 0.37 * (i % 11))
                                    : make_lp_identity(d, 1.0 + i % 3, kInf);
      const char* name = (i % 3 == 0) ? "steiner" : (i % 3 == 1 ? "greedy-projection" : "greedy-nested");
      auto sel = transfer_selector(f, make_normed_selector(name, 400, i));
      const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
      ScriptedNormedAdversary adv(random_nested_boxes(d, T, rng));
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      Vector x0(static_cast<Eigen::Index>(d));
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] = u(rng);
      const auto X = run_game(adv, *sel, f.domain(), x0);
      const auto Y = sel->image_transcript(X.termination);
      ++runs;
      const std::string tag = std::string(kind == 0 ? "scaling" : "lp-identity") + " #" + std::to_string(i);
      r.check(X.cost <= f.lip_finv() * Y.cost + tol * std::max(1.0, X.cost), tag + ": cost inequality");
      if (X.ratio && Y.ratio) {
        r.check(*X.ratio <= f.distortion() * *Y.ratio + tol * std::max(1.0, *X.ratio),
                tag + ": ratio inequality");
        if (kind == 0) {
          const double gap = std::abs(*X.ratio - *Y.ratio) / std::max(1.0, *X.ratio);
          worst_scaling_gap = std::max(worst_scaling_gap, gap);
          r.check(gap <= 1e-12, tag + ": scaling ratios differ by " + fmt(gap));
        }
      } else {
        r.check(X.ratio.has_value() == Y.ratio.has_value(), tag + ": degenerate on one side only");
      }
    }
  }
  r.note(std::to_string(runs) + " runs; worst scaling ratio gap " + fmt(worst_scaling_gap));
  return r.result();
}

// ---- 10 ------------------------------------------------------------------
Outcome bound_calculator() {
  Recorder r;
  for (double d : {2.0, 64.0, 1e6}) {
    const double got = bound_transfer(d, 2.0 * std::pow(d, 5.0 / 6.0)).value;
    const double want = 0.5 * std::pow(d, 1.0 / 6.0);
    r.check(std::abs(got - want) <= 1e-12, "d=" + fmt(d) + ": " + fmt(got) + " vs " + fmt(want));
  }
  r.note("d in {2, 64, 1e6} within 1e-12");
  return r.result();
}

// ---- 11 ------------------------------------------------------------------
Outcome steiner() {
  Recorder r;
  std::vector<Vector> tri(3, Vector::Zero(2));
  tri[1][0] = 1.0;
  tri[2][1] = 1.0;
  const Vector truth = oracle::polygon_steiner(tri);
  const auto est = steiner_point_mc(make_polytope(tri), 100000, 12345);
  const double err = (est.point - truth).cwiseAbs().maxCoeff();
  r.check(err <= 0.02, "triangle error " + fmt(err));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Vector lo(3), hi(3);
    lo << -1.0 - double(seed), 0.5, -3.25;
    hi << 1.0 + double(seed), 1.5, 4.75;
    const auto e = steiner_point_mc(make_box(lo, hi), 1 + seed * 7, seed);
    r.check(e.point == (lo + hi) / 2.0, "box center not exact for seed " + std::to_string(seed));
  }
  r.note("triangle error " + fmt(err) + " vs oracle (" + fmt(truth[0]) + ", " + fmt(truth[1]) +
         "); 100 boxes exact");
  return r.result();
}

// ---- 12 ------------------------------------------------------------------
std::map<std::string, std::string> run_all(const fs::path& root, std::size_t threads) {
  set_thread_count(threads);
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(fs::path(CHASELAB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    const auto cfg = load_config(entry.path());
    const fs::path out = root / entry.path().stem();
    for (const auto& p : run_experiment(cfg, out).files) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      files[entry.path().stem().string() + "/" + p.filename().string()] = s.str();
    }
  }
  set_thread_count(1);
  return files;
}

Outcome determinism() {
  Recorder r;
  const fs::path base = fs::temp_directory_path() / "chaselab_acceptance";
  fs::remove_all(base);
  const auto a = run_all(base / "a", 1);
  const auto b = run_all(base / "b", 2);
  std::set<std::string> kinds;
  for (const auto& entry : fs::directory_iterator(fs::path(CHASELAB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() == ".json") {
      kinds.insert(load_config(entry.path()).json.at("experiment").get<std::string>());
    }
  }
  r.check(kinds.size() == 8, "configs cover only " + std::to_string(kinds.size()) + " experiment kinds");
  r.check(a.size() == b.size(), "different file sets");
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    r.check(it != b.end() && it->second == bytes, name + " differs between runs");
  }
  fs::remove_all(base);
  r.note(std::to_string(a.size()) + " files from " + std::to_string(kinds.size()) +
         " experiment kinds byte-identical (1 vs 2 threads)");
  return r.result();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0: no limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "FL lower bound d in l_inf", 1.0, fl_linf},
      {2, "FL lower bound d^(1-1/p) in l_p", 5.0, fl_lp},
      {3, "Theorem 2 adversary floor", 10.0, theorem2_floor},
      {4, "greedy-nested 2T'-1 guarantee", 10.0, theorem4},
      {5, "offline solver oracle equivalence", 10.0, offline_solvers},
      {6, "covering exactness", 30.0, covering_exactness},
      {7, "union lemma equality", 30.0, union_lemma},
      {8, "grid gamma-cover sandwich", 60.0, grid_sandwich},
      {9, "transfer inequalities", 10.0, transfer},
      {10, "bound calculator", 0.0, bound_calculator},
      {11, "Steiner point Monte Carlo", 5.0, steiner},
      {12, "determinism across runs", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.ok = false;
      o.detail = "took " + fmt(secs) + " s, limit " + fmt(c.budget_s) + " s; " + o.detail;
    }
    if (!o.ok) ++failures;
    std::cout << "criterion " << c.id << ": " << (o.ok ? "PASS" : "FAIL") << " - " << c.title
              << " [" << fmt(std::round(secs * 1000.0) / 1000.0) << " s] " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
