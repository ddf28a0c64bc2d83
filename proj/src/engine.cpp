#include "chaselab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "chaselab/csv.hpp"
#include "chaselab/errors.hpp"

namespace chaselab {

std::string_view to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::adversary_stopped:
      return "adversary-stopped";
    case TerminationReason::request_budget:
      return "request-budget";
    case TerminationReason::player_escaped:
      return "player-escaped";
  }
  return "unknown";
}

namespace {

double membership_tol(const Vector& x) {
  return 1e-9 * std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
}

// Exact (or near exact for polytopes) membership, used to decide whether a
// selector may stay put.
bool inside(const ConvexBody& body, const Vector& x) {
  if (std::holds_alternative<VPolytope>(body)) return contains(body, x, 1e-12);
  return contains(body, x, 0.0);
}

void finish_finite(FiniteTranscript& t, const MetricSpace& arena) {
  t.cost = 0.0;
  for (double c : t.step_costs) t.cost += c;
  if (t.requests.empty()) {
    t.opt = 0.0;
    t.opt_witness.clear();
    t.opt_solver = "none";
  } else if (is_nested(arena, t.requests)) {
    auto o = offline_opt_nested(arena, t.requests, t.start);
    t.opt = o.value;
    t.opt_witness = std::move(o.witness);
    t.opt_solver = "nested";
  } else {
    auto o = offline_opt_finite_dp(arena, t.requests, t.start);
    t.opt = o.value;
    t.opt_witness = std::move(o.witness);
    t.opt_solver = "dp";
  }
  t.ratio.reset();
  if (t.opt > 0.0) t.ratio = t.cost / t.opt;
}

void finish_normed(NormedTranscript& t, const NormedSpace& arena, bool known_nested = false) {
  t.cost = 0.0;
  for (double c : t.step_costs) t.cost += c;
  t.ratio.reset();
  if (t.requests.empty()) {
    t.opt = 0.0;
    t.opt_solver = "none";
    return;
  }
  if (!known_nested && !is_nested(t.requests)) {
    throw Unsupported("normed offline optimum needs nested requests");
  }
  Vector w = project(arena, t.start, t.requests.back());
  t.opt = arena.distance(t.start, w);
  t.opt_witness = {std::move(w)};
  t.opt_solver = "nested";
  if (t.opt > 0.0) t.ratio = t.cost / t.opt;
}

}  // namespace

FiniteTranscript run_game(FiniteAdversary& adversary, FiniteSelector& selector,
                          const MetricSpace& arena, PointId x0, std::size_t request_budget) {
  if (request_budget == 0) throw InvalidArgument("request budget must be >= 1");
  if (x0 >= arena.size()) throw InvalidArgument("start point is not in the arena");
  FiniteTranscript t;
  t.arena = "finite-metric";
  t.selector = selector.name();
  t.start = x0;
  selector.init(arena, x0);
  std::vector<PointId> positions{x0};
  for (;;) {
    auto request = adversary.next(positions);
    if (!request) {
      t.termination = adversary.stop_reason();
      break;
    }
    if (t.requests.size() == request_budget) {
      t.termination = TerminationReason::request_budget;
      break;
    }
    t.requests.push_back(*request);
    const PointId prev = positions.back();
    if (!ball_contains(arena, *request, prev)) ++t.moved_steps;
    const PointId x = selector.respond(*request, t.requests);
    if (x >= arena.size() || !ball_contains(arena, *request, x)) {
      throw ContractViolation("step " + std::to_string(t.requests.size()) + ": selector '" +
                              selector.name() + "' answered a point outside " +
                              format_request(arena, *request));
    }
    t.step_costs.push_back(arena.distance(prev, x));
    t.trajectory.push_back(x);
    positions.push_back(x);
  }
  finish_finite(t, arena);
  return t;
}

NormedTranscript run_game(NormedAdversary& adversary, NormedSelector& selector,
                          const NormedSpace& arena, const Vector& x0, std::size_t request_budget) {
  if (request_budget == 0) throw InvalidArgument("request budget must be >= 1");
  if (static_cast<std::size_t>(x0.size()) != arena.dim) {
    throw InvalidArgument("start point has the wrong dimension");
  }
  NormedTranscript t;
  t.arena = "normed";
  t.selector = selector.name();
  t.start = x0;
  selector.init(arena, x0);
  std::vector<Vector> positions{x0};
  for (;;) {
    auto request = adversary.next(positions);
    if (!request) {
      t.termination = adversary.stop_reason();
      break;
    }
    if (t.requests.size() == request_budget) {
      t.termination = TerminationReason::request_budget;
      break;
    }
    if (body_dim(*request) != arena.dim) throw InvalidArgument("request has the wrong dimension");
    t.requests.push_back(*request);
    const Vector& prev = positions.back();
    if (!inside(*request, prev)) ++t.moved_steps;
    Vector x = selector.respond(*request, t.requests);
    if (static_cast<std::size_t>(x.size()) != arena.dim ||
        !contains(*request, x, membership_tol(x))) {
      throw ContractViolation("step " + std::to_string(t.requests.size()) + ": selector '" +
                              selector.name() + "' answered " + format_vector(x) +
                              " outside " + format_body(*request));
    }
    t.step_costs.push_back(arena.distance(prev, x));
    t.trajectory.push_back(x);
    positions.push_back(std::move(x));
  }
  finish_normed(t, arena);
  return t;
}

NormedTranscript score_game(const NormedSpace& arena, const Vector& x0,
                            std::vector<ConvexBody> requests, std::vector<Vector> trajectory,
                            TerminationReason termination, std::string selector,
                            bool known_nested) {
  if (requests.size() != trajectory.size()) {
    throw InvalidArgument("one trajectory point per request is required");
  }
  NormedTranscript t;
  t.arena = "normed";
  t.selector = std::move(selector);
  t.start = x0;
  t.termination = termination;
  const Vector* prev = &t.start;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!inside(requests[i], *prev)) ++t.moved_steps;
    t.step_costs.push_back(arena.distance(*prev, trajectory[i]));
    prev = &trajectory[i];
  }
  t.requests = std::move(requests);
  t.trajectory = std::move(trajectory);
  finish_normed(t, arena, known_nested);
  return t;
}

bool is_nested(const MetricSpace& space, std::span<const BallSpec> requests) {
  if (requests.empty()) return true;
  PointSet prev = ball_members(space, requests[0]);
  for (std::size_t i = 1; i < requests.size(); ++i) {
    PointSet cur = ball_members(space, requests[i]);
    if (!cur.is_subset_of(prev)) return false;
    prev = std::move(cur);
  }
  return true;
}

FiniteOpt offline_opt_nested(const MetricSpace& space, std::span<const BallSpec> requests,
                             PointId x0) {
  if (requests.empty()) return {0.0, {}};
  if (!is_nested(space, requests)) {
    throw InvalidArgument("requests are not nested; use offline_opt_finite_dp");
  }
  const PointSet last = ball_members(space, requests.back());
  if (last.empty()) throw InvalidArgument("last request is empty");
  FiniteOpt out;
  out.value = kInf;
  PointId best = 0;
  last.for_each([&](PointId y) {
    const double v = space.distance(x0, y);
    if (v < out.value) {
      out.value = v;
      best = y;
    }
  });
  out.witness = {best};
  return out;
}

FiniteOpt offline_opt_finite_dp(const MetricSpace& space, std::span<const BallSpec> requests,
                                PointId x0, std::size_t member_cap) {
  if (requests.empty()) return {0.0, {}};
  std::vector<std::vector<PointId>> stage(requests.size());
  std::vector<std::vector<double>> value(requests.size());
  std::vector<std::vector<std::size_t>> back(requests.size());
  for (std::size_t t = 0; t < requests.size(); ++t) {
    stage[t] = ball_members(space, requests[t]).to_vector();
    if (stage[t].empty()) {
      throw InvalidArgument("request " + std::to_string(t + 1) + " has no members");
    }
    if (stage[t].size() > member_cap) {
      throw CapacityExceeded("request " + std::to_string(t + 1) + " has " +
                             std::to_string(stage[t].size()) + " members, cap is " +
                             std::to_string(member_cap));
    }
    value[t].assign(stage[t].size(), kInf);
    back[t].assign(stage[t].size(), 0);
    for (std::size_t j = 0; j < stage[t].size(); ++j) {
      const PointId y = stage[t][j];
      if (t == 0) {
        value[t][j] = space.distance(x0, y);
        continue;
      }
      // Members are ascending, so strict < keeps the smallest-id predecessor.
      for (std::size_t i = 0; i < stage[t - 1].size(); ++i) {
        const double v = value[t - 1][i] + space.distance(stage[t - 1][i], y);
        if (v < value[t][j]) {
          value[t][j] = v;
          back[t][j] = i;
        }
      }
    }
  }
  const std::size_t T = requests.size();
  std::size_t arg = 0;
  for (std::size_t j = 1; j < stage[T - 1].size(); ++j) {
    if (value[T - 1][j] < value[T - 1][arg]) arg = j;
  }
  FiniteOpt out;
  out.value = value[T - 1][arg];
  out.witness.resize(T);
  for (std::size_t t = T; t-- > 0;) {
    out.witness[t] = stage[t][arg];
    arg = back[t][arg];
  }
  return out;
}

bool is_nested(std::span<const ConvexBody> requests, double tol) {
  for (std::size_t i = 1; i < requests.size(); ++i) {
    if (!nested_within(requests[i], requests[i - 1], tol)) return false;
  }
  return true;
}

NormedOpt offline_opt_nested(const NormedSpace& space, std::span<const ConvexBody> requests,
                             const Vector& x0) {
  if (requests.empty()) return {0.0, x0};
  if (!is_nested(requests)) {
    throw Unsupported("normed offline optimum needs nested requests");
  }
  NormedOpt out;
  out.witness = project(space, x0, requests.back());
  out.value = space.distance(x0, out.witness);
  return out;
}

std::optional<BallSpec> ScriptedFiniteAdversary::next(std::span<const PointId> positions) {
  const std::size_t t = positions.size() - 1;
  if (t >= requests_.size()) return std::nullopt;
  return requests_[t];
}

std::optional<ConvexBody> ScriptedNormedAdversary::next(std::span<const Vector> positions) {
  const std::size_t t = positions.size() - 1;
  if (t >= requests_.size()) return std::nullopt;
  return requests_[t];
}

namespace {

PointId nearest_member(const MetricSpace& space, const BallSpec& request, PointId from) {
  const PointSet members = ball_members(space, request);
  if (members.empty()) throw InvalidArgument("empty request");
  double best = kInf;
  PointId arg = 0;
  members.for_each([&](PointId y) {
    const double v = space.distance(from, y);
    if (v < best) {
      best = v;
      arg = y;
    }
  });
  return arg;
}

class GreedyNestedFinite final : public FiniteSelector {
 public:
  std::string name() const override { return "greedy-nested"; }
  void init(const MetricSpace& arena, PointId x0) override {
    arena_ = &arena;
    x0_ = x0;
    cur_ = x0;
  }
  PointId respond(const BallSpec& request, std::span<const BallSpec>) override {
    if (!ball_contains(*arena_, request, cur_)) cur_ = nearest_member(*arena_, request, x0_);
    return cur_;
  }

 private:
  const MetricSpace* arena_ = nullptr;
  PointId x0_ = 0;
  PointId cur_ = 0;
};

class GreedyProjectionFinite final : public FiniteSelector {
 public:
  std::string name() const override { return "greedy-projection"; }
  void init(const MetricSpace& arena, PointId x0) override {
    arena_ = &arena;
    cur_ = x0;
  }
  PointId respond(const BallSpec& request, std::span<const BallSpec>) override {
    if (!ball_contains(*arena_, request, cur_)) cur_ = nearest_member(*arena_, request, cur_);
    return cur_;
  }

 private:
  const MetricSpace* arena_ = nullptr;
  PointId cur_ = 0;
};

class GreedyNestedNormed final : public NormedSelector {
 public:
  std::string name() const override { return "greedy-nested"; }
  void init(const NormedSpace& arena, const Vector& x0) override {
    arena_ = arena;
    x0_ = x0;
    cur_ = x0;
  }
  Vector respond(const ConvexBody& request, std::span<const ConvexBody>) override {
    if (!inside(request, cur_)) cur_ = project(arena_, x0_, request);
    return cur_;
  }

 private:
  NormedSpace arena_;
  Vector x0_;
  Vector cur_;
};

class GreedyProjectionNormed final : public NormedSelector {
 public:
  std::string name() const override { return "greedy-projection"; }
  void init(const NormedSpace& arena, const Vector& x0) override {
    arena_ = arena;
    cur_ = x0;
  }
  Vector respond(const ConvexBody& request, std::span<const ConvexBody>) override {
    if (!inside(request, cur_)) cur_ = project(arena_, cur_, request);
    return cur_;
  }

 private:
  NormedSpace arena_;
  Vector cur_;
};

class SteinerSelector final : public NormedSelector {
 public:
  SteinerSelector(std::size_t samples, std::uint64_t seed) : samples_(samples), seed_(seed) {
    if (samples == 0) throw InvalidArgument("steiner selector needs samples >= 1");
  }
  std::string name() const override { return "steiner"; }
  void init(const NormedSpace& arena, const Vector&) override { arena_ = arena; }
  Vector respond(const ConvexBody& request, std::span<const ConvexBody> history) override {
    if (std::holds_alternative<NormBall>(request)) {
      throw Unsupported("steiner selector handles boxes and vertex polytopes only");
    }
    // One stream per step, so a replayed history gives the same answers.
    const std::uint64_t seed = seed_ + 0x9E3779B97F4A7C15ULL * history.size();
    Vector s = steiner_point_mc(request, samples_, seed).point;
    if (inside(request, s)) return s;
    if (const auto* box = std::get_if<AxisBox>(&request)) return s.cwiseMax(box->lo).cwiseMin(box->hi);
    return project_l2_polytope(std::get<VPolytope>(request), s).point;
  }

 private:
  std::size_t samples_;
  std::uint64_t seed_;
  NormedSpace arena_;
};

}  // namespace

std::unique_ptr<FiniteSelector> greedy_nested_finite() {
  return std::make_unique<GreedyNestedFinite>();
}
std::unique_ptr<NormedSelector> greedy_nested_normed() {
  return std::make_unique<GreedyNestedNormed>();
}
std::unique_ptr<FiniteSelector> greedy_projection_finite() {
  return std::make_unique<GreedyProjectionFinite>();
}
std::unique_ptr<NormedSelector> greedy_projection_normed() {
  return std::make_unique<GreedyProjectionNormed>();
}
std::unique_ptr<NormedSelector> steiner_selector(std::size_t samples, std::uint64_t seed) {
  return std::make_unique<SteinerSelector>(samples, seed);
}

std::unique_ptr<FiniteSelector> make_finite_selector(std::string_view name) {
  if (name == "greedy-nested") return greedy_nested_finite();
  if (name == "greedy-projection") return greedy_projection_finite();
  if (name == "steiner") throw Unsupported("the steiner selector needs a normed arena");
  throw InvalidArgument("unknown selector '" + std::string(name) + "'");
}

std::unique_ptr<NormedSelector> make_normed_selector(std::string_view name, std::size_t samples,
                                                     std::uint64_t seed) {
  if (name == "greedy-nested") return greedy_nested_normed();
  if (name == "greedy-projection") return greedy_projection_normed();
  if (name == "steiner") return steiner_selector(samples, seed);
  throw InvalidArgument("unknown selector '" + std::string(name) + "'");
}

CompetitiveReport competitive_report(std::span<const InstanceSummary> instances) {
  CompetitiveReport rep;
  bool any = false;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& s = instances[i];
    rep.ratios.push_back(s.ratio);
    if (!s.ratio) {
      ++rep.degenerate;
      continue;
    }
    if (!any || *s.ratio > rep.max_ratio) {
      rep.max_ratio = *s.ratio;
      rep.argmax = i;
    }
    any = true;
    if (s.floor) {
      const bool ok = *s.ratio >= *s.floor;
      if (!ok) ++rep.floor_violations;
      rep.lines.push_back(s.instance + ": ratio " + csv::format_number(*s.ratio) + " >= floor " +
                          csv::format_number(*s.floor) + (ok ? " pass" : " FAIL"));
    }
    if (s.ceiling) {
      const bool ok = *s.ratio <= *s.ceiling;
      if (!ok) ++rep.ceiling_violations;
      rep.lines.push_back(s.instance + ": ratio " + csv::format_number(*s.ratio) +
                          " <= ceiling " + csv::format_number(*s.ceiling) +
                          (ok ? " pass" : " FAIL"));
    }
  }
  if (!any) throw InvalidArgument("every instance is degenerate (opt = 0)");
  return rep;
}

std::string format_request(const MetricSpace& space, const BallSpec& ball) {
  const std::string center =
      ball.center < space.size() ? space.name(ball.center) : "#" + std::to_string(ball.center);
  return std::string(ball.openness == Openness::open ? "B(" : "B[") + center + ";" +
         csv::format_number(ball.radius) + (ball.openness == Openness::open ? ")" : "]");
}

namespace {

std::vector<std::string> with_hash(std::vector<std::string> cells, const std::string& hash) {
  if (!hash.empty()) cells.push_back(hash);
  return cells;
}

}  // namespace

void write_transcript(std::ostream& out, const MetricSpace& space, const FiniteTranscript& t,
                      const std::string& instance, const std::string& config_hash, bool header) {
  csv::Writer w(out);
  if (header) {
    w.row(with_hash({"instance", "step", "request_id", "request", "x", "step_cost"},
                    config_hash.empty() ? "" : "config_hash"));
  }
  w.row(with_hash({instance, "0", "", "", space.name(t.start), "0"}, config_hash));
  for (std::size_t i = 0; i < t.trajectory.size(); ++i) {
    w.row(with_hash({instance, std::to_string(i + 1), std::to_string(i),
                     format_request(space, t.requests[i]), space.name(t.trajectory[i]),
                     csv::format_number(t.step_costs[i])},
                    config_hash));
  }
}

void write_transcript(std::ostream& out, const NormedTranscript& t, const std::string& instance,
                      const std::string& config_hash, bool header) {
  csv::Writer w(out);
  if (header) {
    w.row(with_hash({"instance", "step", "request_id", "request", "x", "step_cost"},
                    config_hash.empty() ? "" : "config_hash"));
  }
  w.row(with_hash({instance, "0", "", "", format_vector(t.start), "0"}, config_hash));
  for (std::size_t i = 0; i < t.trajectory.size(); ++i) {
    w.row(with_hash({instance, std::to_string(i + 1), std::to_string(i),
                     format_body(t.requests[i]), format_vector(t.trajectory[i]),
                     csv::format_number(t.step_costs[i])},
                    config_hash));
  }
}

void write_summary(std::ostream& out, std::span<const InstanceSummary> rows,
                   const std::string& config_hash) {
  csv::Writer w(out);
  w.row(with_hash({"instance", "cost", "opt", "ratio", "floor", "ceiling", "floor_check",
                   "ceiling_check"},
                  config_hash.empty() ? "" : "config_hash"));
  for (const auto& r : rows) {
    auto opt_num = [](const std::optional<double>& v) {
      return v ? csv::format_number(*v) : std::string();
    };
    std::string floor_check;
    std::string ceiling_check;
    if (r.ratio && r.floor) floor_check = *r.ratio >= *r.floor ? "pass" : "fail";
    if (r.ratio && r.ceiling) ceiling_check = *r.ratio <= *r.ceiling ? "pass" : "fail";
    w.row(with_hash({r.instance, csv::format_number(r.cost), csv::format_number(r.opt),
                     r.ratio ? csv::format_number(*r.ratio) : "degenerate", opt_num(r.floor),
                     opt_num(r.ceiling), floor_check, ceiling_check},
                    config_hash));
  }
}

}  // namespace chaselab
