#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chaselab/geometry.hpp"
#include "chaselab/metric_space.hpp"

namespace chaselab {

enum class TerminationReason { adversary_stopped, request_budget, player_escaped };
std::string_view to_string(TerminationReason r);

inline constexpr std::size_t kDefaultRequestBudget = 10000;
inline constexpr std::size_t kDpMemberCap = 10000;

// ---- finite metric arenas -------------------------------------------------

class FiniteSelector {
 public:
  virtual ~FiniteSelector() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const { return true; }
  virtual void init(const MetricSpace& arena, PointId x0) = 0;
  // Must return a member of request. history holds every request so far,
  // the current one last.
  virtual PointId respond(const BallSpec& request, std::span<const BallSpec> history) = 0;
};

class FiniteAdversary {
 public:
  virtual ~FiniteAdversary() = default;
  // positions = x_0 .. x_{t-1}. Returns the next request or nothing to stop.
  virtual std::optional<BallSpec> next(std::span<const PointId> positions) = 0;
  // Why next() last returned nothing.
  virtual TerminationReason stop_reason() const { return TerminationReason::adversary_stopped; }
};

// ---- normed arenas --------------------------------------------------------

class NormedSelector {
 public:
  virtual ~NormedSelector() = default;
  virtual std::string name() const = 0;
  virtual bool deterministic() const { return true; }
  virtual void init(const NormedSpace& arena, const Vector& x0) = 0;
  virtual Vector respond(const ConvexBody& request, std::span<const ConvexBody> history) = 0;
};

class NormedAdversary {
 public:
  virtual ~NormedAdversary() = default;
  virtual std::optional<ConvexBody> next(std::span<const Vector> positions) = 0;
  virtual TerminationReason stop_reason() const { return TerminationReason::adversary_stopped; }
};

// ---- transcripts ----------------------------------------------------------

template <class Point, class Request>
struct GameTranscript {
  std::string arena;  // "finite-metric" or "normed"
  std::string selector;
  Point start{};
  std::vector<Request> requests;
  std::vector<Point> trajectory;  // x_1 .. x_T
  std::vector<double> step_costs;
  double cost = 0.0;
  double opt = 0.0;
  std::vector<Point> opt_witness;  // one point (nested solver) or y_1..y_T (DP)
  std::string opt_solver;          // "nested" or "dp"
  std::optional<double> ratio;     // empty when opt == 0
  TerminationReason termination = TerminationReason::adversary_stopped;
  std::size_t moved_steps = 0;  // steps with x_{t-1} outside request t

  bool degenerate() const { return !ratio.has_value(); }
};

using FiniteTranscript = GameTranscript<PointId, BallSpec>;
using NormedTranscript = GameTranscript<Vector, ConvexBody>;

// Alternates adversary and selector until the adversary stops or the budget
// runs out, then fills in the offline optimum (nested closed form when the
// requests are nested, stagewise DP otherwise). Throws ContractViolation
// naming the step if the selector leaves its request.
FiniteTranscript run_game(FiniteAdversary& adversary, FiniteSelector& selector,
                          const MetricSpace& arena, PointId x0,
                          std::size_t request_budget = kDefaultRequestBudget);

// Normed games compute opt only for nested requests (distance from x0 to the
// last body); anything else throws Unsupported.
NormedTranscript run_game(NormedAdversary& adversary, NormedSelector& selector,
                          const NormedSpace& arena, const Vector& x0,
                          std::size_t request_budget = kDefaultRequestBudget);

// Builds a transcript from an already played sequence (used for the image
// game of a transferred run). known_nested skips the nesting test, for callers
// that know it from elsewhere (a linear bijection preserves inclusion, while
// a numerical test on image polytopes can miss shared faces).
NormedTranscript score_game(const NormedSpace& arena, const Vector& x0,
                            std::vector<ConvexBody> requests, std::vector<Vector> trajectory,
                            TerminationReason termination, std::string selector,
                            bool known_nested = false);

// ---- offline optimum ------------------------------------------------------

struct FiniteOpt {
  double value = 0.0;
  std::vector<PointId> witness;
};

bool is_nested(const MetricSpace& space, std::span<const BallSpec> requests);

// d(x0, B_T) with the nearest member of B_T (smallest id on ties) as witness.
// Throws InvalidArgument if the requests are not nested.
FiniteOpt offline_opt_nested(const MetricSpace& space, std::span<const BallSpec> requests,
                             PointId x0);

// Exact min over y_t in B_t of sum d(y_t, y_{t-1}). Throws CapacityExceeded
// when a request has more than member_cap members.
FiniteOpt offline_opt_finite_dp(const MetricSpace& space, std::span<const BallSpec> requests,
                                PointId x0, std::size_t member_cap = kDpMemberCap);

struct NormedOpt {
  double value = 0.0;
  Vector witness;
};

bool is_nested(std::span<const ConvexBody> requests, double tol = 1e-9);

NormedOpt offline_opt_nested(const NormedSpace& space, std::span<const ConvexBody> requests,
                             const Vector& x0);

// ---- scripted adversaries -------------------------------------------------

// Replays a fixed request list, ignoring the player.
class ScriptedFiniteAdversary final : public FiniteAdversary {
 public:
  explicit ScriptedFiniteAdversary(std::vector<BallSpec> requests) : requests_(std::move(requests)) {}
  std::optional<BallSpec> next(std::span<const PointId> positions) override;

 private:
  std::vector<BallSpec> requests_;
};

class ScriptedNormedAdversary final : public NormedAdversary {
 public:
  explicit ScriptedNormedAdversary(std::vector<ConvexBody> requests)
      : requests_(std::move(requests)) {}
  std::optional<ConvexBody> next(std::span<const Vector> positions) override;

 private:
  std::vector<ConvexBody> requests_;
};

// ---- selectors ------------------------------------------------------------

// Stays put while the current point is inside the request, otherwise moves to
// the member closest to x0.
std::unique_ptr<FiniteSelector> greedy_nested_finite();
std::unique_ptr<NormedSelector> greedy_nested_normed();

// Moves to the nearest point of the request from the current position.
std::unique_ptr<FiniteSelector> greedy_projection_finite();
std::unique_ptr<NormedSelector> greedy_projection_normed();

// Monte Carlo Steiner point of each request, pulled back into the request
// when the estimate lands outside. Boxes and vertex polytopes only.
std::unique_ptr<NormedSelector> steiner_selector(std::size_t samples, std::uint64_t seed);

// Names: "greedy-nested", "greedy-projection", "steiner".
std::unique_ptr<FiniteSelector> make_finite_selector(std::string_view name);
std::unique_ptr<NormedSelector> make_normed_selector(std::string_view name, std::size_t samples,
                                                     std::uint64_t seed);

// ---- reports --------------------------------------------------------------

struct InstanceSummary {
  std::string instance;
  double cost = 0.0;
  double opt = 0.0;
  std::optional<double> ratio;
  std::optional<double> floor;
  std::optional<double> ceiling;
};

template <class P, class R>
InstanceSummary summarize(std::string instance, const GameTranscript<P, R>& t,
                          std::optional<double> floor = {}, std::optional<double> ceiling = {}) {
  return {std::move(instance), t.cost, t.opt, t.ratio, floor, ceiling};
}

struct CompetitiveReport {
  std::vector<std::optional<double>> ratios;
  double max_ratio = 0.0;  // empirical sup over non-degenerate instances
  std::size_t argmax = 0;
  std::size_t degenerate = 0;
  std::size_t floor_violations = 0;    // ratio < floor
  std::size_t ceiling_violations = 0;  // ratio > ceiling
  std::vector<std::string> lines;      // one comparison line per bounded instance
};

// Throws InvalidArgument if every instance is degenerate.
CompetitiveReport competitive_report(std::span<const InstanceSummary> instances);

// ---- export ---------------------------------------------------------------

std::string format_request(const MetricSpace& space, const BallSpec& ball);

// Columns: instance,step,request_id,request,x,step_cost[,config_hash]. Step 0
// is the start point.
void write_transcript(std::ostream& out, const MetricSpace& space, const FiniteTranscript& t,
                      const std::string& instance, const std::string& config_hash,
                      bool header = true);
void write_transcript(std::ostream& out, const NormedTranscript& t, const std::string& instance,
                      const std::string& config_hash, bool header = true);

// Columns: instance,cost,opt,ratio,floor,ceiling,floor_check,ceiling_check[,config_hash]
void write_summary(std::ostream& out, std::span<const InstanceSummary> rows,
                   const std::string& config_hash);

}  // namespace chaselab
