#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tapf/error.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

using GoalId = std::int32_t;
using AgentId = std::int32_t;
using Timestep = std::int32_t;

/// Which timestep of a goal a temporal constraint binds: when the goal
/// action starts executing (mu) or when it completes (tau).
enum class Anchor : std::uint8_t { Execution, Completion };

inline const char* to_string(Anchor a) { return a == Anchor::Execution ? "mu" : "tau"; }

struct TimePoint {
  GoalId goal = 0;
  Anchor anchor = Anchor::Completion;
  auto operator<=>(const TimePoint&) const = default;
};

inline TimePoint mu(GoalId g) { return {g, Anchor::Execution}; }
inline TimePoint tau(GoalId g) { return {g, Anchor::Completion}; }

inline std::string to_string(const TimePoint& p) {
  return std::string(to_string(p.anchor)) + "(" + std::to_string(p.goal) + ")";
}

/// Domain metadata tying a goal to a bomb wire.
struct BombTag {
  int bomb = 0;
  int position = 0;
  bool operator==(const BombTag&) const = default;
};

struct Goal {
  GoalId id = 0;
  VertexId vertex = 0;
  std::string action;
  Timestep duration = 0;
  std::optional<BombTag> bomb;
};

/// t_lower <= anchor(goal) <= t_upper
struct AbsRangeConstraint {
  TimePoint point;
  Timestep lower = 0;
  Timestep upper = 0;
};

/// anchor(to) - anchor(from) <= bound
struct InterGoalConstraint {
  TimePoint from;
  TimePoint to;
  Timestep bound = 0;
};

/// anchor(earlier) < anchor(later)
struct PrecedenceConstraint {
  TimePoint earlier;
  TimePoint later;
};

struct Task {
  std::vector<Goal> goals;
  std::vector<AbsRangeConstraint> abs_constraints;
  std::vector<InterGoalConstraint> inter_constraints;
  std::vector<PrecedenceConstraint> prec_constraints;
  Timestep horizon = 0;

  const Goal* find(GoalId id) const {
    for (const auto& g : goals)
      if (g.id == id) return &g;
    return nullptr;
  }
  const Goal& goal(GoalId id) const {
    if (const Goal* g = find(id)) return *g;
    throw InputError("unknown goal id " + std::to_string(id));
  }
  bool contains(GoalId id) const { return find(id) != nullptr; }
};

struct AgentSpec {
  AgentId id = 0;
  VertexId start = 0;
  std::vector<std::string> capabilities;

  bool can_perform(const std::string& action) const {
    return std::find(capabilities.begin(), capabilities.end(), action) != capabilities.end();
  }
};

/// Where and when an agent becomes free: the end of its committed plan.
struct AgentState {
  VertexId vertex = 0;
  Timestep time = 0;
  bool operator==(const AgentState&) const = default;
};

/// Closed integer interval; default is unbounded.
struct Interval {
  Timestep lower = std::numeric_limits<Timestep>::min() / 4;
  Timestep upper = std::numeric_limits<Timestep>::max() / 4;
  bool empty() const { return lower > upper; }
  bool contains(Timestep t) const { return lower <= t && t <= upper; }
  bool operator==(const Interval&) const = default;
};

/// Accumulated per-(goal, anchor) timestep bounds of a constraint-tree node.
class GoalBounds {
 public:
  void tighten_lower(TimePoint p, Timestep v) {
    auto& iv = bounds_[p];
    iv.lower = std::max(iv.lower, v);
  }
  void tighten_upper(TimePoint p, Timestep v) {
    auto& iv = bounds_[p];
    iv.upper = std::min(iv.upper, v);
  }
  Interval at(TimePoint p) const {
    auto it = bounds_.find(p);
    return it == bounds_.end() ? Interval{} : it->second;
  }
  bool empty() const { return bounds_.empty(); }
  const std::map<TimePoint, Interval>& entries() const { return bounds_; }
  bool operator==(const GoalBounds&) const = default;

 private:
  std::map<TimePoint, Interval> bounds_;
};

/// x - y <= bound, with nullopt standing for the zero origin.
struct DifferenceConstraint {
  std::optional<TimePoint> x;
  std::optional<TimePoint> y;
  Timestep bound = 0;
};

/// Every task constraint as single-difference inequalities (abs, inter, prec).
inline std::vector<DifferenceConstraint> task_differences(const Task& task) {
  std::vector<DifferenceConstraint> out;
  for (const auto& c : task.abs_constraints) {
    out.push_back({c.point, std::nullopt, c.upper});
    out.push_back({std::nullopt, c.point, -c.lower});
  }
  for (const auto& c : task.inter_constraints) out.push_back({c.to, c.from, c.bound});
  for (const auto& c : task.prec_constraints) out.push_back({c.earlier, c.later, -1});
  return out;
}

inline bool is_movement_action(const std::string& action) {
  return action.empty() || action == "move" || action == "wait";
}

/// Checks structural invariants; returns one message per violation.
inline std::vector<std::string> validate_task(const Task& task) {
  std::vector<std::string> violations;
  std::unordered_map<GoalId, int> seen;
  for (const auto& g : task.goals) {
    if (g.id < 0) violations.push_back("goal id " + std::to_string(g.id) + " is negative");
    if (++seen[g.id] == 2) violations.push_back("duplicate goal id " + std::to_string(g.id));
    if (g.duration < 0)
      violations.push_back("goal " + std::to_string(g.id) + " has negative duration");
    if (is_movement_action(g.action))
      violations.push_back("goal " + std::to_string(g.id) + " has movement action '" + g.action + "'");
  }
  const auto known = [&](const TimePoint& p, const char* what) {
    if (seen.count(p.goal)) return true;
    violations.push_back(std::string(what) + " references unknown goal " + std::to_string(p.goal));
    return false;
  };
  for (const auto& c : task.abs_constraints) {
    known(c.point, "absolute range constraint");
    if (c.lower > c.upper)
      violations.push_back("absolute range on " + to_string(c.point) + " is empty");
    if (c.lower < 0 || c.upper > task.horizon)
      violations.push_back("absolute range on " + to_string(c.point) + " leaves [0, horizon]");
  }
  for (const auto& c : task.inter_constraints) {
    known(c.from, "inter-goal constraint");
    known(c.to, "inter-goal constraint");
    if (c.from.goal == c.to.goal)
      violations.push_back("inter-goal constraint relates goal " + std::to_string(c.from.goal) +
                           " to itself");
  }
  for (const auto& c : task.prec_constraints) {
    known(c.earlier, "precedence constraint");
    known(c.later, "precedence constraint");
    if (c.earlier.goal == c.later.goal)
      violations.push_back("precedence constraint relates goal " + std::to_string(c.earlier.goal) +
                           " to itself");
  }

  // Cycle check over time points: precedence edges plus mu(g) -> tau(g).
  std::map<TimePoint, int> index;
  for (const auto& g : task.goals) {
    index.emplace(mu(g.id), static_cast<int>(index.size()));
    index.emplace(tau(g.id), static_cast<int>(index.size()));
  }
  std::vector<std::vector<int>> out(index.size());
  std::vector<int> indegree(index.size(), 0);
  const auto add_edge = [&](const TimePoint& a, const TimePoint& b) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) return;
    out[ia->second].push_back(ib->second);
    ++indegree[ib->second];
  };
  for (const auto& g : task.goals) add_edge(mu(g.id), tau(g.id));
  for (const auto& c : task.prec_constraints) add_edge(c.earlier, c.later);
  std::queue<int> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i)
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop();
    ++visited;
    for (int w : out[u])
      if (--indegree[w] == 0) ready.push(w);
  }
  if (visited != index.size()) violations.push_back("precedence constraints contain a cycle");
  return violations;
}

}  // namespace tapf
