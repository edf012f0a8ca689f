#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tapf/assignment.hpp"
#include "tapf/task.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

struct GoalTiming {
  GoalId goal = 0;
  Timestep exec = 0;  // mu
  Timestep done = 0;  // tau
  bool operator==(const GoalTiming&) const = default;
};

inline Timestep anchor_time(const GoalTiming& gt, Anchor a) {
  return a == Anchor::Execution ? gt.exec : gt.done;
}

enum class StepKind : std::uint8_t { Wait, Move, Act };

struct PathStep {
  StepKind kind = StepKind::Wait;
  VertexId to = 0;
  GoalId goal = -1;  // set for Act
};

/// A single agent's timed path starting at `start_time` (absolute timestep).
///
/// `occupied[k]` is the vertex at `start_time + k`. The agent performs goal g
/// at g's vertex for timesteps [exec, done) and stays at its last vertex after
/// the path ends.
struct TimedPath {
  Timestep start_time = 0;
  std::vector<VertexId> occupied;
  std::vector<GoalTiming> goal_times;

  Timestep end_time() const { return start_time + static_cast<Timestep>(occupied.size()) - 1; }
  Timestep cost() const { return static_cast<Timestep>(occupied.size()) - 1; }

  VertexId vertex_at(Timestep t) const {
    if (t <= start_time) return occupied.front();
    const auto k = static_cast<std::size_t>(t - start_time);
    return k < occupied.size() ? occupied[k] : occupied.back();
  }

  const GoalTiming* timing(GoalId g) const {
    for (const auto& gt : goal_times)
      if (gt.goal == g) return &gt;
    return nullptr;
  }

  /// Action taken between t and t + 1 (wait outside the path's span).
  PathStep step_at(Timestep t) const {
    if (t < start_time || t >= end_time()) return {StepKind::Wait, vertex_at(t), -1};
    for (const auto& gt : goal_times)
      if (gt.exec <= t && t < gt.done) return {StepKind::Act, vertex_at(t), gt.goal};
    const VertexId a = vertex_at(t), b = vertex_at(t + 1);
    return a == b ? PathStep{StepKind::Wait, a, -1} : PathStep{StepKind::Move, b, -1};
  }

  bool operator==(const TimedPath&) const = default;
};

/// Constraints one low-level call must honour.
struct PathConstraintSet {
  std::unordered_set<std::int64_t> vertex_forbids;  // packed (vertex, t)
  std::unordered_set<std::int64_t> edge_forbids;    // packed (from, to, t)
  GoalBounds goal_bounds;

  static std::int64_t vertex_key(VertexId v, Timestep t) {
    return (static_cast<std::int64_t>(t) << 32) | static_cast<std::uint32_t>(v);
  }
  static std::int64_t edge_key(VertexId u, VertexId v, Timestep t) {
    return (static_cast<std::int64_t>(t) << 40) | (static_cast<std::int64_t>(u) << 20) |
           static_cast<std::int64_t>(v);
  }

  void forbid_vertex(VertexId v, Timestep t) { vertex_forbids.insert(vertex_key(v, t)); }
  void forbid_edge(VertexId u, VertexId v, Timestep t) { edge_forbids.insert(edge_key(u, v, t)); }
  bool vertex_forbidden(VertexId v, Timestep t) const {
    return !vertex_forbids.empty() && vertex_forbids.count(vertex_key(v, t));
  }
  bool edge_forbidden(VertexId u, VertexId v, Timestep t) const {
    return !edge_forbids.empty() && edge_forbids.count(edge_key(u, v, t));
  }

  /// Latest forbidden timestep at `v`, or -1.
  Timestep last_forbid_at(VertexId v) const {
    Timestep last = -1;
    for (auto key : vertex_forbids)
      if (static_cast<VertexId>(key & 0xffffffff) == v) last = std::max(last, static_cast<Timestep>(key >> 32));
    return last;
  }
};

/// Execution-time window for a goal, folding completion bounds back by the
/// goal's duration.
inline Interval execution_window(const Goal& g, const GoalBounds& bounds) {
  const Interval m = bounds.at(mu(g.id));
  const Interval t = bounds.at(tau(g.id));
  const Interval unbounded{};
  Interval out = m;
  if (t.lower != unbounded.lower) out.lower = std::max(out.lower, t.lower - g.duration);
  if (t.upper != unbounded.upper) out.upper = std::min(out.upper, t.upper - g.duration);
  return out;
}

/// Multi-label A* over (vertex, timestep, next-goal index).
///
/// Returns the minimum-cost timed path from `start` through `goals` in order,
/// where cost is the completion timestep of the last goal minus the start
/// time. None if no such path completes by `horizon`.
inline std::optional<TimedPath> mla_star(const WorldGraph& graph, AgentState start,
                                         std::span<const Goal> goals,
                                         const PathConstraintSet& constraints, Timestep horizon) {
  graph.check_vertex(start.vertex);
  const int L = static_cast<int>(goals.size());
  const int V = graph.vertex_count();
  const Timestep t0 = start.time;
  if (t0 > horizon) return std::nullopt;

  std::vector<Interval> window(L);
  for (int k = 0; k < L; ++k) {
    window[k] = execution_window(goals[k], constraints.goal_bounds);
    if (window[k].empty()) return std::nullopt;
  }

  // Earliest completion of the remaining chain from (v, t, k), or nullopt when
  // some remaining execution window is already unreachable.
  const auto earliest_finish = [&](VertexId v, Timestep t, int k) -> std::optional<Timestep> {
    Timestep e = t;
    VertexId at = v;
    for (int j = k; j < L; ++j) {
      e = std::max(e + graph.shortest_dist(at, goals[j].vertex), window[j].lower);
      if (e > window[j].upper) return std::nullopt;
      e += goals[j].duration;
      at = goals[j].vertex;
    }
    return e;
  };

  std::unordered_map<VertexId, Timestep> last_forbid;
  const auto final_forbid = [&](VertexId v) {
    auto it = last_forbid.find(v);
    if (it == last_forbid.end()) it = last_forbid.emplace(v, constraints.last_forbid_at(v)).first;
    return it->second;
  };

  const std::int64_t T = static_cast<std::int64_t>(horizon) - t0 + 1;
  const auto key = [&](VertexId v, Timestep t, int k) {
    return (static_cast<std::int64_t>(k) * T + (t - t0)) * V + v;
  };

  struct Entry {
    Timestep f;
    int k;
    Timestep t;
    VertexId v;
    std::int64_t id;
  };
  // Ties: higher goal index, then earlier timestep, then lower vertex id.
  const auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.k != b.k) return a.k < b.k;
    if (a.t != b.t) return a.t > b.t;
    return a.v > b.v;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::unordered_map<std::int64_t, std::int64_t> parent;  // child -> parent (-1 for root)

  const auto push = [&](VertexId v, Timestep t, int k, std::int64_t from) {
    if (t > horizon) return;
    const auto id = key(v, t, k);
    if (parent.count(id)) return;
    const auto f = earliest_finish(v, t, k);
    if (!f || *f > horizon) return;
    parent.emplace(id, from);
    open.push({*f, k, t, v, id});
  };

  if (constraints.vertex_forbidden(start.vertex, t0)) return std::nullopt;
  push(start.vertex, t0, 0, -1);

  while (!open.empty()) {
    const Entry cur = open.top();
    open.pop();
    const auto [f, k, t, v, id] = cur;

    if (k == L && final_forbid(v) <= t) {
      std::vector<std::int64_t> chain;
      for (std::int64_t at = id; at != -1; at = parent.at(at)) chain.push_back(at);
      std::reverse(chain.begin(), chain.end());
      TimedPath path;
      path.start_time = t0;
      int prev_k = 0;
      Timestep prev_t = t0;
      for (auto c : chain) {
        const auto cv = static_cast<VertexId>(c % V);
        const auto ct = static_cast<Timestep>((c / V) % T) + t0;
        const auto ck = static_cast<int>(c / V / T);
        if (ck > prev_k) {
          // Goal action transition: the agent stays put for the duration.
          const Goal& g = goals[prev_k];
          path.goal_times.push_back({g.id, prev_t, ct});
          for (Timestep s = prev_t + 1; s <= ct; ++s) path.occupied.push_back(cv);
        } else {
          path.occupied.push_back(cv);
        }
        prev_k = ck;
        prev_t = ct;
      }
      return path;
    }

    if (k < L && goals[k].vertex == v && window[k].contains(t)) {
      const Timestep done = t + goals[k].duration;
      bool blocked = false;
      for (Timestep s = t + 1; s <= done && !blocked; ++s) blocked = constraints.vertex_forbidden(v, s);
      if (!blocked) push(v, done, k + 1, id);
    }
    if (t + 1 > horizon) continue;
    if (!constraints.vertex_forbidden(v, t + 1)) push(v, t + 1, k, id);
    for (VertexId w : graph.neighbors(v)) {
      if (constraints.vertex_forbidden(w, t + 1) || constraints.edge_forbidden(v, w, t)) continue;
      push(w, t + 1, k, id);
    }
  }
  return std::nullopt;
}

/// Per-agent solution; unchanged agents share path objects between nodes.
using Solution = std::vector<std::shared_ptr<const TimedPath>>;

inline Timestep sum_of_path_costs(const Solution& solution) {
  Timestep total = 0;
  for (const auto& p : solution)
    if (p) total += p->cost();
  return total;
}

inline std::vector<Goal> goal_sequence(const Task& task, const std::vector<GoalId>& ids) {
  std::vector<Goal> seq;
  seq.reserve(ids.size());
  for (GoalId id : ids) seq.push_back(task.goal(id));
  return seq;
}

/// Root mode (no prior): plans every agent. Child mode: replans only
/// `replan_agent` and shares every other path with `prior`.
inline std::optional<Solution> plan_solution(const WorldGraph& graph,
                                             std::span<const AgentState> agents, const Task& task,
                                             const Assignment& assignment,
                                             std::span<const PathConstraintSet> constraints,
                                             const Solution* prior = nullptr,
                                             std::optional<AgentId> replan_agent = std::nullopt) {
  Solution out(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (prior && replan_agent && static_cast<AgentId>(a) != *replan_agent) {
      out[a] = (*prior)[a];
      continue;
    }
    const auto seq = goal_sequence(task, assignment.sequences[a]);
    auto path = mla_star(graph, agents[a], seq, constraints[a], task.horizon);
    if (!path) return std::nullopt;
    out[a] = std::make_shared<const TimedPath>(std::move(*path));
  }
  return out;
}

}  // namespace tapf
