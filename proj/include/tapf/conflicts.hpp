#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tapf/assignment.hpp"
#include "tapf/mla_star.hpp"
#include "tapf/task.hpp"

namespace tapf {

/// Declaration order is the resolution priority.
enum class ConflictKind : std::uint8_t { AbsRange, Precedence, InterGoal, Vertex, Edge, Explosion };

inline const char* to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::AbsRange: return "abs-range";
    case ConflictKind::Precedence: return "precedence";
    case ConflictKind::InterGoal: return "inter-goal";
    case ConflictKind::Vertex: return "vertex";
    case ConflictKind::Edge: return "edge";
    case ConflictKind::Explosion: return "explosion";
  }
  return "?";
}

struct Conflict {
  ConflictKind kind = ConflictKind::AbsRange;
  /// Earliest timestep at which the violation shows; secondary sort key.
  Timestep time = 0;

  // Temporal conflicts. AbsRange uses `a` and [lower, upper]; Precedence has
  // a = earlier, b = later; InterGoal has a = from, b = to and `bound`.
  TimePoint a{};
  TimePoint b{};
  Timestep observed_a = 0;
  Timestep observed_b = 0;
  Timestep lower = 0;
  Timestep upper = 0;
  Timestep bound = 0;

  // Vertex / Edge / Explosion.
  AgentId agent1 = -1;
  AgentId agent2 = -1;
  VertexId u = -1;
  VertexId v = -1;
  std::vector<GoalId> goals;  // Explosion: goals of the exploded bomb
};

struct ConflictOptions {
  bool collision_checking = false;
};

namespace detail {

inline const GoalTiming* find_timing(const Solution& solution, GoalId g) {
  for (const auto& p : solution)
    if (p)
      if (const GoalTiming* gt = p->timing(g)) return gt;
  return nullptr;
}

inline std::optional<Timestep> time_of(const Solution& solution, const TimePoint& p) {
  const GoalTiming* gt = find_timing(solution, p.goal);
  if (!gt) return std::nullopt;
  return anchor_time(*gt, p.anchor);
}

inline void sort_conflicts(std::vector<Conflict>& out) {
  std::stable_sort(out.begin(), out.end(), [](const Conflict& x, const Conflict& y) {
    return std::tie(x.kind, x.time) < std::tie(y.kind, y.time);
  });
}

}  // namespace detail

/// Every temporal constraint the solution violates plus, when enabled,
/// vertex and edge collisions between agents; sorted by kind priority then by
/// earliest violating timestep. Constraints on goals not in the solution are
/// skipped.
inline std::vector<Conflict> detect_conflicts(const Solution& solution, const Task& task,
                                              const ConflictOptions& options = {}) {
  using detail::time_of;
  std::vector<Conflict> out;

  for (const auto& c : task.abs_constraints) {
    const auto t = time_of(solution, c.point);
    if (!t || (c.lower <= *t && *t <= c.upper)) continue;
    Conflict k;
    k.kind = ConflictKind::AbsRange;
    k.time = *t;
    k.a = c.point;
    k.observed_a = *t;
    k.lower = c.lower;
    k.upper = c.upper;
    out.push_back(std::move(k));
  }
  for (const auto& c : task.prec_constraints) {
    const auto te = time_of(solution, c.earlier);
    const auto tl = time_of(solution, c.later);
    if (!te || !tl || *te < *tl) continue;
    Conflict k;
    k.kind = ConflictKind::Precedence;
    k.time = *tl;
    k.a = c.earlier;
    k.b = c.later;
    k.observed_a = *te;
    k.observed_b = *tl;
    out.push_back(std::move(k));
  }
  for (const auto& c : task.inter_constraints) {
    const auto tf = time_of(solution, c.from);
    const auto tt = time_of(solution, c.to);
    if (!tf || !tt || *tt - *tf <= c.bound) continue;
    Conflict k;
    k.kind = ConflictKind::InterGoal;
    k.time = *tf + c.bound + 1;
    k.a = c.from;
    k.b = c.to;
    k.observed_a = *tf;
    k.observed_b = *tt;
    k.bound = c.bound;
    out.push_back(std::move(k));
  }

  if (options.collision_checking) {
    Timestep last = 0;
    for (const auto& p : solution)
      if (p) last = std::max(last, p->end_time());
    for (std::size_t i = 0; i < solution.size(); ++i)
      for (std::size_t j = i + 1; j < solution.size(); ++j) {
        const auto& pi = solution[i];
        const auto& pj = solution[j];
        if (!pi || !pj) continue;
        const Timestep from = std::max(pi->start_time, pj->start_time);
        for (Timestep t = from; t <= last; ++t) {
          if (pi->vertex_at(t) == pj->vertex_at(t)) {
            Conflict k;
            k.kind = ConflictKind::Vertex;
            k.time = t;
            k.agent1 = static_cast<AgentId>(i);
            k.agent2 = static_cast<AgentId>(j);
            k.u = pi->vertex_at(t);
            out.push_back(std::move(k));
            break;
          }
          if (t < last && pi->vertex_at(t) == pj->vertex_at(t + 1) &&
              pi->vertex_at(t + 1) == pj->vertex_at(t) && pi->vertex_at(t) != pi->vertex_at(t + 1)) {
            Conflict k;
            k.kind = ConflictKind::Edge;
            k.time = t;
            k.agent1 = static_cast<AgentId>(i);
            k.agent2 = static_cast<AgentId>(j);
            k.u = pi->vertex_at(t);
            k.v = pi->vertex_at(t + 1);
            out.push_back(std::move(k));
            break;
          }
        }
      }
  }
  detail::sort_conflicts(out);
  return out;
}

/// A bound on one time point: anchor >= value (Lower) or anchor <= value (Upper).
struct BoundUpdate {
  enum class Side : std::uint8_t { Lower, Upper } side = Side::Lower;
  TimePoint point{};
  Timestep value = 0;
};

/// One child of a constraint-tree expansion: the agent to replan and what is
/// added to the node's constraints.
struct Branch {
  AgentId agent = 0;
  std::vector<BoundUpdate> bounds;
  std::vector<std::pair<VertexId, Timestep>> vertex_forbids;
  std::vector<std::tuple<VertexId, VertexId, Timestep>> edge_forbids;
};

inline BoundUpdate at_least(TimePoint p, Timestep v) { return {BoundUpdate::Side::Lower, p, v}; }
inline BoundUpdate at_most(TimePoint p, Timestep v) { return {BoundUpdate::Side::Upper, p, v}; }

/// Children for one conflict.
///
/// InterGoal <a, b, bound> with b at t': {a >= t' - bound} replanning a's
/// agent, and {a <= t' - bound - 1, b <= t' - 1} replanning b's agent.
/// Precedence a < b with b at t': {a <= t' - 1} replanning a's agent, and
/// {a >= t', b >= t' + 1} replanning b's agent. AbsRange: one child clamping
/// the violated side. Vertex/Edge: forbid either agent. Explosion at t: one
/// child per agent forbidding its vertex at t (`positions` gives them).
inline std::vector<Branch> resolve_conflict(const Conflict& c, const Assignment& assignment,
                                            std::span<const VertexId> positions = {}) {
  const auto owner = [&](const TimePoint& p) {
    auto a = assignment.agent_of(p.goal);
    if (!a) throw InputError("conflict on unassigned goal " + std::to_string(p.goal));
    return *a;
  };
  std::vector<Branch> out;
  switch (c.kind) {
    case ConflictKind::AbsRange: {
      Branch b{owner(c.a), {}, {}, {}};
      if (c.observed_a < c.lower) b.bounds.push_back(at_least(c.a, c.lower));
      else b.bounds.push_back(at_most(c.a, c.upper));
      out.push_back(std::move(b));
      break;
    }
    case ConflictKind::Precedence: {
      const Timestep t = c.observed_b;
      out.push_back({owner(c.a), {at_most(c.a, t - 1)}, {}, {}});
      out.push_back({owner(c.b), {at_least(c.a, t), at_least(c.b, t + 1)}, {}, {}});
      break;
    }
    case ConflictKind::InterGoal: {
      const Timestep t = c.observed_b;
      out.push_back({owner(c.a), {at_least(c.a, t - c.bound)}, {}, {}});
      out.push_back({owner(c.b), {at_most(c.a, t - c.bound - 1), at_most(c.b, t - 1)}, {}, {}});
      break;
    }
    case ConflictKind::Vertex:
      out.push_back({c.agent1, {}, {{c.u, c.time}}, {}});
      out.push_back({c.agent2, {}, {{c.u, c.time}}, {}});
      break;
    case ConflictKind::Edge:
      out.push_back({c.agent1, {}, {}, {{c.u, c.v, c.time}}});
      out.push_back({c.agent2, {}, {}, {{c.v, c.u, c.time}}});
      break;
    case ConflictKind::Explosion:
      for (std::size_t a = 0; a < positions.size(); ++a)
        if (positions[a] >= 0) out.push_back({static_cast<AgentId>(a), {}, {{positions[a], c.time}}, {}});
      break;
  }
  return out;
}

}  // namespace tapf
