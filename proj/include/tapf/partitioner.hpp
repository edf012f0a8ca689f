#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tapf/error.hpp"
#include "tapf/mla_star.hpp"
#include "tapf/rng.hpp"
#include "tapf/task.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

enum class HeuristicKind : std::uint8_t { FuseLengthAscending, KMeansLocality, InputOrder };

inline const char* to_string(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::FuseLengthAscending: return "fuse-length-ascending";
    case HeuristicKind::KMeansLocality: return "kmeans-locality";
    case HeuristicKind::InputOrder: return "input-order";
  }
  return "?";
}

inline HeuristicKind parse_heuristic(const std::string& s) {
  if (s == "fuse-length-ascending" || s == "fuse") return HeuristicKind::FuseLengthAscending;
  if (s == "kmeans-locality" || s == "kmeans") return HeuristicKind::KMeansLocality;
  if (s == "input-order" || s == "input") return HeuristicKind::InputOrder;
  throw ConfigError("unknown heuristic '" + s + "'");
}

/// Maximal runs of consecutive goals that belong to the same bomb, in task
/// order. Goals without a bomb tag form runs of one.
inline std::vector<std::vector<GoalId>> goal_units(const Task& task) {
  std::vector<std::vector<GoalId>> units;
  const Goal* prev = nullptr;
  for (const auto& g : task.goals) {
    const bool joins = prev && g.bomb && prev->bomb && g.bomb->bomb == prev->bomb->bomb;
    if (!joins) units.emplace_back();
    units.back().push_back(g.id);
    prev = &g;
  }
  return units;
}

/// Copy of `task` restricted to `ids` (in that order) with every constraint
/// whose time points all lie inside.
inline Task restrict_task(const Task& task, std::span<const GoalId> ids) {
  const auto inside = [&](const TimePoint& p) { return std::find(ids.begin(), ids.end(), p.goal) != ids.end(); };
  Task out;
  out.horizon = task.horizon;
  for (GoalId id : ids) out.goals.push_back(task.goal(id));
  for (const auto& c : task.abs_constraints)
    if (inside(c.point)) out.abs_constraints.push_back(c);
  for (const auto& c : task.inter_constraints)
    if (inside(c.from) && inside(c.to)) out.inter_constraints.push_back(c);
  for (const auto& c : task.prec_constraints)
    if (inside(c.earlier) && inside(c.later)) out.prec_constraints.push_back(c);
  return out;
}

namespace detail {

inline Task reorder(const Task& task, const std::vector<std::vector<GoalId>>& units,
                    const std::vector<std::size_t>& order) {
  std::vector<GoalId> ids;
  for (auto u : order) ids.insert(ids.end(), units[u].begin(), units[u].end());
  return restrict_task(task, ids);
}

/// Tightest absolute upper bound on any time point of the unit.
inline Timestep unit_deadline(const Task& task, const std::vector<GoalId>& unit) {
  Timestep d = std::numeric_limits<Timestep>::max();
  for (const auto& c : task.abs_constraints)
    if (std::find(unit.begin(), unit.end(), c.point.goal) != unit.end()) d = std::min(d, c.upper);
  return d;
}

inline double dist2(const Point2& a, const Point2& b) {
  return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

}  // namespace detail

/// Cluster units by location with k-means (k = beta / agents, at least 1,
/// 20 iterations, seeded centres, ties to the lowest index), then visit
/// clusters greedily nearest-first starting from the agents' centroid. Units
/// keep input order within a cluster.
inline std::vector<std::size_t> kmeans_order(const WorldGraph& graph, std::span<const AgentState> agents,
                                             const Task& task, const std::vector<std::vector<GoalId>>& units,
                                             int beta, std::uint64_t seed) {
  if (!graph.has_coordinates()) throw ConfigError("kmeans-locality needs vertex coordinates");
  const std::size_t n = units.size();
  std::vector<Point2> pos(n);
  for (std::size_t u = 0; u < n; ++u) pos[u] = graph.coordinate(task.goal(units[u].front()).vertex);

  const std::size_t n_agents = std::max<std::size_t>(1, agents.size());
  const std::size_t k = std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(std::max(beta, 0)) / n_agents));
  std::vector<std::size_t> label(n, 0);
  if (n == 0) return {};

  std::vector<std::size_t> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  Rng rng(seed);
  rng.shuffle(pick.begin(), pick.end());
  std::vector<Point2> centre(k);
  for (std::size_t c = 0; c < k; ++c) centre[c] = pos[pick[c]];

  for (int iter = 0; iter < 20; ++iter) {
    for (std::size_t u = 0; u < n; ++u) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (detail::dist2(pos[u], centre[c]) < detail::dist2(pos[u], centre[best])) best = c;
      label[u] = best;
    }
    for (std::size_t c = 0; c < k; ++c) {
      Point2 sum{0, 0};
      int count = 0;
      for (std::size_t u = 0; u < n; ++u)
        if (label[u] == c) {
          sum.x += pos[u].x;
          sum.y += pos[u].y;
          ++count;
        }
      if (count > 0) centre[c] = {sum.x / count, sum.y / count};
    }
  }

  Point2 at{0, 0};
  for (const auto& s : agents) {
    at.x += graph.coordinate(s.vertex).x / static_cast<double>(agents.size());
    at.y += graph.coordinate(s.vertex).y / static_cast<double>(agents.size());
  }
  std::vector<bool> visited(k, false);
  std::vector<std::size_t> order;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t next = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (visited[c]) continue;
      if (next == k || detail::dist2(at, centre[c]) < detail::dist2(at, centre[next])) next = c;
    }
    visited[next] = true;
    at = centre[next];
    for (std::size_t u = 0; u < n; ++u)
      if (label[u] == next) order.push_back(u);
  }
  return order;
}

namespace detail {

/// For each unit, the units that must precede it by a precedence constraint.
inline std::vector<std::vector<std::size_t>> unit_predecessors(const Task& task,
                                                               const std::vector<std::vector<GoalId>>& units) {
  std::map<GoalId, std::size_t> unit_of;
  for (std::size_t u = 0; u < units.size(); ++u)
    for (GoalId g : units[u]) unit_of[g] = u;
  std::vector<std::vector<std::size_t>> pred(units.size());
  for (const auto& c : task.prec_constraints) {
    const auto a = unit_of.find(c.earlier.goal), b = unit_of.find(c.later.goal);
    if (a == unit_of.end() || b == unit_of.end() || a->second == b->second) continue;
    pred[b->second].push_back(a->second);
  }
  return pred;
}

/// Stable topological repair: repeatedly takes the first unit in `order`
/// whose predecessors are all placed.
inline std::vector<std::size_t> respect_precedence(const std::vector<std::size_t>& order,
                                                   const std::vector<std::vector<std::size_t>>& pred) {
  std::vector<bool> placed(pred.size(), false);
  std::vector<std::size_t> out;
  while (out.size() < order.size()) {
    bool progressed = false;
    for (std::size_t u : order) {
      if (placed[u]) continue;
      if (std::all_of(pred[u].begin(), pred[u].end(), [&](std::size_t p) { return placed[p]; })) {
        placed[u] = true;
        out.push_back(u);
        progressed = true;
        break;
      }
    }
    if (!progressed) return order;  // cyclic; validate_task reports it
  }
  return out;
}

}  // namespace detail

/// Reorders goals by `kind`. A bomb's cuts stay contiguous and in order;
/// equal keys keep input order. The fuse and k-means orders also keep every
/// prerequisite ahead of its dependents, and a prerequisite inherits the
/// earliest deadline of anything waiting on it.
inline Task heuristic_sort(const WorldGraph& graph, std::span<const AgentState> agents, const Task& task,
                           HeuristicKind kind, int beta = 0, std::uint64_t seed = 0) {
  const auto units = goal_units(task);
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  const auto pred = detail::unit_predecessors(task, units);
  switch (kind) {
    case HeuristicKind::InputOrder:
      return detail::reorder(task, units, order);
    case HeuristicKind::FuseLengthAscending: {
      std::vector<Timestep> key(units.size());
      for (std::size_t u = 0; u < units.size(); ++u) key[u] = detail::unit_deadline(task, units[u]);
      for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t u = 0; u < units.size(); ++u)
          for (std::size_t p : pred[u])
            if (key[u] < key[p]) {
              key[p] = key[u];
              changed = true;
            }
      }
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
      break;
    }
    case HeuristicKind::KMeansLocality:
      order = kmeans_order(graph, agents, task, units, beta, seed);
      break;
  }
  return detail::reorder(task, units, detail::respect_precedence(order, pred));
}

/// Goal ids of consecutive chunks of at most `beta` goals. Chunk boundaries
/// move earlier so that no bomb is split.
inline std::vector<std::vector<GoalId>> partition_goals(const Task& task, int beta) {
  if (beta < 1) throw ConfigError("goals per subtask must be at least 1");
  const auto units = goal_units(task);
  std::vector<std::vector<GoalId>> chunks;
  for (const auto& u : units) {
    if (static_cast<int>(u.size()) > beta)
      throw ConfigError("goals per subtask (" + std::to_string(beta) + ") is smaller than a bomb sequence (" +
                        std::to_string(u.size()) + ")");
    if (chunks.empty() || chunks.back().size() + u.size() > static_cast<std::size_t>(beta)) chunks.emplace_back();
    chunks.back().insert(chunks.back().end(), u.begin(), u.end());
  }
  return chunks;
}

/// Goal ids of consecutive chunks of `bombs` bombs each.
inline std::vector<std::vector<GoalId>> partition_bombs(const Task& task, int bombs) {
  if (bombs < 1) throw ConfigError("bombs per subtask must be at least 1");
  const auto units = goal_units(task);
  std::vector<std::vector<GoalId>> chunks;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i % static_cast<std::size_t>(bombs) == 0) chunks.emplace_back();
    chunks.back().insert(chunks.back().end(), units[i].begin(), units[i].end());
  }
  return chunks;
}

/// Subtasks carrying the constraints among their own goals. Constraints that
/// span subtasks are bound at solve time from earlier results.
inline std::vector<Task> partition(const Task& task, int beta) {
  std::vector<Task> out;
  for (const auto& ids : partition_goals(task, beta)) out.push_back(restrict_task(task, ids));
  return out;
}

namespace detail {

/// Bounds implied for one time point by the task's own absolute ranges, the
/// goal's duration and the horizon.
inline Interval static_bounds(const Task& task, const TimePoint& p) {
  const Goal& g = task.goal(p.goal);
  Interval m{0, task.horizon - g.duration};
  Interval t{g.duration, task.horizon};
  for (const auto& c : task.abs_constraints) {
    if (c.point.goal != p.goal) continue;
    Interval& iv = c.point.anchor == Anchor::Execution ? m : t;
    iv.lower = std::max(iv.lower, c.lower);
    iv.upper = std::min(iv.upper, c.upper);
  }
  m.lower = std::max(m.lower, t.lower - g.duration);
  m.upper = std::min(m.upper, t.upper - g.duration);
  t.lower = std::max(t.lower, m.lower + g.duration);
  t.upper = std::min(t.upper, m.upper + g.duration);
  return p.anchor == Anchor::Execution ? m : t;
}

}  // namespace detail

/// The subtask over `chunk` with constraints that reach outside it turned
/// into absolute ranges. Goals already committed contribute their realized
/// timesteps. Goals of later subtasks contribute the loosest bound that still
/// leaves them a slot within their static range. Dropped goals are taken to
/// fail at `dropped` timings and only delay the goals that wait on them.
inline Task bind_subtask(const Task& full, std::span<const GoalId> chunk,
                         const std::map<GoalId, GoalTiming>& committed,
                         const std::map<GoalId, GoalTiming>& dropped = {}) {
  Task out = restrict_task(full, chunk);
  const auto inside = [&](const TimePoint& p) { return std::find(chunk.begin(), chunk.end(), p.goal) != chunk.end(); };
  std::map<TimePoint, Interval> derived;
  const auto other_value = [&](const TimePoint& p, bool want_upper) -> Timestep {
    if (auto it = committed.find(p.goal); it != committed.end()) return anchor_time(it->second, p.anchor);
    const Interval s = detail::static_bounds(full, p);
    return want_upper ? s.upper : s.lower;
  };
  for (const auto& d : task_differences(full)) {
    if (!d.x || !d.y) continue;
    const bool xin = inside(*d.x), yin = inside(*d.y);
    if (xin == yin) continue;
    if (xin) {
      // x <= bound + y
      if (dropped.count(d.y->goal)) continue;
      auto& iv = derived[*d.x];
      iv.upper = std::min(iv.upper, d.bound + other_value(*d.y, true));
    } else {
      // y >= x - bound
      auto& iv = derived[*d.y];
      const auto it = dropped.find(d.x->goal);
      const Timestep xv = it != dropped.end() ? anchor_time(it->second, d.x->anchor) : other_value(*d.x, false);
      iv.lower = std::max(iv.lower, xv - d.bound);
    }
  }
  const Interval unbounded{};
  for (const auto& [p, iv] : derived) {
    const Timestep lo = iv.lower == unbounded.lower ? 0 : std::max<Timestep>(iv.lower, 0);
    const Timestep hi = iv.upper == unbounded.upper ? full.horizon : std::min(iv.upper, full.horizon);
    out.abs_constraints.push_back({p, lo, hi});
  }
  return out;
}

/// Timings at which goals left out of a plan are taken to fail: the latest
/// their static range allows.
inline std::map<GoalId, GoalTiming> failure_timings(const Task& task, std::span<const GoalId> goals) {
  std::map<GoalId, GoalTiming> out;
  for (GoalId g : goals)
    out[g] = {g, detail::static_bounds(task, mu(g)).upper, detail::static_bounds(task, tau(g)).upper};
  return out;
}

}  // namespace tapf
