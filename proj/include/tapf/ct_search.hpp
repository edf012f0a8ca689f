#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "tapf/assignment.hpp"
#include "tapf/conflicts.hpp"
#include "tapf/mla_star.hpp"
#include "tapf/oracle.hpp"
#include "tapf/partitioner.hpp"
#include "tapf/task.hpp"
#include "tapf/temporal_feasibility.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

enum class SolverKind : std::uint8_t {
  CbsTaPtc,  // temporal conflicts, feasibility pruning
  CbsTa,     // vertex constraints on explosions only
};

enum class SolveStatus : std::uint8_t { Optimal, BestEffort, Unsolvable, Timeout };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::BestEffort: return "best-effort";
    case SolveStatus::Unsolvable: return "unsolvable";
    case SolveStatus::Timeout: return "timeout";
  }
  return "?";
}

inline const char* to_string(SolverKind k) { return k == SolverKind::CbsTaPtc ? "cbs-ta-ptc" : "cbs-ta"; }

struct SolverOptions {
  SolverKind kind = SolverKind::CbsTaPtc;
  /// Accept the first node whose return reaches epsilon times the target.
  double epsilon = 1.0;
  bool collision_checking = false;
  double timeout_seconds = 300.0;
  std::uint64_t max_expansions = std::numeric_limits<std::uint64_t>::max();
  /// Worker threads for root evaluation; results are consumed in enumeration
  /// order so the outcome does not depend on this.
  int parallel_roots = 1;
  /// Unset: every precedence-consistent per-agent order when the whole task is
  /// one subtask, task order otherwise.
  std::optional<OrderPolicy> order_policy;
  EnumerationLimits limits;
  /// Record the return of every node popped while searching the full goal
  /// set (for property tests).
  bool record_pops = false;
};

inline void validate_options(const SolverOptions& o) {
  if (!(o.epsilon > 0.0 && o.epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(o.timeout_seconds >= 0.0)) throw ConfigError("timeout must be non-negative");
  if (o.parallel_roots < 1) throw ConfigError("parallel_roots must be at least 1");
}

struct SearchStats {
  std::uint64_t roots_enumerated = 0;
  std::uint64_t roots_pruned = 0;
  std::uint64_t nodes_generated = 0;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t nodes_pruned = 0;
  std::uint64_t low_level_calls = 0;
  double seconds = 0;

  SearchStats& operator+=(const SearchStats& o) {
    roots_enumerated += o.roots_enumerated;
    roots_pruned += o.roots_pruned;
    nodes_generated += o.nodes_generated;
    nodes_expanded += o.nodes_expanded;
    nodes_pruned += o.nodes_pruned;
    low_level_calls += o.low_level_calls;
    seconds += o.seconds;
    return *this;
  }
};

/// One subtask as the search sees it.
struct SubtaskProblem {
  const WorldGraph* graph = nullptr;
  std::vector<AgentSpec> agents;
  std::vector<AgentState> starts;
  Task task;
  /// Per agent, the plan segments committed by earlier subtasks.
  PlanSegments past;
  /// Return that counts as optimal for this subtask.
  double target = 0;
};

struct PoppedNode {
  double value = 0;
  bool root = false;
};

struct SubtaskResult {
  SolveStatus status = SolveStatus::Unsolvable;
  Solution solution;
  Assignment assignment;
  GoalBounds bounds;
  double value = 0;
  Timestep cost = 0;
  SearchStats stats;
  std::vector<PoppedNode> pops;
  /// Goals the returned plan leaves out, with the timings at which they are
  /// taken to fail. Empty unless the full goal set was unsolvable.
  std::map<GoalId, GoalTiming> dropped;
};

/// Subset search after an unsolvable full goal set is skipped above this many
/// bomb units.
inline constexpr std::size_t kMaxDropUnits = 16;
/// Forfeit combinations tried per subset.
inline constexpr std::size_t kMaxForfeitVariants = 64;

namespace detail {

struct CTNode {
  std::shared_ptr<const Assignment> assignment;
  std::vector<std::shared_ptr<const PathConstraintSet>> constraints;
  Solution solution;
  double value = 0;
  Timestep cost = 0;
  std::vector<Conflict> conflicts;
  std::uint64_t serial = 0;
  bool root = false;
};

/// Max-heap order: higher return, then lower cost, fewer conflicts, older.
inline bool pops_after(const std::unique_ptr<CTNode>& a, const std::unique_ptr<CTNode>& b) {
  if (a->value != b->value) return a->value < b->value;
  if (a->cost != b->cost) return a->cost > b->cost;
  if (a->conflicts.size() != b->conflicts.size()) return a->conflicts.size() > b->conflicts.size();
  return a->serial > b->serial;
}

inline GoalBounds merged_bounds(const std::vector<std::shared_ptr<const PathConstraintSet>>& cs) {
  GoalBounds out;
  const Interval unbounded{};
  for (const auto& c : cs)
    for (const auto& [p, iv] : c->goal_bounds.entries()) {
      if (iv.lower != unbounded.lower) out.tighten_lower(p, iv.lower);
      if (iv.upper != unbounded.upper) out.tighten_upper(p, iv.upper);
    }
  return out;
}

inline PlanSegments with_candidate(const PlanSegments& past, const Solution& sol) {
  PlanSegments out(sol.size());
  for (std::size_t a = 0; a < sol.size(); ++a) {
    if (a < past.size()) out[a] = past[a];
    out[a].push_back(sol[a].get());
  }
  return out;
}

class Clock {
 public:
  explicit Clock(double budget_seconds)
      : start_(std::chrono::steady_clock::now()), budget_(budget_seconds) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool expired() const { return elapsed() >= budget_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double budget_;
};


/// One constraint-tree search over `task`, accepting the first node whose
/// return reaches `accept`.
template <ReturnOracle Oracle>
SubtaskResult search(const SubtaskProblem& problem, const Task& task, const Oracle& oracle,
                     const SolverOptions& options, double accept, const Clock& clock) {
  const WorldGraph& graph = *problem.graph;
  const bool ptc = options.kind == SolverKind::CbsTaPtc;
  const ConflictOptions conflict_options{options.collision_checking};
  const std::size_t n_agents = problem.agents.size();

  SubtaskResult result;
  std::vector<GoalId> subtask_goals;
  for (const auto& g : task.goals) subtask_goals.push_back(g.id);

  const auto evaluate = [&](CTNode& node) {
    const Evaluation ev = oracle.evaluate(with_candidate(problem.past, node.solution));
    node.value = ev.value;
    node.cost = sum_of_path_costs(node.solution);
    if (ptc) {
      node.conflicts = detect_conflicts(node.solution, task, conflict_options);
      return;
    }
    // Baseline: collisions plus explosions of this subtask's bombs.
    node.conflicts = detect_conflicts(node.solution, Task{}, conflict_options);
    for (const auto& f : ev.failures) {
      const bool ours = std::any_of(f.goals.begin(), f.goals.end(), [&](GoalId g) {
        return std::find(subtask_goals.begin(), subtask_goals.end(), g) != subtask_goals.end();
      });
      if (!ours) continue;
      Conflict c;
      c.kind = ConflictKind::Explosion;
      c.time = f.time;
      c.goals = f.goals;
      node.conflicts.push_back(std::move(c));
    }
    std::stable_sort(node.conflicts.begin(), node.conflicts.end(),
                     [](const Conflict& x, const Conflict& y) { return x.time < y.time; });
  };

  std::unique_ptr<CTNode> best;
  const auto consider = [&](const CTNode& node) {
    if (!best || node.value > best->value || (node.value == best->value && node.cost < best->cost))
      best = std::make_unique<CTNode>(node);
  };
  const auto finish = [&](SolveStatus status) {
    result.status = status;
    if (best) {
      result.solution = best->solution;
      result.assignment = *best->assignment;
      result.bounds = merged_bounds(best->constraints);
      result.value = best->value;
      result.cost = best->cost;
    } else {
      // No plannable assignment: every agent stays where it is.
      result.solution.resize(n_agents);
      result.assignment.sequences.assign(n_agents, {});
      for (std::size_t a = 0; a < n_agents; ++a)
        result.solution[a] = std::make_shared<const TimedPath>(
            TimedPath{problem.starts[a].time, {problem.starts[a].vertex}, {}});
      result.value = oracle.evaluate(with_candidate(problem.past, result.solution)).value;
      result.cost = 0;
    }
    result.stats.seconds = clock.elapsed();
    return std::move(result);
  };

  const OrderPolicy policy = options.order_policy.value_or(OrderPolicy::TaskOrder);
  AssignmentEnumerator enumerator(task, problem.agents, policy, options.limits);
  const auto empty_constraints = std::make_shared<const PathConstraintSet>();
  const std::vector<std::shared_ptr<const PathConstraintSet>> root_constraints(n_agents, empty_constraints);
  const std::vector<PathConstraintSet> root_sets(n_agents);

  std::vector<std::unique_ptr<CTNode>> open;
  std::uint64_t serial = 0;

  // Root phase: plan and score every assignment, in batches.
  const std::size_t batch_size = static_cast<std::size_t>(options.parallel_roots) * 8;
  for (bool more = true; more;) {
    if (clock.expired()) return finish(SolveStatus::Timeout);
    std::vector<Assignment> batch;
    while (batch.size() < batch_size) {
      auto a = enumerator.next();
      if (!a) {
        more = false;
        break;
      }
      batch.push_back(std::move(*a));
    }
    if (options.limits.max_assignments > 0 &&
        result.stats.roots_enumerated + batch.size() > options.limits.max_assignments)
      throw ConfigError("assignment enumeration exceeds " + std::to_string(options.limits.max_assignments));

    struct RootEval {
      std::unique_ptr<CTNode> node;
      bool feasible = true;
    };
    std::vector<RootEval> evals(batch.size());
    const auto work = [&](std::size_t i) {
      auto sol = plan_solution(graph, problem.starts, task, batch[i], root_sets);
      if (!sol) return;
      auto node = std::make_unique<CTNode>();
      node->assignment = std::make_shared<const Assignment>(std::move(batch[i]));
      node->constraints = root_constraints;
      node->solution = std::move(*sol);
      node->root = true;
      evaluate(*node);
      if (ptc)
        evals[i].feasible =
            check_feasible(build_system(task, *node->assignment, GoalBounds{}, graph, problem.starts));
      evals[i].node = std::move(node);
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.parallel_roots), batch.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < batch.size(); ++i) work(i);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < batch.size(); i += workers) work(i);
        });
      for (auto& th : pool) th.join();
    }

    for (auto& e : evals) {
      ++result.stats.roots_enumerated;
      result.stats.low_level_calls += n_agents;
      if (!e.node) {
        ++result.stats.roots_pruned;
        continue;
      }
      e.node->serial = serial++;
      consider(*e.node);
      if (e.node->value >= accept) return finish(SolveStatus::Optimal);
      if (!e.feasible) {
        ++result.stats.roots_pruned;
        continue;
      }
      open.push_back(std::move(e.node));
      std::push_heap(open.begin(), open.end(), pops_after);
    }
  }

  // Expansion phase.
  while (!open.empty()) {
    if (clock.expired() || result.stats.nodes_expanded >= options.max_expansions)
      return finish(SolveStatus::Timeout);
    std::pop_heap(open.begin(), open.end(), pops_after);
    std::unique_ptr<CTNode> node = std::move(open.back());
    open.pop_back();
    if (options.record_pops) result.pops.push_back({node->value, node->root});
    if (node->value >= accept) {
      best = std::move(node);
      return finish(SolveStatus::Optimal);
    }
    ++result.stats.nodes_expanded;
    if (node->conflicts.empty()) continue;

    const Conflict& conflict = node->conflicts.front();
    std::vector<VertexId> positions;
    if (conflict.kind == ConflictKind::Explosion)
      for (const auto& p : node->solution)
        positions.push_back(p && p->start_time <= conflict.time ? p->vertex_at(conflict.time) : -1);

    for (const Branch& branch : resolve_conflict(conflict, *node->assignment, positions)) {
      auto child = std::make_unique<CTNode>();
      child->assignment = node->assignment;
      child->constraints = node->constraints;
      std::vector<std::shared_ptr<PathConstraintSet>> touched(n_agents);
      const auto edit = [&](AgentId a) -> PathConstraintSet& {
        if (!touched[a]) {
          touched[a] = std::make_shared<PathConstraintSet>(*child->constraints[a]);
          child->constraints[a] = touched[a];
        }
        return *touched[a];
      };
      for (const auto& b : branch.bounds) {
        const AgentId owner = *node->assignment->agent_of(b.point.goal);
        if (b.side == BoundUpdate::Side::Lower) edit(owner).goal_bounds.tighten_lower(b.point, b.value);
        else edit(owner).goal_bounds.tighten_upper(b.point, b.value);
      }
      for (const auto& [v, t] : branch.vertex_forbids) edit(branch.agent).forbid_vertex(v, t);
      for (const auto& [u, v, t] : branch.edge_forbids) edit(branch.agent).forbid_edge(u, v, t);

      if (ptc && !check_feasible(build_system(task, *child->assignment,
                                              merged_bounds(child->constraints), graph,
                                              problem.starts))) {
        ++result.stats.nodes_pruned;
        continue;
      }
      ++result.stats.low_level_calls;
      const auto seq = goal_sequence(task, child->assignment->sequences[branch.agent]);
      auto path = mla_star(graph, problem.starts[branch.agent], seq, *child->constraints[branch.agent],
                           task.horizon);
      if (!path) {
        ++result.stats.nodes_pruned;
        continue;
      }
      child->solution = node->solution;
      child->solution[branch.agent] = std::make_shared<const TimedPath>(std::move(*path));
      evaluate(*child);
      child->serial = serial++;
      ++result.stats.nodes_generated;
      consider(*child);
      open.push_back(std::move(child));
      std::push_heap(open.begin(), open.end(), pops_after);
    }
  }
  return finish(SolveStatus::Unsolvable);
}

}  // namespace detail

/// Constraint-tree search over every root assignment of one subtask.
///
/// Nodes are ordered by oracle return; the first node reaching
/// `epsilon * problem.target` is returned. When the full goal set is
/// unsolvable, subsets of its bombs are searched in descending order of
/// attainable return, the left-out bombs failing at their latest time.
/// Otherwise the best node seen is returned with status Unsolvable (search
/// exhausted) or Timeout.
template <ReturnOracle Oracle>
SubtaskResult solve_subtask(const SubtaskProblem& problem, const Oracle& oracle,
                            const SolverOptions& options) {
  validate_options(options);
  if (!problem.graph) throw ConfigError("subtask has no graph");
  if (problem.starts.size() != problem.agents.size())
    throw InputError("start states and agents differ in count");

  const detail::Clock clock(options.timeout_seconds);
  const double accept = options.epsilon * problem.target;
  SubtaskResult best = detail::search(problem, problem.task, oracle, options, accept, clock);
  const auto units = goal_units(problem.task);
  if (best.status != SolveStatus::Unsolvable || units.size() < 2 || units.size() > kMaxDropUnits) return best;

  std::vector<GoalId> all;
  for (const auto& g : problem.task.goals) all.push_back(g.id);
  const double base = problem.target - oracle.reward_bound(all);
  struct Subset {
    std::uint32_t mask;
    double target;
  };
  std::vector<Subset> subsets;
  const std::uint32_t full = (std::uint32_t{1} << units.size()) - 1;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    std::vector<GoalId> kept;
    for (std::size_t u = 0; u < units.size(); ++u)
      if (mask >> u & 1U) kept.insert(kept.end(), units[u].begin(), units[u].end());
    subsets.push_back({mask, base + oracle.reward_bound(kept)});
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const Subset& x, const Subset& y) { return x.target > y.target; });

  SearchStats stats = best.stats;
  std::vector<PoppedNode> pops = std::move(best.pops);
  SolveStatus status = SolveStatus::Unsolvable;
  const auto differences = task_differences(problem.task);
  for (const Subset& subset : subsets) {
    if (subset.target <= best.value || status != SolveStatus::Unsolvable) break;
    std::vector<GoalId> kept, left_out;
    std::vector<std::size_t> dropped_units;
    for (std::size_t u = 0; u < units.size(); ++u) {
      const bool keep = subset.mask >> u & 1U;
      auto& into = keep ? kept : left_out;
      into.insert(into.end(), units[u].begin(), units[u].end());
      if (!keep) dropped_units.push_back(u);
    }
    const auto is_kept = [&](GoalId g) { return std::find(kept.begin(), kept.end(), g) != kept.end(); };

    // A dropped unit that kept goals wait on may instead be forfeited early.
    std::vector<std::pair<std::size_t, std::vector<Goal>>> forfeitable;
    if constexpr (ForfeitOracle<Oracle>) {
      for (std::size_t u : dropped_units) {
        const auto& unit = units[u];
        const bool released = std::any_of(differences.begin(), differences.end(), [&](const DifferenceConstraint& d) {
          return d.x && d.y && std::find(unit.begin(), unit.end(), d.x->goal) != unit.end() && is_kept(d.y->goal);
        });
        if (!released) continue;
        auto goals = oracle.forfeit_goals(unit);
        if (!goals.empty()) forfeitable.emplace_back(u, std::move(goals));
      }
    }

    // Variants in mixed radix: digit 0 lets the unit fail on its own.
    std::vector<std::size_t> choice(forfeitable.size(), 0);
    for (std::size_t variant = 0; variant < kMaxForfeitVariants; ++variant) {
      if (clock.expired()) {
        status = SolveStatus::Timeout;
        break;
      }
      Task augmented = problem.task;
      std::vector<GoalId> targets = kept;
      auto dropped = failure_timings(problem.task, left_out);
      std::vector<std::pair<std::size_t, GoalId>> forfeits;
      for (std::size_t i = 0; i < forfeitable.size(); ++i) {
        if (choice[i] == 0) continue;
        const auto& unit = units[forfeitable[i].first];
        const Goal& f = forfeitable[i].second[choice[i] - 1];
        augmented.goals.push_back(f);
        augmented.abs_constraints.push_back(
            {tau(f.id), 0, detail::static_bounds(problem.task, tau(unit.back())).upper});
        for (auto& c : augmented.prec_constraints)
          if (std::find(unit.begin(), unit.end(), c.earlier.goal) != unit.end() && is_kept(c.later.goal))
            c.earlier = tau(f.id);
        targets.push_back(f.id);
        forfeits.emplace_back(forfeitable[i].first, f.id);
      }
      const Task reduced = bind_subtask(augmented, targets, {}, dropped);
      SubtaskResult r =
          detail::search(problem, reduced, oracle, options, std::min(subset.target, accept), clock);
      stats += r.stats;
      const bool timed_out = r.status == SolveStatus::Timeout;
      if (r.value > best.value || (r.value == best.value && r.cost < best.cost)) {
        for (const auto& [u, id] : forfeits)
          for (const auto& p : r.solution)
            if (const auto gt = p->timing(id))
              for (GoalId g : units[u]) dropped[g] = {g, gt->exec, gt->done};
        best = std::move(r);
        best.dropped = std::move(dropped);
      }
      if (timed_out) status = SolveStatus::Timeout;
      else if (best.value >= accept) status = SolveStatus::Optimal;
      if (status != SolveStatus::Unsolvable || best.value >= subset.target) break;

      std::size_t digit = 0;
      while (digit < choice.size() && ++choice[digit] > forfeitable[digit].second.size()) choice[digit++] = 0;
      if (digit == choice.size()) break;
    }
    if (best.value >= subset.target) break;
  }
  if (best.value >= accept) status = SolveStatus::Optimal;
  best.status = status;
  best.stats = stats;
  best.stats.seconds = clock.elapsed();
  best.pops = std::move(pops);
  return best;
}

}  // namespace tapf
