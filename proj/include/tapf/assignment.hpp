#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tapf/task.hpp"

namespace tapf {

/// Per-agent ordered goal sequences; equivalently the binary N x M matrix E.
struct Assignment {
  std::vector<std::vector<GoalId>> sequences;

  std::size_t agent_count() const { return sequences.size(); }

  std::optional<AgentId> agent_of(GoalId g) const {
    for (std::size_t a = 0; a < sequences.size(); ++a)
      if (std::find(sequences[a].begin(), sequences[a].end(), g) != sequences[a].end())
        return static_cast<AgentId>(a);
    return std::nullopt;
  }

  /// E[i][j] = 1 iff goal `goal_order[j]` is assigned to agent i.
  std::vector<std::vector<int>> matrix(std::span<const GoalId> goal_order) const {
    std::vector<std::vector<int>> e(sequences.size(), std::vector<int>(goal_order.size(), 0));
    for (std::size_t j = 0; j < goal_order.size(); ++j)
      if (auto a = agent_of(goal_order[j])) e[*a][j] = 1;
    return e;
  }

  auto operator<=>(const Assignment&) const = default;
};

enum class OrderPolicy {
  /// Each agent visits its goals in the task's goal order.
  TaskOrder,
  /// Every per-agent ordering that does not contradict a precedence
  /// constraint between two goals held by the same agent.
  AllConsistentOrders,
};

struct EnumerationLimits {
  std::size_t max_goals = 12;
  std::size_t max_assignments = 2'000'000;
};

/// Lazy enumeration of capability-respecting goal-to-agent mappings.
///
/// Goals are taken in task order; the first goal varies slowest. Each mapping
/// is yielded exactly once, then (under AllConsistentOrders) expanded into
/// every admissible per-agent ordering in lexicographic order.
class AssignmentEnumerator {
 public:
  AssignmentEnumerator(const Task& task, std::span<const AgentSpec> agents,
                       OrderPolicy policy = OrderPolicy::TaskOrder,
                       EnumerationLimits limits = {})
      : policy_(policy), agent_count_(agents.size()) {
    if (task.goals.size() > limits.max_goals)
      throw ConfigError("subtask has " + std::to_string(task.goals.size()) +
                        " goals; enumeration guard is " + std::to_string(limits.max_goals));
    for (const auto& g : task.goals) {
      goals_.push_back(g.id);
      std::vector<AgentId> capable;
      for (std::size_t a = 0; a < agents.size(); ++a)
        if (agents[a].can_perform(g.action)) capable.push_back(static_cast<AgentId>(a));
      if (capable.empty()) exhausted_ = true;
      choices_.push_back(std::move(capable));
    }
    for (const auto& p : task.prec_constraints) before_.emplace(p.earlier.goal, p.later.goal);
    digits_.assign(goals_.size(), 0);
  }

  std::optional<Assignment> next() {
    while (true) {
      if (ordering_) {
        auto out = build_ordered();
        advance_orders();
        return out;
      }
      if (exhausted_) return std::nullopt;
      Assignment base = current_base();
      advance_base();
      if (policy_ == OrderPolicy::TaskOrder) return base;
      start_orders(std::move(base));
    }
  }

  std::vector<Assignment> all() {
    std::vector<Assignment> out;
    while (auto a = next()) out.push_back(std::move(*a));
    return out;
  }

 private:
  Assignment current_base() const {
    Assignment a;
    a.sequences.resize(agent_count_);
    for (std::size_t j = 0; j < goals_.size(); ++j)
      a.sequences[choices_[j][digits_[j]]].push_back(goals_[j]);
    return a;
  }

  void advance_base() {
    for (std::size_t j = goals_.size(); j-- > 0;) {
      if (++digits_[j] < choices_[j].size()) return;
      digits_[j] = 0;
    }
    exhausted_ = true;
  }

  // Per-agent permutations are tracked as index vectors into the base
  // sequence; std::next_permutation walks them lexicographically.
  void start_orders(Assignment base) {
    base_ = std::move(base);
    perm_.assign(base_.sequences.size(), {});
    for (std::size_t a = 0; a < base_.sequences.size(); ++a) {
      perm_[a].resize(base_.sequences[a].size());
      for (std::size_t i = 0; i < perm_[a].size(); ++i) perm_[a][i] = i;
    }
    ordering_ = true;
    if (!all_consistent()) advance_orders();
  }

  bool consistent(std::size_t a) const {
    const auto& seq = base_.sequences[a];
    const auto& p = perm_[a];
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t k = i + 1; k < p.size(); ++k)
        if (before_.count({seq[p[k]], seq[p[i]]})) return false;
    return true;
  }

  bool all_consistent() const {
    for (std::size_t a = 0; a < perm_.size(); ++a)
      if (!consistent(a)) return false;
    return true;
  }

  void advance_orders() {
    while (true) {
      std::size_t a = perm_.size();
      bool carried_out = true;
      while (a-- > 0) {
        if (std::next_permutation(perm_[a].begin(), perm_[a].end())) {
          carried_out = false;
          break;
        }
      }
      if (carried_out) {
        ordering_ = false;
        return;
      }
      if (all_consistent()) return;
    }
  }

  Assignment build_ordered() const {
    Assignment out;
    out.sequences.resize(base_.sequences.size());
    for (std::size_t a = 0; a < base_.sequences.size(); ++a)
      for (std::size_t i : perm_[a]) out.sequences[a].push_back(base_.sequences[a][i]);
    return out;
  }

  OrderPolicy policy_;
  std::size_t agent_count_;
  std::vector<GoalId> goals_;
  std::vector<std::vector<AgentId>> choices_;
  std::vector<std::size_t> digits_;
  std::set<std::pair<GoalId, GoalId>> before_;
  bool exhausted_ = false;

  Assignment base_;
  std::vector<std::vector<std::size_t>> perm_;
  bool ordering_ = false;
};

inline std::vector<Assignment> enumerate_assignments(const Task& task,
                                                     std::span<const AgentSpec> agents,
                                                     OrderPolicy policy = OrderPolicy::TaskOrder,
                                                     EnumerationLimits limits = {}) {
  AssignmentEnumerator e(task, agents, policy, limits);
  std::vector<Assignment> out;
  while (auto a = e.next()) {
    out.push_back(std::move(*a));
    if (out.size() > limits.max_assignments)
      throw ConfigError("assignment enumeration exceeds " + std::to_string(limits.max_assignments));
  }
  return out;
}

}  // namespace tapf
