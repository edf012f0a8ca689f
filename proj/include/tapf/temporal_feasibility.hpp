#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tapf/assignment.hpp"
#include "tapf/task.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

/// Difference constraints `value(x) - value(y) <= bound` over goal time points
/// plus a zero origin (variable 0).
class DifferenceSystem {
 public:
  struct Row {
    int x = 0;
    int y = 0;
    std::int64_t bound = 0;
  };

  static constexpr int kOrigin = 0;

  DifferenceSystem() : names_{"0"} {}

  int add_variable(TimePoint p) {
    auto [it, inserted] = index_.emplace(p, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(to_string(p));
    return it->second;
  }

  /// Anonymous variable (used by randomized tests).
  int add_variable() {
    names_.push_back("x" + std::to_string(names_.size()));
    return static_cast<int>(names_.size()) - 1;
  }

  int variable(TimePoint p) const {
    auto it = index_.find(p);
    if (it == index_.end()) throw InputError("no schedule variable " + to_string(p));
    return it->second;
  }
  bool has_variable(TimePoint p) const { return index_.count(p) != 0; }

  void add(int x, int y, std::int64_t bound) { rows_.push_back({x, y, bound}); }
  void add_lower(int x, std::int64_t v) { add(kOrigin, x, -v); }
  void add_upper(int x, std::int64_t v) { add(x, kOrigin, v); }

  int variable_count() const { return static_cast<int>(names_.size()); }
  const std::vector<Row>& rows() const { return rows_; }
  const std::string& name(int v) const { return names_.at(v); }

  /// Edge-list dump: one `y -> x bound` line per constraint.
  void dump(std::ostream& os) const {
    os << "# difference system: " << variable_count() << " variables, " << rows_.size()
       << " constraints (x - y <= c as edge y -> x weight c)\n";
    for (const auto& r : rows_) os << names_[r.y] << " -> " << names_[r.x] << ' ' << r.bound << '\n';
  }

 private:
  std::map<TimePoint, int> index_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
};

/// Schedule constraints a constraint-tree node implies before any path is
/// planned: durations, movement lower bounds along each agent's goal chain,
/// task constraints, the node's goal bounds and the horizon.
inline DifferenceSystem build_system(const Task& task, const Assignment& assignment,
                                     const GoalBounds& bounds, const WorldGraph& graph,
                                     std::span<const AgentState> starts) {
  DifferenceSystem sys;
  for (const auto& g : task.goals) {
    const int m = sys.add_variable(mu(g.id));
    const int t = sys.add_variable(tau(g.id));
    sys.add(t, m, g.duration);
    sys.add(m, t, -g.duration);
    sys.add_lower(m, 0);
    sys.add_upper(t, task.horizon);
  }

  for (std::size_t a = 0; a < assignment.sequences.size(); ++a) {
    const auto& seq = assignment.sequences[a];
    if (seq.empty()) continue;
    const AgentState& s = starts[a];
    const Goal* prev = nullptr;
    for (GoalId id : seq) {
      const Goal& g = task.goal(id);
      const int m = sys.variable(mu(id));
      if (!prev)
        sys.add_lower(m, static_cast<std::int64_t>(s.time) + graph.shortest_dist(s.vertex, g.vertex));
      else
        sys.add(sys.variable(tau(prev->id)), m, -graph.shortest_dist(prev->vertex, g.vertex));
      prev = &g;
    }
  }

  const auto var = [&](const std::optional<TimePoint>& p) {
    return p ? sys.variable(*p) : DifferenceSystem::kOrigin;
  };
  for (const auto& d : task_differences(task)) sys.add(var(d.x), var(d.y), d.bound);

  const Interval unbounded{};
  for (const auto& [p, iv] : bounds.entries()) {
    if (!sys.has_variable(p)) continue;
    if (iv.lower != unbounded.lower) sys.add_lower(sys.variable(p), iv.lower);
    if (iv.upper != unbounded.upper) sys.add_upper(sys.variable(p), iv.upper);
  }
  return sys;
}

/// True iff the system has an integer solution, i.e. its constraint graph
/// (edge y -> x with weight c for every x - y <= c) has no negative cycle.
/// Bellman-Ford from a virtual source connected to every variable.
inline bool check_feasible(const DifferenceSystem& sys) {
  const int n = sys.variable_count();
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n), 0);
  for (int round = 0; round < n; ++round) {
    bool changed = false;
    for (const auto& r : sys.rows()) {
      if (dist[r.y] + r.bound < dist[r.x]) {
        dist[r.x] = dist[r.y] + r.bound;
        changed = true;
      }
    }
    if (!changed) return true;
  }
  for (const auto& r : sys.rows())
    if (dist[r.y] + r.bound < dist[r.x]) return false;
  return true;
}

}  // namespace tapf
