#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tapf/error.hpp"
#include "tapf/task.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

/// Team reward per wire of a fully defused bomb.
inline constexpr double kRewardPerWire = 10.0;

/// Duration of a single defusing step, in timesteps.
inline constexpr Timestep kDefuseDuration = 1;

inline bool is_color(char c) { return c == 'R' || c == 'G' || c == 'B'; }

inline std::string cut_action(char color) { return std::string("cut-") + color; }

/// Colour of a cut action tag ("cut-R" -> 'R'), or 0.
inline char cut_color(const std::string& action) {
  return action.size() == 5 && action.rfind("cut-", 0) == 0 && is_color(action[4]) ? action[4] : 0;
}

inline int color_index(char c) { return c == 'R' ? 0 : c == 'G' ? 1 : 2; }

struct BombSpec {
  int id = 0;
  VertexId vertex = 0;
  std::string sequence;  // e.g. "RGB"
  double fuse_seconds = 0;
  double countdown_seconds = 0;
  std::optional<int> depends_on;

  bool operator==(const BombSpec&) const = default;
};

/// Agent definition in instance files: start vertex and wire-cutter colours.
struct AgentDef {
  VertexId start = 0;
  std::string tools;  // e.g. "RG"
  bool operator==(const AgentDef&) const = default;
};

struct InstanceSpec {
  WorldGraph graph;
  std::vector<AgentDef> agents;
  std::vector<BombSpec> bombs;
  double mission_length_seconds = 900;
  double seconds_per_timestep = 1;
};

/// Conservative conversion: a real-time deadline never gains a timestep.
inline Timestep to_timesteps(double seconds, double seconds_per_timestep) {
  return static_cast<Timestep>(std::floor(seconds / seconds_per_timestep + 1e-9));
}

inline std::vector<AgentSpec> agent_specs(const InstanceSpec& inst) {
  std::vector<AgentSpec> out;
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    AgentSpec a{static_cast<AgentId>(i), inst.agents[i].start, {}};
    for (char c : inst.agents[i].tools) a.capabilities.push_back(cut_action(c));
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<AgentState> initial_states(const InstanceSpec& inst) {
  std::vector<AgentState> out;
  for (const auto& a : inst.agents) out.push_back({a.start, 0});
  return out;
}

/// Throws InputError describing the first problem found.
inline void validate_instance(const InstanceSpec& inst) {
  const auto fail = [](const std::string& msg) { throw InputError("invalid instance: " + msg); };
  if (inst.graph.vertex_count() < 1) fail("empty graph");
  if (!(inst.seconds_per_timestep > 0)) fail("seconds_per_timestep must be positive");
  if (!(inst.mission_length_seconds > 0)) fail("mission length must be positive");
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const auto& a = inst.agents[i];
    if (!inst.graph.valid(a.start)) fail("agent " + std::to_string(i) + " starts off the graph");
    if (a.tools.empty()) fail("agent " + std::to_string(i) + " has no tools");
    for (std::size_t k = 0; k < a.tools.size(); ++k)
      if (!is_color(a.tools[k]) || a.tools.find(a.tools[k]) != k)
        fail("agent " + std::to_string(i) + " has malformed tools '" + a.tools + "'");
  }
  std::vector<int> dependents(inst.bombs.size(), 0);
  for (std::size_t i = 0; i < inst.bombs.size(); ++i) {
    const auto& b = inst.bombs[i];
    const std::string who = "bomb " + std::to_string(i);
    if (b.id != static_cast<int>(i)) fail(who + " has id " + std::to_string(b.id));
    if (!inst.graph.valid(b.vertex)) fail(who + " sits off the graph");
    if (b.sequence.empty() || b.sequence.size() > 3) fail(who + " sequence length outside [1, 3]");
    for (std::size_t k = 0; k < b.sequence.size(); ++k)
      if (!is_color(b.sequence[k]) || b.sequence.find(b.sequence[k]) != k)
        fail(who + " has malformed sequence '" + b.sequence + "'");
    if (!(b.fuse_seconds > 0)) fail(who + " fuse must be positive");
    if (!(b.countdown_seconds > 0)) fail(who + " countdown must be positive");
    if (b.depends_on) {
      const int p = *b.depends_on;
      if (p < 0 || p >= static_cast<int>(inst.bombs.size()) || p == b.id)
        fail(who + " depends on invalid bomb " + std::to_string(p));
      if (++dependents[p] > 1) fail("bomb " + std::to_string(p) + " has two dependents");
    }
  }
  // Chains only: walking prerequisites must terminate.
  for (std::size_t i = 0; i < inst.bombs.size(); ++i) {
    std::size_t steps = 0;
    for (auto at = inst.bombs[i].depends_on; at; at = inst.bombs[*at].depends_on)
      if (++steps > inst.bombs.size()) fail("dependency cycle through bomb " + std::to_string(i));
  }
}

inline double max_return(const InstanceSpec& inst) {
  double total = 0;
  for (const auto& b : inst.bombs) total += kRewardPerWire * static_cast<double>(b.sequence.size());
  return total;
}

/// Goal ids of each bomb's cuts, in cut order.
inline std::vector<std::vector<GoalId>> bomb_goals(const Task& task, std::size_t bomb_count) {
  std::vector<std::vector<GoalId>> out(bomb_count);
  for (const auto& g : task.goals)
    if (g.bomb && g.bomb->bomb >= 0 && static_cast<std::size_t>(g.bomb->bomb) < bomb_count) {
      auto& v = out[g.bomb->bomb];
      if (g.bomb->position < 0) continue;
      if (v.size() <= static_cast<std::size_t>(g.bomb->position)) v.resize(g.bomb->position + 1, -1);
      v[g.bomb->position] = g.id;
    }
  return out;
}

/// Turns a bomb-defusing instance into goals and temporal constraints:
/// one cut goal per wire, strict precedence and a countdown window between
/// consecutive cuts, the fuse as an absolute range on the last cut, and
/// strict precedence from a prerequisite's last cut to its dependent's first.
inline Task compile_bomb_task(const InstanceSpec& inst) {
  validate_instance(inst);
  const double spt = inst.seconds_per_timestep;
  Task task;
  task.horizon = to_timesteps(inst.mission_length_seconds, spt);
  if (task.horizon <= 0) throw CompileError("mission length rounds to zero timesteps");

  std::vector<GoalId> first(inst.bombs.size()), last(inst.bombs.size());
  GoalId next = 0;
  for (const auto& b : inst.bombs) {
    const Timestep fuse = to_timesteps(b.fuse_seconds, spt);
    const Timestep countdown = to_timesteps(b.countdown_seconds, spt);
    if (fuse <= 0)
      throw CompileError("bomb " + std::to_string(b.id) + " fuse rounds to zero timesteps");
    if (countdown <= 0)
      throw CompileError("bomb " + std::to_string(b.id) + " countdown rounds to zero timesteps");
    first[b.id] = next;
    for (std::size_t k = 0; k < b.sequence.size(); ++k) {
      const GoalId id = next++;
      task.goals.push_back(
          {id, b.vertex, cut_action(b.sequence[k]), kDefuseDuration, BombTag{b.id, static_cast<int>(k)}});
      if (k > 0) {
        task.prec_constraints.push_back({tau(id - 1), mu(id)});
        task.inter_constraints.push_back({tau(id - 1), tau(id), countdown});
      }
    }
    last[b.id] = next - 1;
    task.abs_constraints.push_back({tau(last[b.id]), 0, std::min(fuse, task.horizon)});
  }
  for (const auto& b : inst.bombs)
    if (b.depends_on) task.prec_constraints.push_back({tau(last[*b.depends_on]), mu(first[b.id])});
  return task;
}

/// A deliberate wrong-colour cut that explodes a bomb at once, so that its
/// dependent unblocks before the fuse runs out. Spoil goals are not part of
/// the compiled task; their ids follow its goals, three per bomb, and carry
/// wire position -1.
inline Goal spoil_goal(const Task& compiled, int bomb, VertexId vertex, char color) {
  const auto id = static_cast<GoalId>(compiled.goals.size()) + 3 * bomb + color_index(color);
  return {id, vertex, cut_action(color), kDefuseDuration, BombTag{bomb, -1}};
}

/// The spoil goal with this id, if it is one.
inline std::optional<Goal> spoil_goal(const Task& compiled, GoalId id) {
  const auto base = static_cast<GoalId>(compiled.goals.size());
  if (id < base) return std::nullopt;
  const int bomb = (id - base) / 3;
  for (const auto& g : compiled.goals)
    if (g.bomb && g.bomb->bomb == bomb) return spoil_goal(compiled, bomb, g.vertex, "RGB"[(id - base) % 3]);
  return std::nullopt;
}

}  // namespace tapf
