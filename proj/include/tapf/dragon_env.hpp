#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tapf/bomb_instance.hpp"
#include "tapf/error.hpp"
#include "tapf/mla_star.hpp"
#include "tapf/oracle.hpp"
#include "tapf/task.hpp"

namespace tapf {

enum class BombStatus : std::uint8_t { Blocked, Active, InProgress, Defused, Exploded };

inline const char* to_string(BombStatus s) {
  switch (s) {
    case BombStatus::Blocked: return "blocked";
    case BombStatus::Active: return "active";
    case BombStatus::InProgress: return "in-progress";
    case BombStatus::Defused: return "defused";
    case BombStatus::Exploded: return "exploded";
  }
  return "?";
}

struct BombState {
  BombStatus status = BombStatus::Active;
  int cut = 0;                  // wires removed so far
  Timestep deadline = 0;        // countdown: next cut must complete by this
  Timestep last_completion = -1;
  Timestep resolved_at = -1;    // defused or exploded

  bool resolved() const { return status == BombStatus::Defused || status == BombStatus::Exploded; }
  bool operator==(const BombState&) const = default;
};

struct EpisodeState {
  Timestep time = 0;
  std::vector<VertexId> agents;
  std::vector<BombState> bombs;
  double reward = 0;

  bool operator==(const EpisodeState&) const = default;
};

struct AgentAction {
  enum class Kind : std::uint8_t { Wait, Move, Cut } kind = Kind::Wait;
  VertexId target = 0;  // Move
  int bomb = 0;         // Cut
  char color = 0;       // Cut

  static AgentAction wait() { return {}; }
  static AgentAction move(VertexId v) { return {Kind::Move, v, 0, 0}; }
  static AgentAction cut(int bomb, char color) { return {Kind::Cut, 0, bomb, color}; }
  bool operator==(const AgentAction&) const = default;
};

using JointAction = std::vector<AgentAction>;

inline std::string to_string(const AgentAction& a) {
  switch (a.kind) {
    case AgentAction::Kind::Wait: return "wait";
    case AgentAction::Kind::Move: return "move " + std::to_string(a.target);
    case AgentAction::Kind::Cut: return "cut " + std::to_string(a.bomb) + " " + std::string(1, a.color);
  }
  return "?";
}

inline AgentAction parse_action(const std::string& text) {
  if (text == "wait") return AgentAction::wait();
  try {
    if (text.rfind("move ", 0) == 0) {
      std::size_t used = 0;
      const int v = std::stoi(text.substr(5), &used);
      if (used + 5 == text.size()) return AgentAction::move(v);
    } else if (text.rfind("cut ", 0) == 0) {
      const auto space = text.find(' ', 4);
      if (space != std::string::npos && space + 2 == text.size() && is_color(text.back())) {
        std::size_t used = 0;
        const int b = std::stoi(text.substr(4, space - 4), &used);
        if (used == space - 4) return AgentAction::cut(b, text.back());
      }
    }
  } catch (const std::exception&) {
  }
  throw InputError("malformed action '" + text + "'");
}

struct BombEvent {
  enum class Kind : std::uint8_t { Defused, Exploded } kind = Kind::Exploded;
  int bomb = 0;
  Timestep time = 0;  // step at which the cause happened
  std::string reason;
};

struct StepResult {
  EpisodeState state;
  double reward = 0;
  bool done = false;
  std::vector<BombEvent> events;
};

/// Deterministic bomb-defusing episode dynamics.
///
/// A cut issued at step t completes at t + 1. Cuts are checked against the
/// pre-step state. A bomb explodes on a wrong colour, on a cut while blocked,
/// on a cut issued at the same timestep its previous cut completed, when its
/// countdown deadline or fuse passes without the next cut completing.
/// Dependents unblock the timestep after their prerequisite resolves.
class DragonEnv {
 public:
  explicit DragonEnv(const InstanceSpec& instance) : inst_(std::make_shared<const InstanceSpec>(instance)) {
    validate_instance(instance);
    const double spt = instance.seconds_per_timestep;
    horizon_ = to_timesteps(instance.mission_length_seconds, spt);
    for (const auto& b : instance.bombs) {
      fuse_.push_back(to_timesteps(b.fuse_seconds, spt));
      countdown_.push_back(to_timesteps(b.countdown_seconds, spt));
    }
  }

  const InstanceSpec& instance() const { return *inst_; }
  Timestep horizon() const { return horizon_; }
  Timestep fuse_timesteps(int bomb) const { return fuse_.at(bomb); }
  Timestep countdown_timesteps(int bomb) const { return countdown_.at(bomb); }

  EpisodeState reset() const {
    EpisodeState s;
    for (const auto& a : inst_->agents) s.agents.push_back(a.start);
    for (const auto& b : inst_->bombs) {
      BombState bs;
      bs.status = b.depends_on ? BombStatus::Blocked : BombStatus::Active;
      s.bombs.push_back(bs);
    }
    return s;
  }

  bool done(const EpisodeState& s) const {
    if (s.time >= horizon_) return true;
    return std::all_of(s.bombs.begin(), s.bombs.end(), [](const BombState& b) { return b.resolved(); });
  }

  void check_action(const EpisodeState& s, std::size_t agent, const AgentAction& a) const {
    const auto fail = [&](const std::string& why) {
      throw InputError("agent " + std::to_string(agent) + " at timestep " + std::to_string(s.time) +
                       ": " + why);
    };
    const VertexId at = s.agents[agent];
    switch (a.kind) {
      case AgentAction::Kind::Wait: return;
      case AgentAction::Kind::Move:
        if (!inst_->graph.valid(a.target) || !inst_->graph.adjacent(at, a.target))
          fail("move to non-adjacent vertex " + std::to_string(a.target));
        return;
      case AgentAction::Kind::Cut: {
        if (a.bomb < 0 || a.bomb >= static_cast<int>(inst_->bombs.size()))
          fail("cut on unknown bomb " + std::to_string(a.bomb));
        if (inst_->bombs[a.bomb].vertex != at)
          fail("cut on bomb " + std::to_string(a.bomb) + " from another vertex");
        if (inst_->agents[agent].tools.find(a.color) == std::string::npos)
          fail(std::string("cut with missing tool ") + a.color);
        return;
      }
    }
  }

  StepResult step(const EpisodeState& s, const JointAction& joint) const {
    if (joint.size() != s.agents.size())
      throw InputError("joint action has " + std::to_string(joint.size()) + " entries for " +
                       std::to_string(s.agents.size()) + " agents");
    for (std::size_t i = 0; i < joint.size(); ++i) check_action(s, i, joint[i]);

    StepResult r;
    r.state = s;
    auto& bombs = r.state.bombs;
    const Timestep t = s.time;

    expire(r.state, t, r.events);

    std::map<int, std::vector<char>> cuts;
    for (const auto& a : joint)
      if (a.kind == AgentAction::Kind::Cut) cuts[a.bomb].push_back(a.color);
    for (const auto& [id, colors] : cuts) {
      BombState& b = bombs[id];
      const auto& spec = inst_->bombs[id];
      if (b.resolved()) continue;
      const auto explode = [&](const char* why) {
        b.status = BombStatus::Exploded;
        b.resolved_at = t + 1;
        r.events.push_back({BombEvent::Kind::Exploded, id, t, why});
      };
      if (b.status == BombStatus::Blocked) {
        explode("cut while blocked by dependency");
        continue;
      }
      if (t <= b.last_completion) {
        explode("cut before previous cut settled");
        continue;
      }
      const char want = spec.sequence[b.cut];
      if (std::any_of(colors.begin(), colors.end(), [&](char c) { return c != want; })) {
        explode("wrong colour");
        continue;
      }
      ++b.cut;
      b.last_completion = t + 1;
      if (b.cut == static_cast<int>(spec.sequence.size())) {
        b.status = BombStatus::Defused;
        b.resolved_at = t + 1;
        const double gain = kRewardPerWire * static_cast<double>(spec.sequence.size());
        r.reward += gain;
        r.state.reward += gain;
        r.events.push_back({BombEvent::Kind::Defused, id, t, "defused"});
      } else {
        b.status = BombStatus::InProgress;
        b.deadline = t + 1 + countdown_[id];
      }
    }

    for (std::size_t i = 0; i < joint.size(); ++i)
      if (joint[i].kind == AgentAction::Kind::Move) r.state.agents[i] = joint[i].target;

    r.state.time = t + 1;
    if (r.state.time >= horizon_) expire(r.state, r.state.time, r.events);
    r.done = done(r.state);
    return r;
  }

 private:
  // Unblocks dependents of bombs resolved before `t`, then applies fuse and
  // countdown expiry at `t`.
  void expire(EpisodeState& s, Timestep t, std::vector<BombEvent>& events) const {
    for (std::size_t i = 0; i < s.bombs.size(); ++i) {
      auto& b = s.bombs[i];
      if (b.status != BombStatus::Blocked) continue;
      const auto& pre = s.bombs[*inst_->bombs[i].depends_on];
      if (pre.resolved() && pre.resolved_at < t) b.status = BombStatus::Active;
    }
    for (std::size_t i = 0; i < s.bombs.size(); ++i) {
      auto& b = s.bombs[i];
      if (b.resolved()) continue;
      const char* why = nullptr;
      if (t >= fuse_[i])
        why = "fuse expired";
      else if (b.status == BombStatus::InProgress && t >= b.deadline)
        why = "countdown expired";
      if (!why) continue;
      b.status = BombStatus::Exploded;
      b.resolved_at = t;
      events.push_back({BombEvent::Kind::Exploded, static_cast<int>(i), t, why});
    }
  }

  std::shared_ptr<const InstanceSpec> inst_;
  Timestep horizon_ = 0;
  std::vector<Timestep> fuse_;
  std::vector<Timestep> countdown_;
};

/// Per-agent action lists; agents wait once their list runs out.
using Trace = std::vector<std::vector<AgentAction>>;

struct Rollout {
  double value = 0;
  EpisodeState final_state;
  std::vector<BombEvent> events;
};

/// Replays `trace` from reset until the episode is done or the trace and all
/// pending timers are exhausted. Throws InputError naming agent and timestep
/// on the first invalid action.
inline Rollout rollout(const DragonEnv& env, const Trace& trace) {
  const auto n = env.instance().agents.size();
  if (trace.size() != n)
    throw InputError("trace has " + std::to_string(trace.size()) + " agents, instance has " +
                     std::to_string(n));
  Rollout out;
  EpisodeState s = env.reset();
  while (!env.done(s)) {
    JointAction joint(n);
    for (std::size_t i = 0; i < n; ++i)
      if (static_cast<std::size_t>(s.time) < trace[i].size()) joint[i] = trace[i][s.time];
    auto r = env.step(s, joint);
    out.events.insert(out.events.end(), r.events.begin(), r.events.end());
    s = std::move(r.state);
  }
  out.value = s.reward;
  out.final_state = std::move(s);
  return out;
}

inline double rollout_return(const DragonEnv& env, const Trace& trace) {
  return rollout(env, trace).value;
}

/// Oracle trace of per-agent planned segments (past subtasks first).
inline Trace trace_from_paths(const Task& task, const PlanSegments& segments) {
  Trace trace(segments.size());
  for (std::size_t a = 0; a < segments.size(); ++a) {
    auto& out = trace[a];
    for (const TimedPath* p : segments[a]) {
      if (!p) continue;
      if (static_cast<Timestep>(out.size()) < p->start_time) out.resize(p->start_time);
      for (Timestep t = p->start_time; t < p->end_time(); ++t) {
        const PathStep step = p->step_at(t);
        AgentAction act;
        if (step.kind == StepKind::Move) {
          act = AgentAction::move(step.to);
        } else if (step.kind == StepKind::Act) {
          const std::optional<Goal> spoil = task.contains(step.goal) ? std::nullopt : spoil_goal(task, step.goal);
          const Goal& g = spoil ? *spoil : task.goal(step.goal);
          if (!g.bomb || !cut_color(g.action))
            throw InputError("goal " + std::to_string(g.id) + " is not a bomb cut");
          act = AgentAction::cut(g.bomb->bomb, cut_color(g.action));
        }
        if (static_cast<Timestep>(out.size()) == t) out.push_back(act);
        else out[t] = act;
      }
    }
  }
  return trace;
}

/// Return oracle for the constraint-tree search: rolls planned paths out on
/// the episode simulator and reports explosions by the goals they concern.
class DragonOracle {
 public:
  DragonOracle(const InstanceSpec& instance, const Task& compiled)
      : env_(instance), task_(&compiled), goals_of_bomb_(bomb_goals(compiled, instance.bombs.size())) {}

  const DragonEnv& env() const { return env_; }

  Evaluation evaluate(const PlanSegments& segments) const {
    const Rollout r = rollout(env_, trace_from_paths(*task_, segments));
    Evaluation e{r.value, {}};
    for (const auto& ev : r.events)
      if (ev.kind == BombEvent::Kind::Exploded) e.failures.push_back({ev.time, goals_of_bomb_[ev.bomb]});
    return e;
  }

  /// Return obtainable from bombs whose every cut is among `goals`.
  double reward_bound(std::span<const GoalId> goals) const {
    double total = 0;
    for (const auto& ids : goals_of_bomb_) {
      if (ids.empty()) continue;
      const bool all = std::all_of(ids.begin(), ids.end(), [&](GoalId g) {
        return std::find(goals.begin(), goals.end(), g) != goals.end();
      });
      if (all) total += kRewardPerWire * static_cast<double>(ids.size());
    }
    return total;
  }

  double max_return() const { return tapf::max_return(env_.instance()); }

  /// Spoil goals that explode the bomb whose cuts are `unit` early: one per
  /// wrong colour for its first wire that some agent carries.
  std::vector<Goal> forfeit_goals(std::span<const GoalId> unit) const {
    if (unit.empty()) return {};
    const Goal* first = task_->find(unit.front());
    if (!first || !first->bomb) return {};
    const BombSpec& bomb = env_.instance().bombs.at(first->bomb->bomb);
    std::vector<Goal> out;
    for (char c : std::string("RGB")) {
      if (c == bomb.sequence.front()) continue;
      const bool carried = std::any_of(env_.instance().agents.begin(), env_.instance().agents.end(),
                                       [&](const AgentDef& a) { return a.tools.find(c) != std::string::npos; });
      if (carried) out.push_back(spoil_goal(*task_, bomb.id, bomb.vertex, c));
    }
    return out;
  }

 private:
  DragonEnv env_;
  const Task* task_;
  std::vector<std::vector<GoalId>> goals_of_bomb_;
};

}  // namespace tapf
