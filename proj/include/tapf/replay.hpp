#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tapf/bomb_instance.hpp"
#include "tapf/conflicts.hpp"
#include "tapf/dragon_env.hpp"
#include "tapf/mla_star.hpp"

namespace tapf {

struct ReplayReport {
  double value = 0;
  std::vector<BombEvent> events;
  EpisodeState final_state;
  /// Reconstructed per-agent paths with the goal timings the trace realizes.
  std::vector<TimedPath> paths;
  /// Compiled constraints the realized timings violate.
  std::vector<Conflict> violations;
  /// Cuts that did not advance their bomb: wrong colour, early, blocked or
  /// after it was resolved.
  std::vector<std::string> stray_cuts;
};

inline std::string describe(const Conflict& c) {
  std::string s = std::string(to_string(c.kind)) + " at t=" + std::to_string(c.time);
  switch (c.kind) {
    case ConflictKind::AbsRange:
      s += ": " + to_string(c.a) + "=" + std::to_string(c.observed_a) + " outside [" + std::to_string(c.lower) +
           ", " + std::to_string(c.upper) + "]";
      break;
    case ConflictKind::Precedence:
      s += ": " + to_string(c.a) + "=" + std::to_string(c.observed_a) + " not before " + to_string(c.b) + "=" +
           std::to_string(c.observed_b);
      break;
    case ConflictKind::InterGoal:
      s += ": " + to_string(c.b) + " - " + to_string(c.a) + " = " + std::to_string(c.observed_b - c.observed_a) +
           " > " + std::to_string(c.bound);
      break;
    case ConflictKind::Vertex:
      s += ": agents " + std::to_string(c.agent1) + "," + std::to_string(c.agent2) + " at vertex " +
           std::to_string(c.u);
      break;
    case ConflictKind::Edge:
      s += ": agents " + std::to_string(c.agent1) + "," + std::to_string(c.agent2) + " swap on " +
           std::to_string(c.u) + "-" + std::to_string(c.v);
      break;
    case ConflictKind::Explosion:
      break;
  }
  return s;
}

/// Replays `trace` on the simulator and checks the realized cut timings
/// against the compiled task. A cut realizes a goal only when the simulator
/// accepts it as the next wire; any other cut is listed as stray. Throws
/// InputError at the first invalid action.
inline ReplayReport replay(const InstanceSpec& inst, const Task& task, const Trace& trace,
                           bool collision_checking = false) {
  const DragonEnv env(inst);
  if (trace.size() != inst.agents.size())
    throw InputError("trace has " + std::to_string(trace.size()) + " agents, instance has " +
                     std::to_string(inst.agents.size()));
  const auto goals = bomb_goals(task, inst.bombs.size());
  const std::size_t n = inst.agents.size();
  ReplayReport out;
  out.paths.resize(n);
  for (std::size_t a = 0; a < n; ++a) out.paths[a].occupied.push_back(inst.agents[a].start);

  std::set<GoalId> realized;
  EpisodeState s = env.reset();
  while (!env.done(s)) {
    JointAction joint(n);
    for (std::size_t a = 0; a < n; ++a)
      if (static_cast<std::size_t>(s.time) < trace[a].size()) joint[a] = trace[a][s.time];
    StepResult r = env.step(s, joint);
    for (std::size_t a = 0; a < n; ++a) {
      const AgentAction& act = joint[a];
      if (act.kind != AgentAction::Kind::Cut) continue;
      const int before = s.bombs[act.bomb].cut;
      const bool advanced = r.state.bombs[act.bomb].cut > before && r.state.bombs[act.bomb].status != BombStatus::Exploded;
      if (advanced) {
        const GoalId g = goals[act.bomb][before];
        // Several agents cutting the same wire together realize it once.
        if (realized.insert(g).second) out.paths[a].goal_times.push_back({g, s.time, s.time + 1});
      } else {
        out.stray_cuts.push_back("agent " + std::to_string(a) + " at t=" + std::to_string(s.time) + " cut " +
                                 act.color + " on bomb " + std::to_string(act.bomb));
      }
    }
    for (std::size_t a = 0; a < n; ++a) out.paths[a].occupied.push_back(r.state.agents[a]);
    out.events.insert(out.events.end(), r.events.begin(), r.events.end());
    s = std::move(r.state);
  }
  out.value = s.reward;
  out.final_state = std::move(s);

  Solution sol;
  for (const auto& p : out.paths) sol.push_back(std::make_shared<const TimedPath>(p));
  out.violations = detect_conflicts(sol, task, {collision_checking});
  return out;
}

}  // namespace tapf
