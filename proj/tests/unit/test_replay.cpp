#include <gtest/gtest.h>

#include "brute_force.hpp"

namespace tapf {
namespace {

InstanceSpec line(const std::string& seq, double fuse) {
  InstanceSpec inst;
  inst.graph = WorldGraph(4, {{0, 1}, {1, 2}, {2, 3}});
  inst.agents = {{0, "RG"}};
  inst.bombs = {{0, 3, seq, fuse, 5, std::nullopt}};
  inst.mission_length_seconds = 12;
  return inst;
}

TEST(Replay, SolverOutputIsClean) {
  int optimal = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = testing::small_instance(seed, 5, 2, 12);
    const Task task = compile_bomb_task(inst);
    const DragonOracle oracle(inst, task);
    const auto r = solve_task(inst.graph, agent_specs(inst), initial_states(inst), task, PartitionOptions{}, oracle,
                                SolverOptions{});
    const auto doc = make_solution_doc(task, r.paths);
    const auto rep = replay(inst, task, doc.trace());
    EXPECT_EQ(rep.value, r.value) << "seed " << seed;
    // an unsolvable incumbent may still carry failing cuts
    if (r.status == SolveStatus::Optimal) {
      EXPECT_TRUE(rep.violations.empty()) << "seed " << seed;
      EXPECT_TRUE(rep.stray_cuts.empty()) << "seed " << seed;
      ++optimal;
    }
  }
  EXPECT_GE(optimal, 5);
}

TEST(Replay, RealizedTimings) {
  const auto inst = line("RG", 12);
  const Task task = compile_bomb_task(inst);
  const Trace trace{{AgentAction::move(1), AgentAction::move(2), AgentAction::move(3), AgentAction::cut(0, 'R'),
                     AgentAction::wait(), AgentAction::cut(0, 'G')}};
  const auto rep = replay(inst, task, trace);
  EXPECT_EQ(rep.value, 20);
  EXPECT_TRUE(rep.violations.empty());
  ASSERT_EQ(rep.paths[0].goal_times.size(), 2U);
  EXPECT_EQ(rep.paths[0].goal_times[0], (GoalTiming{0, 3, 4}));
  EXPECT_EQ(rep.paths[0].goal_times[1], (GoalTiming{1, 5, 6}));
  EXPECT_EQ(rep.paths[0].occupied.front(), 0);
  EXPECT_EQ(rep.paths[0].occupied.back(), 3);
}

TEST(Replay, RemovedMoveFailsAtDivergence) {
  const auto inst = line("R", 12);
  const Task task = compile_bomb_task(inst);
  Trace trace{{AgentAction::move(1), AgentAction::move(2), AgentAction::move(3), AgentAction::cut(0, 'R')}};
  EXPECT_EQ(replay(inst, task, trace).value, 10);
  trace[0].erase(trace[0].begin() + 1);
  try {
    replay(inst, task, trace);
    FAIL() << "corrupted trace accepted";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("agent 0 at timestep 1"), std::string::npos) << e.what();
  }
}

TEST(Replay, LateCutIsViolation) {
  // cut after the fuse: the bomb explodes and the realized timing breaks its deadline
  const auto inst = line("R", 4);
  const Task task = compile_bomb_task(inst);
  const Trace trace{{AgentAction::move(1), AgentAction::move(2), AgentAction::wait(), AgentAction::move(3),
                     AgentAction::cut(0, 'R')}};
  const auto rep = replay(inst, task, trace);
  EXPECT_EQ(rep.value, 0);
  ASSERT_EQ(rep.events.size(), 1U);
  EXPECT_EQ(rep.events[0].kind, BombEvent::Kind::Exploded);
}

TEST(Replay, EmptyTraceWithoutBombs) {
  auto inst = line("R", 12);
  inst.bombs.clear();
  const Task task = compile_bomb_task(inst);
  const auto rep = replay(inst, task, Trace{{}});
  EXPECT_EQ(rep.value, 0);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_TRUE(rep.stray_cuts.empty());
}

TEST(Replay, StrayCutsCounted) {
  auto inst = line("RG", 12);
  inst.bombs[0].vertex = 0;
  const Task task = compile_bomb_task(inst);
  // G before R explodes the bomb; the later R cut finds nothing to cut
  const Trace trace{{AgentAction::cut(0, 'G'), AgentAction::cut(0, 'R')}};
  const auto rep = replay(inst, task, trace);
  EXPECT_EQ(rep.value, 0);
  EXPECT_EQ(rep.stray_cuts.size(), 1U);
  // cutting R while R is still in progress
  const Trace early{{AgentAction::cut(0, 'R'), AgentAction::cut(0, 'G')}};
  const auto rep2 = replay(inst, task, early);
  EXPECT_EQ(rep2.stray_cuts.size(), 1U);
  EXPECT_EQ(rep2.value, 0);
}

TEST(Replay, AgentCountMismatch) {
  const auto inst = line("R", 12);
  EXPECT_THROW(replay(inst, compile_bomb_task(inst), Trace{}), InputError);
}

}  // namespace
}  // namespace tapf
