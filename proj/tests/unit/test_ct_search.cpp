#include <gtest/gtest.h>

#include "brute_force.hpp"

namespace tapf {
namespace {

TaskSolution run(const InstanceSpec& inst, SolverOptions o = {}) {
  const Task task = compile_bomb_task(inst);
  const DragonOracle oracle(inst, task);
  const auto agents = agent_specs(inst);
  const auto starts = initial_states(inst);
  return solve_task(inst.graph, agents, starts, task, PartitionOptions{}, oracle, o);
}

Solution as_solution(const std::vector<TimedPath>& paths) {
  Solution s;
  for (const auto& p : paths) s.push_back(std::make_shared<const TimedPath>(p));
  return s;
}

InstanceSpec line_instance(const std::string& seq, double fuse, double countdown) {
  InstanceSpec inst;
  inst.graph = WorldGraph(4, {{0, 1}, {1, 2}, {2, 3}});
  inst.agents = {{0, "RG"}, {0, "GB"}};
  inst.bombs = {{0, 2, seq, fuse, countdown, std::nullopt}};
  inst.mission_length_seconds = 12;
  return inst;
}

TEST(CtSearch, RootShortCircuit) {
  const auto r = run(line_instance("R", 12, 5));
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.value, 10);
  EXPECT_EQ(r.stats.nodes_expanded, 0U);
  EXPECT_GE(r.stats.roots_enumerated, 1U);
}

TEST(CtSearch, ResolvesPrematureCut) {
  // one agent holds both colours; the naive chain cuts G as R completes
  auto inst = line_instance("RG", 12, 5);
  inst.agents = {{0, "RG"}};
  const auto r = run(inst);
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.value, 20);
  ASSERT_EQ(r.paths[0].goal_times.size(), 2U);
  EXPECT_LT(r.paths[0].goal_times[0].done, r.paths[0].goal_times[1].exec);
}

TEST(CtSearch, FuseShorterThanTravel) {
  const auto r = run(line_instance("R", 2, 5));
  EXPECT_EQ(r.status, SolveStatus::Unsolvable);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.paths.size(), 2U);
}

TEST(CtSearch, PartialWhenOneBombImpossible) {
  auto inst = line_instance("R", 12, 5);
  inst.bombs.push_back({1, 3, "G", 2, 5, std::nullopt});
  const auto r = run(inst);
  EXPECT_EQ(r.status, SolveStatus::Unsolvable);
  EXPECT_EQ(r.value, 10);
}

TEST(CtSearch, MatchesExhaustiveReturn) {
  for (std::uint64_t seed = 7000; seed < 7100; ++seed) {
    const auto inst = testing::small_instance(seed, 3 + static_cast<int>(seed % 4), 1 + static_cast<int>(seed % 2),
                                              8 + static_cast<int>(seed % 5));
    const auto r = run(inst);
    testing::BruteReturn brute(inst);
    EXPECT_EQ(r.value, brute.solve()) << "seed " << seed;
    EXPECT_NE(r.status, SolveStatus::Timeout) << "seed " << seed;
    EXPECT_EQ(r.status == SolveStatus::Optimal, r.value == max_return(inst)) << "seed " << seed;
  }
}

TEST(CtSearch, PropertiesOnRandomInstances) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto inst = testing::small_instance(seed, 6, 2, 12);
    SolverOptions o;
    o.record_pops = true;
    const auto r = run(inst, o);
    const double max = max_return(inst);
    double last_root = max + 1;
    for (const auto& p : r.pops) {
      EXPECT_LE(p.value, max) << "seed " << seed;
      if (!p.root) continue;
      EXPECT_LE(p.value, last_root) << "seed " << seed;
      last_root = p.value;
    }
    EXPECT_LE(r.value, max);
    if (r.value == max) {
      EXPECT_EQ(r.status, SolveStatus::Optimal);
      EXPECT_TRUE(detect_conflicts(as_solution(r.paths), compile_bomb_task(inst)).empty()) << "seed " << seed;
    }
  }
}

TEST(CtSearch, EpsilonBound) {
  int optimal = 0;
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    const auto inst = testing::small_instance(seed, 5, 2, 12);
    SolverOptions o;
    o.epsilon = 0.8;
    const auto r = run(inst, o);
    if (r.status != SolveStatus::Optimal) continue;
    ++optimal;
    EXPECT_GE(r.value, 0.8 * max_return(inst)) << "seed " << seed;
  }
  EXPECT_GT(optimal, 0);
}

TEST(CtSearch, ParallelRootsSameResult) {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const auto inst = testing::small_instance(seed, 6, 2, 12);
    SolverOptions o;
    const auto serial = run(inst, o);
    o.parallel_roots = 3;
    const auto parallel = run(inst, o);
    EXPECT_EQ(serial.value, parallel.value);
    EXPECT_EQ(serial.paths, parallel.paths);
    EXPECT_EQ(serial.stats.nodes_expanded, parallel.stats.nodes_expanded);
  }
}

TEST(CtSearch, RejectsBadOptions) {
  const auto inst = line_instance("R", 12, 5);
  SolverOptions o;
  o.epsilon = 0;
  EXPECT_THROW(run(inst, o), ConfigError);
  o.epsilon = 1.5;
  EXPECT_THROW(run(inst, o), ConfigError);
  o = {};
  o.parallel_roots = 0;
  EXPECT_THROW(run(inst, o), ConfigError);
}

TEST(CtSearch, TimeoutKeepsIncumbent) {
  auto inst = line_instance("RG", 12, 5);
  inst.agents = {{0, "RG"}};
  SolverOptions o;
  o.max_expansions = 0;
  const auto r = run(inst, o);
  EXPECT_EQ(r.status, SolveStatus::Timeout);
  EXPECT_EQ(r.paths.size(), 1U);
}

// Child pruning relies on the feasibility verdict; with every variable boxed
// inside [0, horizon] it must agree with exhaustive search.
TEST(CtSearch, PruningVerdictExact) {
  int pruned = 0;
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const auto inst = testing::small_instance(seed, 5, 2, 9);
    const Task task = compile_bomb_task(inst);
    if (task.goals.size() > 3) continue;
    Rng rng(seed);
    const auto starts = initial_states(inst);
    for (const auto& a : enumerate_assignments(task, agent_specs(inst), OrderPolicy::AllConsistentOrders)) {
      GoalBounds b;
      for (const auto& g : task.goals) {
        if (rng.uniform(0, 1)) b.tighten_lower(tau(g.id), static_cast<Timestep>(rng.uniform(0, task.horizon)));
        if (rng.uniform(0, 1)) b.tighten_upper(tau(g.id), static_cast<Timestep>(rng.uniform(0, task.horizon)));
      }
      const auto sys = build_system(task, a, b, inst.graph, starts);
      const bool verdict = check_feasible(sys);
      pruned += !verdict;
      ASSERT_EQ(verdict, testing::brute_feasible(sys, 0, task.horizon)) << "seed " << seed;
    }
  }
  EXPECT_GT(pruned, 0);
}

TEST(Baseline, ExplosionBranchesPerAgent) {
  auto inst = line_instance("RG", 12, 5);
  inst.agents = {{0, "RG"}, {0, "B"}, {0, "B"}};
  SolverOptions o;
  o.kind = SolverKind::CbsTa;
  o.max_expansions = 1;
  const auto r = run(inst, o);
  EXPECT_EQ(r.stats.roots_enumerated, 1U);
  EXPECT_EQ(r.stats.nodes_expanded, 1U);
  EXPECT_EQ(r.stats.nodes_generated, 3U);
}

TEST(Baseline, MatchesWithoutTemporalPressure) {
  InstanceSpec inst = line_instance("R", 12, 5);
  inst.bombs.push_back({1, 3, "B", 12, 5, std::nullopt});
  SolverOptions o;
  const auto ptc = run(inst, o);
  o.kind = SolverKind::CbsTa;
  const auto base = run(inst, o);
  EXPECT_EQ(ptc.value, 20);
  EXPECT_EQ(base.value, ptc.value);
}

TEST(Baseline, ExpandsMoreUnderCountdown) {
  auto inst = line_instance("RG", 12, 5);
  inst.agents = {{0, "RG"}};
  SolverOptions o;
  o.timeout_seconds = 10;
  const auto ptc = run(inst, o);
  ASSERT_EQ(ptc.status, SolveStatus::Optimal);
  o.kind = SolverKind::CbsTa;
  const auto base = run(inst, o);
  EXPECT_TRUE(base.status != SolveStatus::Optimal || base.stats.nodes_expanded > ptc.stats.nodes_expanded)
      << base.stats.nodes_expanded << " vs " << ptc.stats.nodes_expanded;
}

}  // namespace
}  // namespace tapf
