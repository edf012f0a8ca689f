#include <gtest/gtest.h>

#include "tapf/conflicts.hpp"

namespace tapf {
namespace {

std::shared_ptr<const TimedPath> path(std::vector<VertexId> occupied, std::vector<GoalTiming> times = {},
                                      Timestep start = 0) {
  TimedPath p;
  p.start_time = start;
  p.occupied = std::move(occupied);
  p.goal_times = std::move(times);
  return std::make_shared<const TimedPath>(std::move(p));
}

Task two_goal_task(Timestep inter, Timestep fuse) {
  Task t;
  t.horizon = 100;
  t.goals = {{0, 0, "cut-R", 1, std::nullopt}, {1, 0, "cut-G", 1, std::nullopt}};
  t.prec_constraints = {{tau(0), mu(1)}};
  t.inter_constraints = {{tau(0), tau(1), inter}};
  t.abs_constraints = {{tau(1), 0, fuse}};
  return t;
}

TEST(DetectConflicts, SatisfiedSchedule) {
  const Solution s{path({0, 0, 0, 0}, {{0, 0, 1}, {1, 2, 3}})};
  EXPECT_TRUE(detect_conflicts(s, two_goal_task(15, 10)).empty());
}

TEST(DetectConflicts, InterGoalOverrun) {
  // tau(1) - tau(0) = 16 > 15
  const Solution s{path(std::vector<VertexId>(18, 0), {{0, 0, 1}, {1, 16, 17}})};
  const auto c = detect_conflicts(s, two_goal_task(15, 100));
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].kind, ConflictKind::InterGoal);
  EXPECT_EQ(c[0].observed_a, 1);
  EXPECT_EQ(c[0].observed_b, 17);
  EXPECT_EQ(c[0].bound, 15);
}

TEST(DetectConflicts, AbsRangeRankedFirst) {
  // fuse 16, last cut done at 17, and the countdown is also overrun
  const Solution s{path(std::vector<VertexId>(18, 0), {{0, 0, 1}, {1, 16, 17}})};
  const auto c = detect_conflicts(s, two_goal_task(15, 16));
  ASSERT_EQ(c.size(), 2U);
  EXPECT_EQ(c[0].kind, ConflictKind::AbsRange);
  EXPECT_EQ(c[0].observed_a, 17);
  EXPECT_EQ(c[1].kind, ConflictKind::InterGoal);
}

TEST(DetectConflicts, PrecedenceAcrossAgents) {
  const Solution s{path({0, 0, 0, 0}, {{0, 2, 3}}), path({0, 0, 0}, {{1, 1, 2}})};
  const auto c = detect_conflicts(s, two_goal_task(15, 100));
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].kind, ConflictKind::Precedence);
  EXPECT_EQ(c[0].a, tau(0));
  EXPECT_EQ(c[0].b, mu(1));
  EXPECT_EQ(c[0].observed_b, 1);
}

TEST(DetectConflicts, StrictPrecedence) {
  // tau(0) == mu(1) violates the strict ordering
  const Solution s{path({0, 0, 0, 0}, {{0, 0, 1}}), path({0, 0, 0}, {{1, 1, 2}})};
  const auto c = detect_conflicts(s, two_goal_task(15, 100));
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].kind, ConflictKind::Precedence);
}

TEST(DetectConflicts, MissingGoalsSkipped) {
  const Solution s{path({0, 0}, {{0, 0, 1}})};
  EXPECT_TRUE(detect_conflicts(s, two_goal_task(0, 0)).empty());
}

TEST(DetectConflicts, CollisionsOnlyWhenEnabled) {
  const Solution s{path({0, 1, 2}), path({2, 1, 0})};
  Task t;
  EXPECT_TRUE(detect_conflicts(s, t).empty());
  const auto c = detect_conflicts(s, t, {true});
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].kind, ConflictKind::Vertex);
  EXPECT_EQ(c[0].u, 1);
  EXPECT_EQ(c[0].time, 1);
}

TEST(DetectConflicts, EdgeSwap) {
  const Solution s{path({0, 1}), path({1, 0})};
  const auto c = detect_conflicts(s, Task{}, {true});
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].kind, ConflictKind::Edge);
  EXPECT_EQ(c[0].u, 0);
  EXPECT_EQ(c[0].v, 1);
  EXPECT_EQ(c[0].time, 0);
}

TEST(DetectConflicts, StayingAtFinalVertexCollides) {
  const Solution s{path({0, 1}), path({2, 2, 2, 1})};
  const auto c = detect_conflicts(s, Task{}, {true});
  ASSERT_EQ(c.size(), 1U);
  EXPECT_EQ(c[0].time, 3);
}

TEST(DetectConflicts, PriorityOrder) {
  EXPECT_LT(ConflictKind::AbsRange, ConflictKind::Precedence);
  EXPECT_LT(ConflictKind::Precedence, ConflictKind::InterGoal);
  EXPECT_LT(ConflictKind::InterGoal, ConflictKind::Vertex);
  EXPECT_LT(ConflictKind::Vertex, ConflictKind::Edge);
  EXPECT_LT(ConflictKind::Edge, ConflictKind::Explosion);

  // precedence and inter-goal at once, on two agents that also collide
  Task t = two_goal_task(1, 100);
  const Solution s{path({0, 0, 0, 0, 0, 0}, {{0, 4, 5}}), path({0, 0, 0, 0}, {{1, 2, 3}})};
  const auto c = detect_conflicts(s, t, {true});
  ASSERT_GE(c.size(), 2U);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i - 1].kind, c[i].kind);
  EXPECT_EQ(c.front().kind, ConflictKind::Precedence);
  EXPECT_EQ(c.back().kind, ConflictKind::Vertex);
}

TEST(ResolveConflict, InterGoal) {
  Conflict c;
  c.kind = ConflictKind::InterGoal;
  c.a = tau(0);
  c.b = tau(1);
  c.observed_a = 1;
  c.observed_b = 10;
  c.bound = 7;
  const Assignment a{{{0}, {1}}};
  const auto kids = resolve_conflict(c, a);
  ASSERT_EQ(kids.size(), 2U);
  EXPECT_EQ(kids[0].agent, 0);
  ASSERT_EQ(kids[0].bounds.size(), 1U);
  EXPECT_EQ(kids[0].bounds[0].side, BoundUpdate::Side::Lower);
  EXPECT_EQ(kids[0].bounds[0].point, tau(0));
  EXPECT_EQ(kids[0].bounds[0].value, 3);
  EXPECT_EQ(kids[1].agent, 1);
  ASSERT_EQ(kids[1].bounds.size(), 2U);
  EXPECT_EQ(kids[1].bounds[0].side, BoundUpdate::Side::Upper);
  EXPECT_EQ(kids[1].bounds[0].value, 2);
  EXPECT_EQ(kids[1].bounds[1].point, tau(1));
  EXPECT_EQ(kids[1].bounds[1].value, 9);
}

TEST(ResolveConflict, AbsRangeClamps) {
  Conflict c;
  c.kind = ConflictKind::AbsRange;
  c.a = tau(2);
  c.observed_a = 12;
  c.lower = 0;
  c.upper = 10;
  const Assignment a{{{2}}};
  auto kids = resolve_conflict(c, a);
  ASSERT_EQ(kids.size(), 1U);
  EXPECT_EQ(kids[0].bounds[0].side, BoundUpdate::Side::Upper);
  EXPECT_EQ(kids[0].bounds[0].value, 10);
  c.observed_a = 1;
  c.lower = 4;
  kids = resolve_conflict(c, a);
  EXPECT_EQ(kids[0].bounds[0].side, BoundUpdate::Side::Lower);
  EXPECT_EQ(kids[0].bounds[0].value, 4);
}

TEST(ResolveConflict, Precedence) {
  Conflict c;
  c.kind = ConflictKind::Precedence;
  c.a = tau(0);
  c.b = mu(1);
  c.observed_a = 6;
  c.observed_b = 4;
  const Assignment a{{{0}, {1}}};
  const auto kids = resolve_conflict(c, a);
  ASSERT_EQ(kids.size(), 2U);
  EXPECT_EQ(kids[0].agent, 0);
  EXPECT_EQ(kids[0].bounds[0].value, 3);
  EXPECT_EQ(kids[1].agent, 1);
  EXPECT_EQ(kids[1].bounds[0].value, 4);
  EXPECT_EQ(kids[1].bounds[1].value, 5);
}

TEST(ResolveConflict, VertexAndEdge) {
  Conflict c;
  c.kind = ConflictKind::Vertex;
  c.agent1 = 0;
  c.agent2 = 1;
  c.u = 5;
  c.time = 7;
  const auto kids = resolve_conflict(c, Assignment{});
  ASSERT_EQ(kids.size(), 2U);
  EXPECT_EQ(kids[0].agent, 0);
  EXPECT_EQ(kids[1].agent, 1);
  for (const auto& k : kids) EXPECT_EQ(k.vertex_forbids, (std::vector<std::pair<VertexId, Timestep>>{{5, 7}}));

  c.kind = ConflictKind::Edge;
  c.v = 6;
  const auto e = resolve_conflict(c, Assignment{});
  ASSERT_EQ(e.size(), 2U);
  EXPECT_EQ(e[0].edge_forbids[0], std::make_tuple(5, 6, 7));
  EXPECT_EQ(e[1].edge_forbids[0], std::make_tuple(6, 5, 7));
}

TEST(ResolveConflict, ExplosionOneChildPerAgent) {
  Conflict c;
  c.kind = ConflictKind::Explosion;
  c.time = 4;
  const std::vector<VertexId> at{3, 1, 3};
  const auto kids = resolve_conflict(c, Assignment{}, at);
  ASSERT_EQ(kids.size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(kids[i].agent, static_cast<AgentId>(i));
    EXPECT_EQ(kids[i].vertex_forbids, (std::vector<std::pair<VertexId, Timestep>>{{at[i], 4}}));
  }
}

TEST(ResolveConflict, UnassignedGoal) {
  Conflict c;
  c.kind = ConflictKind::AbsRange;
  c.a = tau(9);
  EXPECT_THROW(resolve_conflict(c, Assignment{{{0}}}), InputError);
}

}  // namespace
}  // namespace tapf
