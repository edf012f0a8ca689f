#include <gtest/gtest.h>

#include <sstream>

#include "brute_force.hpp"

namespace tapf {
namespace {

TrialRecord row(bool ok, double wall) {
  TrialRecord r;
  r.outcome = ok ? SolveStatus::Optimal : SolveStatus::Timeout;
  r.optimality_ratio = ok ? 1.0 : 0.5;
  r.wall_seconds = wall;
  return r;
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.base.regions = 2;
  c.base.nodes_per_region = 10;
  c.base.mission_length_seconds = 300;
  c.bombs_per_region = {1, 2};
  c.bombs_per_subtask = {1, 2};
  c.seconds_per_timestep = {2};
  c.centre = {2, 1, 2};
  c.trials = 2;
  c.timeout_seconds = 600;
  c.max_expansions = 3000;
  return c;
}

std::string csv_without_wall(const std::vector<TrialRecord>& rows) {
  std::string out;
  for (auto r : rows) {
    r.wall_seconds = 0;
    out += csv_row(r) + "\n";
  }
  return out;
}

TEST(Aggregate, SuccessRate) {
  const std::vector<TrialRecord> rows{row(true, 1), row(false, 9), row(true, 2), row(true, 3)};
  const auto aggs = aggregate(rows);
  ASSERT_EQ(aggs.size(), 1U);
  EXPECT_DOUBLE_EQ(aggs[0].success_rate, 0.75);
  EXPECT_EQ(aggs[0].trials, 4U);
  EXPECT_DOUBLE_EQ(aggs[0].runtime_optimal.mean, 2);
  EXPECT_DOUBLE_EQ(aggs[0].runtime_optimal.sd, 1);
  EXPECT_DOUBLE_EQ(aggs[0].runtime_all.mean, 3.75);
  EXPECT_DOUBLE_EQ(aggs[0].ratio.mean, 0.875);
}

TEST(Aggregate, ErrorRowIsFailure) {
  auto r = row(true, 1);
  r.error = "boom";
  EXPECT_FALSE(r.success());
  EXPECT_DOUBLE_EQ(aggregate({r})[0].success_rate, 0);
}

TEST(Aggregate, GroupsByCellAndSolver) {
  auto a = row(true, 1), b = row(false, 1), c = row(true, 1);
  b.solver = SolverKind::CbsTa;
  c.cell.bombs_per_region = 9;
  const auto aggs = aggregate({a, b, c, a});
  ASSERT_EQ(aggs.size(), 3U);
  EXPECT_EQ(aggs[0].trials, 2U);
  EXPECT_EQ(aggs[1].solver, SolverKind::CbsTa);
  EXPECT_EQ(aggs[2].cell.bombs_per_region, 9);
}

TEST(MeanSd, Values) {
  const auto m = mean_sd({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(m.mean, 5);
  EXPECT_NEAR(m.sd, 2.138089935299395, 1e-12);
  EXPECT_EQ(mean_sd({}).n, 0U);
  EXPECT_DOUBLE_EQ(mean_sd({3}).sd, 0);
}

TEST(Sweep, DefaultCells) {
  const auto cells = sweep_cells(SweepConfig{});
  // 5 + 3 + 3 axis values sharing the centre twice
  EXPECT_EQ(cells.size(), 9U);
  EXPECT_EQ(cells[0], (CellParams{1, 2, 2}));
  SweepConfig full;
  full.full_grid = true;
  EXPECT_EQ(sweep_cells(full).size(), 45U);
}

TEST(Sweep, Validation) {
  SweepConfig c;
  c.trials = 0;
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c = {};
  c.bombs_per_subtask.clear();
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c = {};
  c.solvers.clear();
  EXPECT_THROW(validate_sweep(c), ConfigError);
  c = {};
  c.jobs = 0;
  EXPECT_THROW(run_sweep(c), ConfigError);
}

TEST(Sweep, PairedSeedsAndDeterminism) {
  const auto c = small_sweep();
  std::vector<TrialRecord> streamed;
  const auto a = run_sweep(c, [&](const TrialRecord& r) { streamed.push_back(r); });
  ASSERT_EQ(a.size(), 3U * 2U * 2U);
  EXPECT_EQ(csv_without_wall(streamed), csv_without_wall(a));
  for (std::size_t i = 0; i + 1 < a.size(); i += 2) {
    EXPECT_EQ(a[i].seed, a[i + 1].seed);
    EXPECT_EQ(a[i].cell, a[i + 1].cell);
    EXPECT_EQ(a[i].max_return, a[i + 1].max_return);
    EXPECT_EQ(a[i].solver, SolverKind::CbsTaPtc);
    EXPECT_EQ(a[i + 1].solver, SolverKind::CbsTa);
  }
  for (const auto& r : a) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_GE(r.optimality_ratio, 0);
    EXPECT_LE(r.optimality_ratio, 1);
    if (r.outcome == SolveStatus::Optimal) {
      EXPECT_GE(r.optimality_ratio, r.epsilon);
    }
  }
  EXPECT_EQ(csv_without_wall(run_sweep(c)), csv_without_wall(a));

  auto threaded = c;
  threaded.jobs = 2;
  std::vector<TrialRecord> order;
  const auto b = run_sweep(threaded, [&](const TrialRecord& r) { order.push_back(r); });
  EXPECT_EQ(csv_without_wall(b), csv_without_wall(a));
  EXPECT_EQ(csv_without_wall(order), csv_without_wall(a));
}

TEST(Sweep, SingleBombRegionsSolved) {
  auto c = small_sweep();
  c.bombs_per_region = {1};
  c.bombs_per_subtask = {1};
  c.centre = {1, 1, 2};
  c.trials = 4;
  c.solvers = {SolverKind::CbsTaPtc};
  for (const auto& agg : aggregate(run_sweep(c))) EXPECT_DOUBLE_EQ(agg.success_rate, 1.0);
}

TEST(Sweep, FailingTrialRecorded) {
  auto c = small_sweep();
  c.bombs_per_region = {1};
  c.bombs_per_subtask = {1};
  c.centre = {1, 1, 2};
  c.trials = 1;
  c.solvers = {SolverKind::CbsTaPtc};
  c.base.fuse_min_seconds = 0;
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_NE(csv_row(rows[0]).find(",error,"), std::string::npos);
}

TEST(Csv, HeaderMatchesRows) {
  std::ostringstream os;
  auto r = row(true, 1.5);
  r.error = "a,b\nc";
  write_csv(os, {r});
  const auto text = os.str();
  const auto nl = text.find('\n');
  const auto header = text.substr(0, nl);
  const auto line = text.substr(nl + 1, text.size() - nl - 2);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(line.begin(), line.end(), ','));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

}  // namespace
}  // namespace tapf
