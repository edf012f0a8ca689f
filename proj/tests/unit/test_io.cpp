#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brute_force.hpp"

namespace tapf {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tapf_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(InstanceFile, RoundTripDefaults) {
  const auto inst = generate_instance(GeneratorParams{}, 7);
  const auto path = scratch("defaults.json").string();
  save_instance(path, inst);
  const auto back = load_instance(path);
  EXPECT_EQ(instance_to_json(back), instance_to_json(inst));
  EXPECT_EQ(back.bombs.size(), 15U);
  EXPECT_EQ(back.agents.size(), 3U);
  EXPECT_EQ(back.graph.vertex_count(), inst.graph.vertex_count());
  EXPECT_EQ(max_return(back), max_return(inst));
}

TEST(InstanceFile, OneBombPerRegion) {
  GeneratorParams p;
  p.bombs_per_region = 1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = load_instance([&] {
      const auto path = scratch("one.json").string();
      save_instance(path, generate_instance(p, seed));
      return path;
    }());
    std::vector<int> per_region(static_cast<std::size_t>(p.regions), 0);
    for (const auto& b : inst.bombs) ++per_region[static_cast<std::size_t>(inst.graph.region(b.vertex))];
    EXPECT_EQ(per_region, (std::vector<int>{1, 1, 1}));
    for (const auto& b : inst.bombs) EXPECT_FALSE(b.depends_on.has_value());
  }
}

TEST(InstanceFile, RejectsZeroFuse) {
  GeneratorParams p;
  p.fuse_min_seconds = 0;
  EXPECT_THROW(generate_instance(p, 1), ConfigError);
  auto inst = generate_instance(GeneratorParams{}, 1);
  auto j = instance_to_json(inst);
  j["bombs"][0]["fuse_seconds"] = 0;
  EXPECT_THROW(instance_from_json(j), InputError);
}

TEST(InstanceFile, RejectsBadHeader) {
  auto j = instance_to_json(generate_instance(GeneratorParams{}, 1));
  j["version"] = 99;
  EXPECT_THROW(instance_from_json(j), InputError);
  j = instance_to_json(generate_instance(GeneratorParams{}, 1));
  j.erase("bombs");
  EXPECT_THROW(instance_from_json(j), InputError);
}

TEST(Generator, RangesAndChains) {
  GeneratorParams p;
  p.regions = 2;
  p.bombs_per_region = 4;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto inst = generate_instance(p, seed);
    ASSERT_EQ(inst.bombs.size(), 8U);
    int deps = 0;
    for (const auto& b : inst.bombs) {
      EXPECT_GE(b.fuse_seconds, p.fuse_min_seconds);
      EXPECT_LE(b.fuse_seconds, p.fuse_max_seconds);
      EXPECT_GE(b.sequence.size(), 1U);
      EXPECT_LE(b.sequence.size(), 3U);
      EXPECT_EQ(b.countdown_seconds, 15);
      if (b.depends_on) {
        ++deps;
        EXPECT_EQ(inst.graph.region(inst.bombs[*b.depends_on].vertex), inst.graph.region(b.vertex));
      }
    }
    // one chain per region, at most chain_max - 1 links each
    EXPECT_LE(deps, 2 * 3);
    for (const auto& a : inst.agents) EXPECT_EQ(a.start, inst.agents[0].start);
  }
  p.chain_max = 1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    for (const auto& b : generate_instance(p, seed).bombs) EXPECT_FALSE(b.depends_on.has_value());
  p.sequence_max = 4;
  EXPECT_THROW(validate_params(p), ConfigError);
}

TEST(Generator, SameSeedSameFile) {
  const auto a = instance_to_json(generate_instance(GeneratorParams{}, 42)).dump();
  const auto b = instance_to_json(generate_instance(GeneratorParams{}, 42)).dump();
  const auto c = instance_to_json(generate_instance(GeneratorParams{}, 43)).dump();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SolutionFile, RoundTrip) {
  SolutionDoc doc;
  doc.solver = "cbs-ta-ptc";
  doc.status = "optimal";
  doc.value = 30;
  doc.max_return = 30;
  doc.nodes_expanded = 4;
  doc.roots_evaluated = 2;
  doc.agents.push_back({0, {0, 1, 1, 1}, {AgentAction::move(1), AgentAction::cut(0, 'R'), AgentAction::wait()},
                        {{0, 1, 2}}});
  doc.agents.push_back({0, {0}, {}, {}});
  const auto path = scratch("sol.json").string();
  save_solution(path, doc);
  EXPECT_EQ(load_solution(path), doc);
  EXPECT_EQ(doc.trace().size(), 2U);
}

TEST(SolutionFile, MalformedAction) {
  auto j = solution_to_json(SolutionDoc{"x", "optimal", 0, 0, 0, 0, {{0, {0}, {AgentAction::wait()}, {}}}});
  j["agents"][0]["trace"][0] = "jump 3";
  EXPECT_THROW(solution_from_json(j), InputError);
}

TEST(SolutionFile, RerunsAreByteIdentical) {
  GeneratorParams g;
  g.regions = 2;
  g.nodes_per_region = 15;
  g.bombs_per_region = 3;
  const auto inst = generate_instance(g, 5);
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const Task task = compile_bomb_task(inst);
    const DragonOracle oracle(inst, task);
    PartitionOptions p;
    p.bombs_per_subtask = 2;
    SolverOptions o;
    o.max_expansions = 2000;
    const auto r = solve_task(inst.graph, agent_specs(inst), initial_states(inst), task, p, oracle, o);
    auto doc = make_solution_doc(task, r.paths);
    doc.solver = "cbs-ta-ptc";
    doc.status = to_string(r.status);
    doc.value = r.value;
    const auto path = scratch("rerun.json");
    save_solution(path.string(), doc);
    if (run == 0) first = slurp(path);
    else EXPECT_EQ(slurp(path), first);
  }
  EXPECT_FALSE(first.empty());
}

TEST(Files, UnreadableAndMalformed) {
  EXPECT_THROW(read_json_file("/nonexistent/tapf.json"), InputError);
  const auto path = scratch("bad.json");
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(read_json_file(path.string()), InputError);
  EXPECT_THROW(load_instance(path.string()), InputError);
}

}  // namespace
}  // namespace tapf
