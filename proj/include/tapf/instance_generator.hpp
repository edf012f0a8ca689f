#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "tapf/bomb_instance.hpp"
#include "tapf/error.hpp"
#include "tapf/rng.hpp"
#include "tapf/world_graph.hpp"

namespace tapf {

/// Random instance parameters. Defaults are the experiment table's: a
/// 15-minute mission, three regions of about 40 nodes and three agents.
struct GeneratorParams {
  int regions = 3;
  int nodes_per_region = 40;
  int agents = 3;
  int bombs_per_region = 5;
  double mission_length_seconds = 15 * 60;
  double seconds_per_timestep = 1;
  double fuse_min_seconds = 1 * 60;
  double fuse_max_seconds = 15 * 60;
  int chain_min = 1;
  int chain_max = 4;
  double countdown_seconds = 15;
  int sequence_min = 1;
  int sequence_max = 3;
  WorldGenOptions world;
};

inline void validate_params(const GeneratorParams& p) {
  const auto fail = [](const std::string& msg) { throw ConfigError("generator: " + msg); };
  if (p.regions < 1 || p.nodes_per_region < 1) fail("world must have at least one region and node");
  if (p.agents < 1) fail("need at least one agent");
  if (p.bombs_per_region < 0) fail("bombs per region must be non-negative");
  if (!(p.mission_length_seconds > 0)) fail("mission length must be positive");
  if (!(p.seconds_per_timestep > 0)) fail("seconds per timestep must be positive");
  if (!(p.fuse_min_seconds > 0) || p.fuse_max_seconds < p.fuse_min_seconds) fail("fuse range must be positive and ordered");
  if (!(p.countdown_seconds > 0)) fail("countdown must be positive");
  if (p.chain_min < 1 || p.chain_max < p.chain_min) fail("chain length range must be ordered and at least 1");
  if (p.sequence_min < 1 || p.sequence_max > 3 || p.sequence_max < p.sequence_min)
    fail("sequence length range must lie in [1, 3]");
}

/// Tools of agent i: every colour except colour i mod 3.
inline std::string tool_pair(int agent) {
  static const char* pairs[] = {"GB", "RB", "RG"};
  return pairs[agent % 3];
}

/// Deterministic per seed. Bomb locations, sequences and fuses are uniform;
/// each region gets one dependency chain of random length over its bombs.
/// All agents start on one random vertex.
inline InstanceSpec generate_instance(const GeneratorParams& p, std::uint64_t seed) {
  validate_params(p);
  InstanceSpec inst;
  inst.graph = generate_world(p.regions, p.nodes_per_region, seed, p.world);
  inst.mission_length_seconds = p.mission_length_seconds;
  inst.seconds_per_timestep = p.seconds_per_timestep;

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto start = static_cast<VertexId>(rng.uniform(0, inst.graph.vertex_count() - 1));
  for (int a = 0; a < p.agents; ++a) inst.agents.push_back({start, tool_pair(a)});

  const std::string colors = "RGB";
  for (int r = 0; r < p.regions; ++r) {
    std::vector<VertexId> members;
    for (VertexId v = 0; v < inst.graph.vertex_count(); ++v)
      if (inst.graph.region(v) == r) members.push_back(v);
    const int first = static_cast<int>(inst.bombs.size());
    for (int b = 0; b < p.bombs_per_region; ++b) {
      BombSpec bomb;
      bomb.id = static_cast<int>(inst.bombs.size());
      bomb.vertex = members[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(members.size()) - 1))];
      std::string order = colors;
      rng.shuffle(order.begin(), order.end());
      bomb.sequence = order.substr(0, static_cast<std::size_t>(rng.uniform(p.sequence_min, p.sequence_max)));
      bomb.fuse_seconds = static_cast<double>(
          rng.uniform(static_cast<std::int64_t>(p.fuse_min_seconds), static_cast<std::int64_t>(p.fuse_max_seconds)));
      bomb.countdown_seconds = p.countdown_seconds;
      inst.bombs.push_back(std::move(bomb));
    }
    if (p.bombs_per_region == 0) continue;
    const int length = static_cast<int>(rng.uniform(p.chain_min, std::min(p.chain_max, p.bombs_per_region)));
    std::vector<int> ids(static_cast<std::size_t>(p.bombs_per_region));
    std::iota(ids.begin(), ids.end(), first);
    rng.shuffle(ids.begin(), ids.end());
    for (int k = 1; k < length; ++k) inst.bombs[ids[k]].depends_on = ids[k - 1];
  }
  validate_instance(inst);
  return inst;
}

}  // namespace tapf
