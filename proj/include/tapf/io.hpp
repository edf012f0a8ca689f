#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "tapf/bomb_instance.hpp"
#include "tapf/ct_search.hpp"
#include "tapf/dragon_env.hpp"
#include "tapf/error.hpp"
#include "tapf/mla_star.hpp"

namespace tapf {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline void check_header(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", std::string()) != format)
    throw InputError(std::string("not a ") + format + " document");
  if (j.value("version", 0) != kFormatVersion)
    throw InputError(std::string(format) + " version " + j.value("version", json(0)).dump() + " is not supported");
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline json graph_to_json(const WorldGraph& g) {
  json j;
  j["vertex_count"] = g.vertex_count();
  json edges = json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  j["regions"] = g.regions();
  if (g.has_coordinates()) {
    json coords = json::array();
    for (const auto& p : g.coordinates()) coords.push_back({p.x, p.y});
    j["coordinates"] = std::move(coords);
  }
  return j;
}

inline WorldGraph graph_from_json(const json& j) {
  const int n = detail::field<int>(j, "vertex_count");
  std::vector<Edge> edges;
  for (const auto& e : detail::field<json>(j, "edges")) {
    if (!e.is_array() || e.size() != 2) throw InputError("edge entries must be [u, v] pairs");
    edges.emplace_back(e[0].get<VertexId>(), e[1].get<VertexId>());
  }
  std::vector<int> regions = j.contains("regions") ? detail::field<std::vector<int>>(j, "regions") : std::vector<int>{};
  std::vector<Point2> coords;
  if (j.contains("coordinates"))
    for (const auto& c : j.at("coordinates")) {
      if (!c.is_array() || c.size() != 2) throw InputError("coordinates must be [x, y] pairs");
      coords.push_back({c[0].get<double>(), c[1].get<double>()});
    }
  return WorldGraph(n, edges, std::move(regions), std::move(coords));
}

inline json instance_to_json(const InstanceSpec& inst) {
  json j;
  j["format"] = "tapf-instance";
  j["version"] = kFormatVersion;
  j["mission_length_seconds"] = inst.mission_length_seconds;
  j["seconds_per_timestep"] = inst.seconds_per_timestep;
  j["graph"] = graph_to_json(inst.graph);
  json agents = json::array();
  for (const auto& a : inst.agents) agents.push_back({{"start", a.start}, {"tools", a.tools}});
  j["agents"] = std::move(agents);
  json bombs = json::array();
  for (const auto& b : inst.bombs) {
    json jb{{"id", b.id},
            {"vertex", b.vertex},
            {"sequence", b.sequence},
            {"fuse_seconds", b.fuse_seconds},
            {"countdown_seconds", b.countdown_seconds}};
    jb["depends_on"] = b.depends_on ? json(*b.depends_on) : json(nullptr);
    bombs.push_back(std::move(jb));
  }
  j["bombs"] = std::move(bombs);
  return j;
}

inline InstanceSpec instance_from_json(const json& j) {
  detail::check_header(j, "tapf-instance");
  InstanceSpec inst;
  inst.mission_length_seconds = detail::field<double>(j, "mission_length_seconds");
  inst.seconds_per_timestep = detail::field<double>(j, "seconds_per_timestep");
  inst.graph = graph_from_json(detail::field<json>(j, "graph"));
  for (const auto& a : detail::field<json>(j, "agents"))
    inst.agents.push_back({detail::field<VertexId>(a, "start"), detail::field<std::string>(a, "tools")});
  for (const auto& b : detail::field<json>(j, "bombs")) {
    BombSpec s;
    s.id = detail::field<int>(b, "id");
    s.vertex = detail::field<VertexId>(b, "vertex");
    s.sequence = detail::field<std::string>(b, "sequence");
    s.fuse_seconds = detail::field<double>(b, "fuse_seconds");
    s.countdown_seconds = detail::field<double>(b, "countdown_seconds");
    if (b.contains("depends_on") && !b.at("depends_on").is_null()) s.depends_on = b.at("depends_on").get<int>();
    inst.bombs.push_back(std::move(s));
  }
  validate_instance(inst);
  return inst;
}

/// Per-agent plan as written to solution files.
struct AgentPlan {
  Timestep start_time = 0;
  std::vector<VertexId> vertices;
  std::vector<AgentAction> trace;
  std::vector<GoalTiming> goals;
  bool operator==(const AgentPlan&) const = default;
};

struct SolutionDoc {
  std::string solver;
  std::string status;
  double value = 0;
  double max_return = 0;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t roots_evaluated = 0;
  std::vector<AgentPlan> agents;
  bool operator==(const SolutionDoc&) const = default;

  Trace trace() const {
    Trace t;
    for (const auto& a : agents) t.push_back(a.trace);
    return t;
  }
};

/// Solution document for full-horizon paths: the trace is what the simulator
/// replays; vertices and goal timings are informative.
inline SolutionDoc make_solution_doc(const Task& task, const std::vector<TimedPath>& paths) {
  SolutionDoc doc;
  for (const auto& p : paths) {
    AgentPlan a;
    a.start_time = p.start_time;
    a.vertices = p.occupied;
    a.goals = p.goal_times;
    a.trace = trace_from_paths(task, {{&p}}).front();
    doc.agents.push_back(std::move(a));
  }
  return doc;
}

inline json solution_to_json(const SolutionDoc& doc) {
  json j;
  j["format"] = "tapf-solution";
  j["version"] = kFormatVersion;
  j["solver"] = doc.solver;
  j["status"] = doc.status;
  j["return"] = doc.value;
  j["max_return"] = doc.max_return;
  j["nodes_expanded"] = doc.nodes_expanded;
  j["roots_evaluated"] = doc.roots_evaluated;
  json agents = json::array();
  for (const auto& a : doc.agents) {
    json ja;
    ja["start_time"] = a.start_time;
    ja["vertices"] = a.vertices;
    json trace = json::array();
    for (const auto& act : a.trace) trace.push_back(to_string(act));
    ja["trace"] = std::move(trace);
    json goals = json::array();
    for (const auto& g : a.goals) goals.push_back({{"goal", g.goal}, {"mu", g.exec}, {"tau", g.done}});
    ja["goals"] = std::move(goals);
    agents.push_back(std::move(ja));
  }
  j["agents"] = std::move(agents);
  return j;
}

inline SolutionDoc solution_from_json(const json& j) {
  detail::check_header(j, "tapf-solution");
  SolutionDoc doc;
  doc.solver = j.value("solver", std::string());
  doc.status = j.value("status", std::string());
  doc.value = j.value("return", 0.0);
  doc.max_return = j.value("max_return", 0.0);
  doc.nodes_expanded = j.value("nodes_expanded", std::uint64_t{0});
  doc.roots_evaluated = j.value("roots_evaluated", std::uint64_t{0});
  for (const auto& ja : detail::field<json>(j, "agents")) {
    AgentPlan a;
    a.start_time = ja.value("start_time", 0);
    if (ja.contains("vertices")) a.vertices = ja.at("vertices").get<std::vector<VertexId>>();
    for (const auto& s : detail::field<json>(ja, "trace")) a.trace.push_back(parse_action(s.get<std::string>()));
    if (ja.contains("goals"))
      for (const auto& g : ja.at("goals"))
        a.goals.push_back({detail::field<GoalId>(g, "goal"), detail::field<Timestep>(g, "mu"),
                           detail::field<Timestep>(g, "tau")});
    doc.agents.push_back(std::move(a));
  }
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path);
}

inline InstanceSpec load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }
inline void save_instance(const std::string& path, const InstanceSpec& inst) {
  write_json_file(path, instance_to_json(inst));
}
inline SolutionDoc load_solution(const std::string& path) { return solution_from_json(read_json_file(path)); }
inline void save_solution(const std::string& path, const SolutionDoc& doc) {
  write_json_file(path, solution_to_json(doc));
}

}  // namespace tapf
