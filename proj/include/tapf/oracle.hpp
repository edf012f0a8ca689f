#pragma once

#include <concepts>
#include <span>
#include <vector>

#include "tapf/mla_star.hpp"
#include "tapf/task.hpp"

namespace tapf {

/// Something went irrecoverably wrong for these goals at `time` (e.g. a bomb
/// exploded). Read by the vertex-constraint-only baseline.
struct FailureEvent {
  Timestep time = 0;
  std::vector<GoalId> goals;
};

struct Evaluation {
  double value = 0;
  std::vector<FailureEvent> failures;
};

/// Per agent, its committed plan segments in time order followed by the
/// candidate segment.
using PlanSegments = std::vector<std::vector<const TimedPath*>>;

/// A return oracle scores complete plans by simulating them. It must be
/// callable concurrently from several threads.
template <class O>
concept ReturnOracle = requires(const O& o, const PlanSegments& plans, std::span<const GoalId> goals) {
  { o.evaluate(plans) } -> std::same_as<Evaluation>;
  { o.reward_bound(goals) } -> std::convertible_to<double>;
};

/// An oracle that can also name goals which, once performed, end a group of
/// goals early without reward. Dependents of the group may then start as soon
/// as such a goal completes.
template <class O>
concept ForfeitOracle = ReturnOracle<O> && requires(const O& o, std::span<const GoalId> unit) {
  { o.forfeit_goals(unit) } -> std::same_as<std::vector<Goal>>;
};

}  // namespace tapf
