#pragma once

#include "tapf/assignment.hpp"
#include "tapf/bench.hpp"
#include "tapf/bomb_instance.hpp"
#include "tapf/conflicts.hpp"
#include "tapf/ct_search.hpp"
#include "tapf/dragon_env.hpp"
#include "tapf/error.hpp"
#include "tapf/instance_generator.hpp"
#include "tapf/io.hpp"
#include "tapf/mla_star.hpp"
#include "tapf/oracle.hpp"
#include "tapf/partitioner.hpp"
#include "tapf/replay.hpp"
#include "tapf/rng.hpp"
#include "tapf/solve_task.hpp"
#include "tapf/task.hpp"
#include "tapf/temporal_feasibility.hpp"
#include "tapf/world_graph.hpp"
