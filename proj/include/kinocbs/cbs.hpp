#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinocbs/dbastar.hpp"
#include "kinocbs/problem.hpp"
#include "kinocbs/trajopt.hpp"
#include "kinocbs/types.hpp"

namespace kinocbs::cbs {

struct Conflict {
  int i = 0, j = 0;  // i < j
  State xi, xj;
  int time = 0;  // timestep index
};

struct PlannerConfig {
  double delta0 = 0.5;
  double delta_rate = 0.9;  // in (0, 1)
  double alpha = 0.5;
  int primitives0 = 100;  // iteration n uses primitives0 * 2^(n-1) per type
  int max_primitives = 100000;
  double time_limit_s = 60.0;
  double margin = 0.0;  // inter-robot collision margin
  int max_hl_expansions = 10000;  // cap per delta iteration
  int prim_k_min = 5;
  int prim_k_max = 30;
  double dt = 0.1;
  std::uint64_t seed = 0;
  // stop after this many emissions; 0 keeps improving until the time limit
  int stop_after_emissions = 0;
  trajopt::OptWeights opt;
  // When set for a robot type name, primitives are loaded from this file
  // instead of generated, and are not grown across iterations.
  std::map<std::string, std::string> primitive_files;
};

double compute_delta(const PlannerConfig& config, int n);

struct HighLevelNode {
  std::vector<dbastar::DbSolution> solutions;
  std::vector<dbastar::Constraint> constraints;
  double cost = 0.0;
  std::uint64_t id = 0;
};

// Earliest-timestep conflict scanning jointly over all robots; robots past
// their horizon are evaluated parked at their final state. Ties at one
// timestep break lexicographically by pair.
std::optional<Conflict> get_earliest_conflict(
    const std::vector<dbastar::DbSolution>& solutions,
    const std::vector<geometry::RobotGeometry>& robots, double margin);

// Expands one conflict into (up to) two children; the constrained robot is
// replanned via the callback, children with infeasible replans are dropped.
using ReplanFn = std::function<std::optional<dbastar::DbSolution>(
    int robot, const std::vector<dbastar::Constraint>& constraints)>;
std::vector<HighLevelNode> branch(const HighLevelNode& node,
                                  const Conflict& conflict, double dt,
                                  const ReplanFn& replan);

struct IterationStats {
  int iteration = 0;
  double delta = 0.0;
  int primitives_per_type = 0;
  std::size_t hl_expansions = 0;
  std::size_t conflicts_resolved = 0;
  std::size_t infeasible_children = 0;
  std::size_t optimizer_failures = 0;
  double first_conflict_free_cost = -1.0;  // discrete cost, -1 if none found
  bool root_built = false;
  bool emitted = false;
};

struct SolveReport {
  bool solved = false;  // at least one emission
  double best_cost = 0.0;
  std::vector<IterationStats> iterations;
  double wall_time_s = 0.0;
  std::string failure_reason;  // set when solved == false
};

using EmitFn =
    std::function<void(const TrajectorySet& ts, double cost, int iteration)>;

// Anytime loop: grow primitives, shrink delta, run the constraint-tree
// search, hand conflict-free nodes to the optimizer, and emit strictly
// improving validated solutions until the time limit.
SolveReport solve(const ProblemInstance& instance, const PlannerConfig& config,
                  const EmitFn& emit);

}  // namespace kinocbs::cbs
