#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kinocbs/geometry.hpp"
#include "kinocbs/primitives.hpp"
#include "kinocbs/types.hpp"

namespace kinocbs::dbastar {

// Spatio-temporal exclusion: the robot may not be within delta of `state`
// at timestep `time`.
struct Constraint {
  int robot = 0;
  State state;
  int time = 0;  // timestep index k
};

// Discontinuity-bounded single-robot solution.
struct DbSolution {
  std::vector<State> states;    // length K+1
  std::vector<Action> actions;  // length K
  double delta_used = 0.0;
  int K() const { return static_cast<int>(actions.size()); }
  double cost(double dt) const { return K() * dt; }
};

enum class PlanStatus { Success, Infeasible, TimeLimit };

struct PlanResult {
  PlanStatus status = PlanStatus::Infeasible;
  DbSolution solution;
  std::size_t expansions = 0;
  double wall_time_s = 0.0;
};

struct PlanOptions {
  double delta = 0.5;
  double alpha = 0.5;  // primitive matching uses alpha*delta, duplicates (1-alpha)*delta
  double time_limit_s = std::numeric_limits<double>::infinity();
  std::size_t max_expansions = 1'000'000;
  // Optional override; default is goal Euclidean distance / max speed.
  std::function<double(const State&)> heuristic;
  std::string tree_dump_path;  // debug dump of the explored tree when set
};

PlanResult plan(const geometry::RobotGeometry& robot, const State& start,
                const State& goal, const geometry::Workspace& ws,
                const primitives::PrimitiveSet& prims, const PlanOptions& opts,
                const std::vector<Constraint>& constraints,
                const Bounds& bounds, const MetricWeights& weights);

// Constraint screening for one candidate motion starting at elapsed time
// node_g. A constraint maps to motion index floor((c.time*dt - node_g)/dt);
// indices outside [0, K] are ignored. Returns true when the motion obeys
// every constraint.
bool constraint_filter(double node_g, const std::vector<State>& motion_states,
                       const std::vector<Constraint>& constraints, double delta,
                       double dt, const RobotType& type,
                       const MetricWeights& weights);

// Independent re-check of all discontinuity-bound conditions plus
// constraint clearance; usable as an oracle against plan() output.
struct ValidationReport {
  double max_step_residual = 0.0;   // condition 1 (must be <= delta)
  bool actions_in_bounds = true;    // condition 2a
  double worst_space_margin = 0.0;  // condition 2b (must be > 0)
  double start_gap = 0.0;           // condition 3 (<= delta)
  double goal_gap = 0.0;            // condition 3 (<= delta)
  double min_constraint_clearance =
      std::numeric_limits<double>::infinity();  // must be > delta

  bool cond_steps = false;
  bool cond_feasible = false;
  bool cond_endpoints = false;
  bool cond_constraints = false;
  bool ok() const {
    return cond_steps && cond_feasible && cond_endpoints && cond_constraints;
  }
};

ValidationReport validate(const DbSolution& sol, const State& start,
                          const State& goal, const geometry::Workspace& ws,
                          const geometry::RobotGeometry& robot, double delta,
                          const std::vector<Constraint>& constraints,
                          const Bounds& bounds, const MetricWeights& weights,
                          double dt);

}  // namespace kinocbs::dbastar
