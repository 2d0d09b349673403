#pragma once

#include <string>

#include "kinocbs/problem.hpp"

namespace kinocbs::validate {

struct Tolerances {
  double dyn_residual = 1e-6;
  double pair_margin = -1e-4;   // pairwise signed distance must stay above
  double space_tol = 1e-4;      // free-space penetration slack
  double goal_tol_pos = 1e-3;
  double goal_tol_other = 1e-2;
  double action_tol = 1e-9;
};

// End-to-end check of a trajectory set against its instance, independent of
// any planner bookkeeping: (a) Euler residual per robot per step, (b) action
// bounds, (c) free space, (d) pairwise margins with parking semantics,
// (e) goals reached.
struct Report {
  bool euler_ok = false;
  bool actions_ok = false;
  bool free_space_ok = false;
  bool pairwise_ok = false;
  bool goals_ok = false;
  double max_residual = 0.0;
  double min_pair_margin = 0.0;
  double worst_space_margin = 0.0;
  double max_goal_pos_err = 0.0;
  double max_goal_other_err = 0.0;
  std::string detail;  // first failure, human readable

  bool ok() const {
    return euler_ok && actions_ok && free_space_ok && pairwise_ok && goals_ok;
  }
};

Report check(const TrajectorySet& ts, const ProblemInstance& instance,
             const Tolerances& tol = {});

}  // namespace kinocbs::validate
