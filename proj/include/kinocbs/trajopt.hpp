#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kinocbs/problem.hpp"
#include "kinocbs/types.hpp"

namespace kinocbs::trajopt {

struct OptWeights {
  double beta = 0.01;            // control regularization
  double penalty_init = 10.0;    // squared-penalty weight, first round
  double penalty_mult = 5.0;     // multiplier per outer round
  int max_rounds = 8;
  double goal_tol_pos = 1e-3;    // meters
  double goal_tol_other = 1e-2;  // radians / m/s
  double collision_margin = 0.01;  // hinge margin for the penalty terms
  double margin_tol = 1e-4;      // feasibility: min margin >= -margin_tol
  double state_tol = 1e-4;       // state-bound hinge slack
  double dyn_tol = 1e-6;
  int max_inner_iters = 400;
  // Time-step box as factors of the nominal dt.
  double dt_lo_factor = 0.5;
  double dt_hi_factor = 2.0;
};

// Initial guess: per-robot horizons and actions; states are re-derived by
// shooting, so only endpoints of the instance and the actions matter.
struct JointGuess {
  std::vector<RobotTrajectory> robots;
  double dt = 0.1;
};

struct FeasReport {
  double max_dyn_residual = 0.0;
  double min_margin = 0.0;        // worst of robot-robot and free-space margins
  double max_goal_pos_err = 0.0;  // worst robot, Euclidean over position
  double max_goal_other_err = 0.0;
  double max_action_violation = 0.0;
  double max_state_violation = 0.0;
  std::string worst_note;  // which class failed and where

  bool pass(const OptWeights& w) const {
    return max_dyn_residual <= w.dyn_tol && min_margin >= -w.margin_tol &&
           max_goal_pos_err <= w.goal_tol_pos &&
           max_goal_other_err <= w.goal_tol_other &&
           max_action_violation <= 1e-9 && max_state_violation <= w.state_tol;
  }
};

struct OptimizedSolution {
  std::vector<RobotTrajectory> robots;
  double dt = 0.1;
  double objective = 0.0;  // sum_i sum_k (dt + beta*|u|^2), unpenalized
  FeasReport report;
};

struct OptResult {
  bool success = false;
  OptimizedSolution solution;  // best effort on failure
  std::string failure;
  std::vector<double> round_violations;  // total squared violation per round
};

OptResult optimize(const JointGuess& guess, const ProblemInstance& instance,
                   const OptWeights& weights);

// Shooting structure shared by optimize() and the gradient test surface:
// decision variables are all action sequences flattened robot-by-robot,
// followed by the single shared dt.
struct ShootingProblem {
  const ProblemInstance* instance = nullptr;
  std::vector<int> horizons;  // K_i
  double dt_nominal = 0.1;
  OptWeights weights;
  double penalty = 10.0;

  int num_vars() const;
  Eigen::VectorXd pack(const std::vector<RobotTrajectory>& robots,
                       double dt) const;
  void unpack(const Eigen::VectorXd& vars,
              std::vector<std::vector<Action>>& actions, double& dt) const;
  void project(Eigen::VectorXd& vars) const;
};

// Penalized objective and its exact analytic gradient under the shooting
// parameterization (states eliminated by rollout).
double objective_and_gradient(const ShootingProblem& sp,
                              const Eigen::VectorXd& vars,
                              Eigen::VectorXd* grad);

// Raw (unweighted) total squared constraint violation at this point.
double total_violation(const ShootingProblem& sp, const Eigen::VectorXd& vars);

// Independent re-validation of dynamics, bounds, free space, inter-robot
// clearance (with parking) and goal attainment for a proposed solution.
FeasReport feasibility_report(const std::vector<RobotTrajectory>& robots,
                              double dt, const ProblemInstance& instance,
                              const OptWeights& weights);

}  // namespace kinocbs::trajopt
