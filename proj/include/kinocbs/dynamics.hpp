#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "kinocbs/types.hpp"

namespace kinocbs::dynamics {

inline constexpr double kDefaultDt = 0.1;

// Car-with-trailer geometry constants (meters).
inline constexpr double kCarWheelbase = 0.4;   // tractor wheelbase L_car
inline constexpr double kTrailerHitch = 0.5;   // hitch length L
inline constexpr double kTrailerMaxBend = M_PI / 4.0;  // |theta0 - theta1| cap

// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

// Shortest arc between two angles, in [0, pi].
double angle_diff(double a, double b);

// Indices of angular state components for a robot type.
const std::vector<int>& angle_dims(const RobotType& type);

// Continuous dynamics f(x, u).
Eigen::VectorXd flow(const RobotType& type, const State& x, const Action& u);

// One explicit-Euler step x + f(x,u)*dt with angles re-wrapped.
State step(const RobotType& type, const State& x, const Action& u, double dt);

// Analytic Jacobians of step: A = d step/dx, B = d step/du.
void jacobians(const RobotType& type, const State& x, const Action& u,
               double dt, Eigen::MatrixXd& A, Eigen::MatrixXd& B);

// Weighted Euclidean state metric; angular components measured on SO(2).
double distance(const RobotType& type, const State& a, const State& b,
                const MetricWeights& weights);

// Same metric with positional components ignored (primitive applicability).
MetricWeights zero_position_weights(const RobotType& type,
                                    const MetricWeights& weights);

Bounds default_bounds(const RobotType& type);

// 1.0 on positions, 0.5 on angles, 0.25 on velocities.
MetricWeights default_metric_weights(const RobotType& type);

// Box state bounds plus, for the car with trailer, the hitch-bend cap.
bool state_within_bounds(const RobotType& type, const State& x,
                         const Bounds& bounds);

bool action_within_bounds(const RobotType& type, const Action& u,
                          const Bounds& bounds, double tol = 0.0);

// Uniform sample: positions inside the given workspace extent, angles in
// (-pi, pi], remaining components inside the state bounds.
State sample_state(const RobotType& type, Rng& rng, const Bounds& bounds,
                   const Eigen::Vector2d& ws_lo, const Eigen::Vector2d& ws_hi);

Action sample_action(const RobotType& type, Rng& rng, const Bounds& bounds);

// Largest achievable workspace speed under the given bounds; used by the
// search heuristic, so it must not under-estimate.
double max_speed(const RobotType& type, const Bounds& bounds);

inline void check_dims(const RobotType& type, const State& x, const Action& u) {
  if (x.size() != type.state_dim)
    throw ContractError("state dimension mismatch for " + std::string(type.name()));
  if (u.size() != type.action_dim)
    throw ContractError("action dimension mismatch for " + std::string(type.name()));
}

}  // namespace kinocbs::dynamics
