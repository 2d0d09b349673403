#pragma once

#include <string>
#include <vector>

#include "kinocbs/geometry.hpp"
#include "kinocbs/types.hpp"

namespace kinocbs {

struct RobotSpec {
  RobotType type;
  geometry::Shape shape;
  State start;
  State goal;
  Bounds bounds;          // defaults per type unless overridden in config
  MetricWeights weights;  // state metric used for this robot
};

struct ProblemInstance {
  std::string name;
  geometry::Workspace workspace;
  std::vector<RobotSpec> robots;

  geometry::RobotGeometry robot_geometry(std::size_t i) const {
    return {robots[i].type, robots[i].shape};
  }
};

struct RobotTrajectory {
  std::vector<State> states;    // K+1
  std::vector<Action> actions;  // K
  int K() const { return static_cast<int>(actions.size()); }
};

struct TrajectorySet {
  std::vector<RobotTrajectory> robots;
  double dt = 0.1;
  double cost = 0.0;  // sum of K_i * dt
  // metadata
  int iteration = 0;
  double delta = 0.0;
  double wall_time_s = 0.0;

  double recompute_cost() const {
    double c = 0.0;
    for (const auto& r : robots) c += r.K() * dt;
    return c;
  }
};

}  // namespace kinocbs
