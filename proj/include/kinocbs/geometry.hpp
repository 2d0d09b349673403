#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "kinocbs/types.hpp"

namespace kinocbs::geometry {

struct Disk {
  double radius = 0.1;
};

struct OrientedBox {
  Eigen::Vector2d half_extents{0.1, 0.1};
};

using Shape = std::variant<Disk, OrientedBox>;

struct PlacedShape {
  Shape shape;
  Eigen::Vector2d position{0.0, 0.0};
  double orientation = 0.0;  // radians, (-pi, pi]
};

struct Workspace {
  Eigen::Vector2d lo{0.0, 0.0};
  Eigen::Vector2d hi{1.0, 1.0};
  std::vector<PlacedShape> obstacles;  // axis-aligned boxes in scene files
};

// Robot footprint description used for conflict checking.
struct RobotGeometry {
  RobotType type;
  Shape shape;
};

// Maps a robot state to its collision footprint. Most robots yield one
// placed shape; the car with trailer yields two (tractor, then trailer
// offset backwards by the hitch length at the trailer angle).
std::vector<PlacedShape> place(const RobotType& type, const Shape& shape,
                               const State& state);

// True iff the shapes are fully inside [lo, hi] and intersect no obstacle.
bool in_free_space(const std::vector<PlacedShape>& placed, const Workspace& ws);

// Like in_free_space but with a slack: shapes may penetrate obstacles or the
// boundary by up to tol. Used by validators, not by the search.
bool in_free_space_tol(const std::vector<PlacedShape>& placed,
                       const Workspace& ws, double tol);

// Worst (most negative) clearance of the footprint against workspace walls
// and obstacles; > 0 when strictly free.
double free_space_margin(const std::vector<PlacedShape>& placed,
                         const Workspace& ws);

// Positive Euclidean separation when disjoint, negative penetration depth
// when intersecting. Exact for the two shape kinds used here.
double signed_distance(const PlacedShape& a, const PlacedShape& b);

// Signed distance plus its pose derivatives. grad_pos_a is the direction of
// fastest separation for shape a (and -grad_pos_a for shape b); the angle
// entries are the torque terms about each shape's own center.
struct DistanceResult {
  double distance = 0.0;
  Eigen::Vector2d grad_pos_a{0.0, 0.0};
  double grad_angle_a = 0.0;
  double grad_angle_b = 0.0;
};

DistanceResult signed_distance_grad(const PlacedShape& a, const PlacedShape& b);

// Minimum signed distance over all footprint part pairs of two robots.
double robot_pair_distance(const RobotGeometry& ga, const State& xa,
                           const RobotGeometry& gb, const State& xb);

// Lexicographically-first pair with signed distance < margin, or nullopt.
std::optional<std::pair<std::size_t, std::size_t>> pairwise_clear(
    const std::vector<RobotGeometry>& robots, const std::vector<State>& states,
    double margin);

}  // namespace kinocbs::geometry
