#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinocbs/dynamics.hpp"
#include "kinocbs/types.hpp"

namespace kinocbs::primitives {

// A dynamics-consistent rollout in canonical form: states[0] starts at the
// origin, states[k+1] = step(states[k], actions[k], dt) exactly.
struct MotionPrimitive {
  std::vector<State> states;    // length K+1
  std::vector<Action> actions;  // length K
  int length() const { return static_cast<int>(actions.size()); }
  double duration(double dt) const { return length() * dt; }
};

// Thrown when rejection sampling cannot produce enough in-bounds rollouts.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrimitiveSet {
  RobotType robot_type;
  double dt = dynamics::kDefaultDt;
  std::uint64_t rng_seed = 0;
  MetricWeights weights;  // full metric; start matching zeroes the position
  std::vector<MotionPrimitive> prims;

  // Indices of primitives whose canonical start is within `radius` of x
  // under the position-ignoring metric. Exact linear scan.
  std::vector<std::size_t> query_applicable(const State& x, double radius) const;
};

PrimitiveSet make_set(const RobotType& type, double dt, std::uint64_t seed);

// Random-rollout generation: canonical start (origin position, other
// components uniform in bounds), K uniform in [k_min, k_max], piecewise
// constant actions resampled every 5 steps. Rollouts leaving the state
// bounds are rejected and resampled.
std::vector<MotionPrimitive> generate(const RobotType& type, int count,
                                      int k_min, int k_max, std::uint64_t seed,
                                      const Bounds& bounds,
                                      double dt = dynamics::kDefaultDt);

// Translate the primitive so its start position coincides with state's
// position. Non-positional components are left as stored; the gap between
// `state` and the returned first state is the discontinuity delta bounds.
std::vector<State> apply(const State& state, const MotionPrimitive& m);

void save(const PrimitiveSet& ps, const std::string& path);

// Loads and validates: robot type must match, every primitive must be
// Euler-consistent and within action bounds.
PrimitiveSet load(const std::string& path, const RobotType& expected_type,
                  const Bounds& bounds);

// Validation shared by load() and tests; throws ValidationError naming the
// first offending primitive.
void validate_set(const PrimitiveSet& ps, const Bounds& bounds);

}  // namespace kinocbs::primitives
