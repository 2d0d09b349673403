#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kinocbs {

using State = Eigen::VectorXd;
using Action = Eigen::VectorXd;

// Thrown on dimension mismatches and other broken call contracts.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (scene, solution, primitive set).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a documented invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RobotTypeTag {
  Unicycle1,
  Unicycle2,
  DoubleIntegrator2D,
  CarWithTrailer,
};

struct RobotType {
  RobotTypeTag tag = RobotTypeTag::Unicycle1;
  int state_dim = 3;
  int action_dim = 2;

  static RobotType from_tag(RobotTypeTag tag);
  // Accepts the scene-file names: "unicycle1", "unicycle2",
  // "double_integrator2", "car_with_trailer".
  static std::optional<RobotType> from_name(std::string_view name);
  const char* name() const;

  bool operator==(const RobotType& other) const { return tag == other.tag; }
  bool operator!=(const RobotType& other) const { return tag != other.tag; }
};

std::vector<RobotType> all_robot_types();

// Box bounds on states and actions. Angular state components are unbounded
// (they wrap) and carry +-inf here.
struct Bounds {
  Eigen::VectorXd state_lo, state_hi;
  Eigen::VectorXd action_lo, action_hi;
};

// Per-component nonnegative weights for the state-space metric.
struct MetricWeights {
  Eigen::VectorXd w;
};

// Deterministic RNG stream. mt19937_64 output mapped to doubles by hand so
// sequences do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform01() * static_cast<double>(hi - lo + 1));
  }
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stable mixing for deriving per-purpose seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace kinocbs
