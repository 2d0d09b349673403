#include "kinocbs/primitives.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>

namespace kinocbs::primitives {

std::vector<std::size_t> PrimitiveSet::query_applicable(const State& x,
                                                        double radius) const {
  const MetricWeights nopos = dynamics::zero_position_weights(robot_type, weights);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    if (dynamics::distance(robot_type, prims[i].states.front(), x, nopos) <=
        radius)
      out.push_back(i);
  }
  return out;
}

PrimitiveSet make_set(const RobotType& type, double dt, std::uint64_t seed) {
  PrimitiveSet ps;
  ps.robot_type = type;
  ps.dt = dt;
  ps.rng_seed = seed;
  ps.weights = dynamics::default_metric_weights(type);
  return ps;
}

std::vector<MotionPrimitive> generate(const RobotType& type, int count,
                                      int k_min, int k_max, std::uint64_t seed,
                                      const Bounds& bounds, double dt) {
  if (count <= 0 || k_min < 1 || k_max < k_min)
    throw ContractError("generate: invalid count or length range");
  Rng rng(seed);
  std::vector<MotionPrimitive> out;
  out.reserve(count);
  const std::int64_t max_attempts = 1000LL * count;
  std::int64_t attempts = 0;
  // canonical starts: position at the origin, everything else sampled
  const Eigen::Vector2d origin(0.0, 0.0);
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > max_attempts)
      throw GenerationError("primitive generation exceeded attempt budget for " +
                            std::string(type.name()));
    State x = dynamics::sample_state(type, rng, bounds, origin, origin);
    const int k = static_cast<int>(rng.uniform_int(k_min, k_max));
    MotionPrimitive m;
    m.states.push_back(x);
    Action u;
    bool ok = true;
    for (int step = 0; step < k; ++step) {
      if (step % 5 == 0) u = dynamics::sample_action(type, rng, bounds);
      x = dynamics::step(type, x, u, dt);
      if (!dynamics::state_within_bounds(type, x, bounds)) {
        ok = false;
        break;
      }
      m.actions.push_back(u);
      m.states.push_back(x);
    }
    if (ok) out.push_back(std::move(m));
  }
  return out;
}

std::vector<State> apply(const State& state, const MotionPrimitive& m) {
  const Eigen::Vector2d offset = state.head<2>() - m.states.front().head<2>();
  std::vector<State> out;
  out.reserve(m.states.size());
  for (const auto& s : m.states) {
    State t = s;
    t.head<2>() += offset;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

YAML::Node vector_node(const Eigen::VectorXd& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (int i = 0; i < v.size(); ++i) n.push_back(v(i));
  return n;
}

Eigen::VectorXd parse_vector(const YAML::Node& n, int expected,
                             const std::string& what) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != expected)
    throw ParseError("primitive file: bad " + what + " (expected " +
                     std::to_string(expected) + " components)");
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v(i) = n[i].as<double>();
  return v;
}

}  // namespace

void save(const PrimitiveSet& ps, const std::string& path) {
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em.SetFloatPrecision(17);
  YAML::Node root;
  root["robot_type"] = std::string(ps.robot_type.name());
  root["dt"] = ps.dt;
  root["rng_seed"] = ps.rng_seed;
  YAML::Node list(YAML::NodeType::Sequence);
  for (const auto& m : ps.prims) {
    YAML::Node pn;
    YAML::Node states(YAML::NodeType::Sequence);
    for (const auto& s : m.states) states.push_back(vector_node(s));
    YAML::Node actions(YAML::NodeType::Sequence);
    for (const auto& a : m.actions) actions.push_back(vector_node(a));
    pn["states"] = states;
    pn["actions"] = actions;
    list.push_back(pn);
  }
  root["primitives"] = list;
  em << root;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << em.c_str() << "\n";
}

PrimitiveSet load(const std::string& path, const RobotType& expected_type,
                  const Bounds& bounds) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ParseError("primitive file " + path + ": " + e.what());
  }
  if (!root["robot_type"] || !root["dt"] || !root["primitives"])
    throw ParseError("primitive file " + path +
                     ": missing robot_type, dt, or primitives");
  const std::string tname = root["robot_type"].as<std::string>();
  const auto type = RobotType::from_name(tname);
  if (!type) throw ParseError("primitive file: unknown robot_type " + tname);
  if (*type != expected_type)
    throw ValidationError("primitive file holds " + tname + ", expected " +
                          std::string(expected_type.name()));
  PrimitiveSet ps = make_set(*type, root["dt"].as<double>(),
                             root["rng_seed"] ? root["rng_seed"].as<std::uint64_t>() : 0);
  std::size_t idx = 0;
  for (const auto& pn : root["primitives"]) {
    MotionPrimitive m;
    if (!pn["states"] || !pn["actions"])
      throw ParseError("primitive " + std::to_string(idx) +
                       ": missing states or actions");
    for (const auto& sn : pn["states"])
      m.states.push_back(parse_vector(sn, type->state_dim,
                                      "state in primitive " + std::to_string(idx)));
    for (const auto& an : pn["actions"])
      m.actions.push_back(parse_vector(an, type->action_dim,
                                       "action in primitive " + std::to_string(idx)));
    if (m.states.size() != m.actions.size() + 1)
      throw ParseError("primitive " + std::to_string(idx) +
                       ": states must be one longer than actions");
    ps.prims.push_back(std::move(m));
    ++idx;
  }
  validate_set(ps, bounds);
  return ps;
}

void validate_set(const PrimitiveSet& ps, const Bounds& bounds) {
  for (std::size_t i = 0; i < ps.prims.size(); ++i) {
    const auto& m = ps.prims[i];
    if (m.states.empty())
      throw ValidationError("primitive " + std::to_string(i) + ": empty");
    for (std::size_t k = 0; k < m.actions.size(); ++k) {
      if (!dynamics::action_within_bounds(ps.robot_type, m.actions[k], bounds,
                                          1e-9))
        throw ValidationError("primitive " + std::to_string(i) + ": action " +
                              std::to_string(k) + " out of bounds");
      const State pred =
          dynamics::step(ps.robot_type, m.states[k], m.actions[k], ps.dt);
      if (dynamics::distance(ps.robot_type, pred, m.states[k + 1], ps.weights) >
          1e-9)
        throw ValidationError("primitive " + std::to_string(i) +
                              ": Euler-inconsistent at step " +
                              std::to_string(k));
    }
  }
}

}  // namespace kinocbs::primitives
