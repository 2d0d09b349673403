#include "kinocbs/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "kinocbs/dynamics.hpp"

namespace kinocbs::scenario {

namespace {

Eigen::VectorXd node_to_vector(const YAML::Node& n, int expected,
                               const std::string& what) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != expected)
    throw ParseError(what + ": expected a sequence of " +
                     std::to_string(expected) + " numbers");
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v(i) = n[i].as<double>();
  return v;
}

YAML::Node vector_to_node(const Eigen::VectorXd& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  for (int i = 0; i < v.size(); ++i) n.push_back(v(i));
  return n;
}

ProblemInstance parse_instance_node(const YAML::Node& root,
                                    const std::string& label) {
  ProblemInstance inst;
  inst.name = root["name"] ? root["name"].as<std::string>() : "";
  const auto env = root["environment"];
  if (!env) throw ParseError(label + ": missing environment");
  if (!env["min"] || !env["max"])
    throw ParseError(label + ": environment needs min and max");
  const auto lo = node_to_vector(env["min"], 2, label + ": environment.min");
  const auto hi = node_to_vector(env["max"], 2, label + ": environment.max");
  inst.workspace.lo = lo.head<2>();
  inst.workspace.hi = hi.head<2>();
  if (!(inst.workspace.lo(0) < inst.workspace.hi(0) &&
        inst.workspace.lo(1) < inst.workspace.hi(1)))
    throw ValidationError(label + ": workspace min must be below max");
  if (env["obstacles"]) {
    for (const auto& on : env["obstacles"]) {
      const std::string type =
          on["type"] ? on["type"].as<std::string>() : "box";
      if (type != "box")
        throw ParseError(label + ": only box obstacles are supported");
      const auto center = node_to_vector(on["center"], 2, label + ": obstacle center");
      const auto size = node_to_vector(on["size"], 2, label + ": obstacle size");
      if (size(0) <= 0 || size(1) <= 0)
        throw ValidationError(label + ": obstacle size must be positive");
      geometry::PlacedShape p;
      p.shape = geometry::OrientedBox{Eigen::Vector2d(size / 2.0)};
      p.position = center.head<2>();
      p.orientation = 0.0;
      inst.workspace.obstacles.push_back(p);
    }
  }
  if (!root["robots"] || root["robots"].size() == 0)
    throw ParseError(label + ": missing robots");
  int idx = 0;
  for (const auto& rn : root["robots"]) {
    RobotSpec spec;
    const std::string rlabel = label + ": robot " + std::to_string(idx);
    if (!rn["type"]) throw ParseError(rlabel + ": missing type");
    const auto type = RobotType::from_name(rn["type"].as<std::string>());
    if (!type)
      throw ParseError(rlabel + ": unknown robot type '" +
                       rn["type"].as<std::string>() + "'");
    spec.type = *type;
    const auto sn = rn["shape"];
    if (!sn) throw ParseError(rlabel + ": missing shape");
    if (sn["disk"]) {
      const double r = sn["disk"].as<double>();
      if (r <= 0) throw ValidationError(rlabel + ": disk radius must be positive");
      spec.shape = geometry::Disk{r};
    } else if (sn["box"]) {
      const auto ext = node_to_vector(sn["box"], 2, rlabel + ": shape.box");
      if (ext(0) <= 0 || ext(1) <= 0)
        throw ValidationError(rlabel + ": box extents must be positive");
      spec.shape = geometry::OrientedBox{Eigen::Vector2d(ext / 2.0)};
    } else {
      throw ParseError(rlabel + ": shape must be {disk: r} or {box: [lx, ly]}");
    }
    spec.start = node_to_vector(rn["start"], spec.type.state_dim, rlabel + ": start");
    spec.goal = node_to_vector(rn["goal"], spec.type.state_dim, rlabel + ": goal");
    for (int d : dynamics::angle_dims(spec.type)) {
      spec.start(d) = dynamics::wrap_angle(spec.start(d));
      spec.goal(d) = dynamics::wrap_angle(spec.goal(d));
    }
    spec.bounds = dynamics::default_bounds(spec.type);
    spec.weights = dynamics::default_metric_weights(spec.type);
    inst.robots.push_back(std::move(spec));
    ++idx;
  }

  // invariants
  for (std::size_t i = 0; i < inst.robots.size(); ++i) {
    const auto& spec = inst.robots[i];
    if (!geometry::in_free_space(
            geometry::place(spec.type, spec.shape, spec.start), inst.workspace))
      throw ValidationError("start of robot " + std::to_string(i) +
                            " in collision");
    if (!geometry::in_free_space(
            geometry::place(spec.type, spec.shape, spec.goal), inst.workspace))
      throw ValidationError("goal of robot " + std::to_string(i) +
                            " in collision");
    if (!dynamics::state_within_bounds(spec.type, spec.start, spec.bounds))
      throw ValidationError("start of robot " + std::to_string(i) +
                            " violates state bounds");
    if (!dynamics::state_within_bounds(spec.type, spec.goal, spec.bounds))
      throw ValidationError("goal of robot " + std::to_string(i) +
                            " violates state bounds");
  }
  for (std::size_t i = 0; i + 1 < inst.robots.size(); ++i) {
    for (std::size_t j = i + 1; j < inst.robots.size(); ++j) {
      if (geometry::robot_pair_distance(inst.robot_geometry(i),
                                        inst.robots[i].start,
                                        inst.robot_geometry(j),
                                        inst.robots[j].start) <= 0.0)
        throw ValidationError("starts of robots " + std::to_string(i) + " and " +
                              std::to_string(j) + " are in collision");
      if (geometry::robot_pair_distance(inst.robot_geometry(i),
                                        inst.robots[i].goal,
                                        inst.robot_geometry(j),
                                        inst.robots[j].goal) <= 0.0)
        throw ValidationError("goals of robots " + std::to_string(i) + " and " +
                              std::to_string(j) + " are in collision");
    }
  }
  return inst;
}

}  // namespace

ProblemInstance parse_instance(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_instance_node(root, path);
}

ProblemInstance parse_instance_string(const std::string& text,
                                      const std::string& label) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(label + ": " + e.what());
  }
  return parse_instance_node(root, label);
}

void write_instance(const ProblemInstance& instance, const std::string& path) {
  YAML::Node root;
  if (!instance.name.empty()) root["name"] = instance.name;
  root["environment"]["min"] = vector_to_node(instance.workspace.lo);
  root["environment"]["max"] = vector_to_node(instance.workspace.hi);
  for (const auto& obs : instance.workspace.obstacles) {
    YAML::Node on;
    on["type"] = "box";
    on["center"] = vector_to_node(obs.position);
    const auto& he = std::get<geometry::OrientedBox>(obs.shape).half_extents;
    on["size"] = vector_to_node(Eigen::Vector2d(2.0 * he));
    root["environment"]["obstacles"].push_back(on);
  }
  for (const auto& spec : instance.robots) {
    YAML::Node rn;
    rn["type"] = std::string(spec.type.name());
    if (std::holds_alternative<geometry::Disk>(spec.shape)) {
      rn["shape"]["disk"] = std::get<geometry::Disk>(spec.shape).radius;
    } else {
      const auto& he = std::get<geometry::OrientedBox>(spec.shape).half_extents;
      rn["shape"]["box"] = vector_to_node(Eigen::Vector2d(2.0 * he));
    }
    rn["start"] = vector_to_node(spec.start);
    rn["goal"] = vector_to_node(spec.goal);
    root["robots"].push_back(rn);
  }
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << root;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << em.c_str() << "\n";
}

void write_solution(const TrajectorySet& ts, const std::string& path) {
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  YAML::Node root;
  root["dt"] = ts.dt;
  root["cost"] = ts.cost;
  root["metadata"]["iteration"] = ts.iteration;
  root["metadata"]["delta"] = ts.delta;
  root["metadata"]["wall_time_s"] = ts.wall_time_s;
  YAML::Node rl(YAML::NodeType::Sequence);
  for (const auto& tr : ts.robots) {
    YAML::Node rn;
    YAML::Node states(YAML::NodeType::Sequence);
    for (const auto& s : tr.states) states.push_back(vector_to_node(s));
    YAML::Node actions(YAML::NodeType::Sequence);
    for (const auto& a : tr.actions) actions.push_back(vector_to_node(a));
    rn["states"] = states;
    rn["actions"] = actions;
    rl.push_back(rn);
  }
  root["robots"] = rl;
  em << root;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << em.c_str() << "\n";
}

TrajectorySet read_solution(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!root["dt"] || !root["cost"] || !root["robots"])
    throw ParseError(path + ": missing dt, cost, or robots");
  TrajectorySet ts;
  ts.dt = root["dt"].as<double>();
  ts.cost = root["cost"].as<double>();
  if (root["metadata"]) {
    const auto md = root["metadata"];
    if (md["iteration"]) ts.iteration = md["iteration"].as<int>();
    if (md["delta"]) ts.delta = md["delta"].as<double>();
    if (md["wall_time_s"]) ts.wall_time_s = md["wall_time_s"].as<double>();
  }
  if (root["robots"].size() == 0)
    throw ParseError(path + ": robot list must not be empty");
  for (const auto& rn : root["robots"]) {
    RobotTrajectory tr;
    for (const auto& sn : rn["states"]) {
      Eigen::VectorXd v(sn.size());
      for (std::size_t i = 0; i < sn.size(); ++i) v(i) = sn[i].as<double>();
      tr.states.push_back(std::move(v));
    }
    for (const auto& an : rn["actions"]) {
      Eigen::VectorXd v(an.size());
      for (std::size_t i = 0; i < an.size(); ++i) v(i) = an[i].as<double>();
      tr.actions.push_back(std::move(v));
    }
    if (tr.states.size() != tr.actions.size() + 1)
      throw ParseError(path + ": states must be one longer than actions");
    ts.robots.push_back(std::move(tr));
  }
  if (std::abs(ts.recompute_cost() - ts.cost) > 1e-9)
    throw ValidationError(path + ": stored cost " + std::to_string(ts.cost) +
                          " does not match recomputed cost " +
                          std::to_string(ts.recompute_cost()));
  return ts;
}

cbs::PlannerConfig parse_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  cbs::PlannerConfig cfg;
  auto get = [&](const char* key, auto& out) {
    if (root[key]) out = root[key].as<std::decay_t<decltype(out)>>();
  };
  get("delta0", cfg.delta0);
  get("delta_rate", cfg.delta_rate);
  get("alpha", cfg.alpha);
  get("primitives0", cfg.primitives0);
  get("max_primitives", cfg.max_primitives);
  get("time_limit", cfg.time_limit_s);
  get("margin", cfg.margin);
  get("max_hl_expansions", cfg.max_hl_expansions);
  get("prim_k_min", cfg.prim_k_min);
  get("prim_k_max", cfg.prim_k_max);
  get("dt", cfg.dt);
  get("seed", cfg.seed);
  if (root["optimizer"]) {
    const auto on = root["optimizer"];
    auto geto = [&](const char* key, auto& out) {
      if (on[key]) out = on[key].as<std::decay_t<decltype(out)>>();
    };
    geto("beta", cfg.opt.beta);
    geto("penalty_init", cfg.opt.penalty_init);
    geto("penalty_mult", cfg.opt.penalty_mult);
    geto("max_rounds", cfg.opt.max_rounds);
    geto("goal_tol_pos", cfg.opt.goal_tol_pos);
    geto("goal_tol_other", cfg.opt.goal_tol_other);
    geto("collision_margin", cfg.opt.collision_margin);
    geto("max_inner_iters", cfg.opt.max_inner_iters);
    geto("dt_lo_factor", cfg.opt.dt_lo_factor);
    geto("dt_hi_factor", cfg.opt.dt_hi_factor);
  }
  if (root["primitive_files"]) {
    for (const auto& kv : root["primitive_files"])
      cfg.primitive_files[kv.first.as<std::string>()] =
          kv.second.as<std::string>();
  }
  if (cfg.delta0 <= 0) throw ValidationError(path + ": delta0 must be positive");
  if (cfg.delta_rate <= 0 || cfg.delta_rate >= 1)
    throw ValidationError(path + ": delta_rate must be in (0, 1)");
  return cfg;
}

namespace {

// fixed palette of distinguishable colors
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#e377c2", "#17becf",
                         "#bcbd22", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void render_svg(const ProblemInstance& instance, const TrajectorySet* ts,
                const std::string& path) {
  const auto& ws = instance.workspace;
  const double scale = 120.0;
  const double pad = 12.0;
  const double w = (ws.hi(0) - ws.lo(0)) * scale + 2 * pad;
  const double h = (ws.hi(1) - ws.lo(1)) * scale + 2 * pad;
  auto X = [&](double x) { return pad + (x - ws.lo(0)) * scale; };
  auto Y = [&](double y) { return h - pad - (y - ws.lo(1)) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w)
      << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " "
      << fmt(h) << "\">\n";
  svg << "<rect x=\"" << fmt(X(ws.lo(0))) << "\" y=\"" << fmt(Y(ws.hi(1)))
      << "\" width=\"" << fmt((ws.hi(0) - ws.lo(0)) * scale) << "\" height=\""
      << fmt((ws.hi(1) - ws.lo(1)) * scale)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  for (const auto& obs : instance.workspace.obstacles) {
    const auto& he = std::get<geometry::OrientedBox>(obs.shape).half_extents;
    svg << "<rect x=\"" << fmt(X(obs.position(0) - he(0))) << "\" y=\""
        << fmt(Y(obs.position(1) + he(1))) << "\" width=\""
        << fmt(2 * he(0) * scale) << "\" height=\"" << fmt(2 * he(1) * scale)
        << "\" fill=\"#555555\"/>\n";
  }

  auto draw_footprint = [&](const RobotSpec& spec, const State& x,
                            const char* color, double opacity) {
    for (const auto& p : geometry::place(spec.type, spec.shape, x)) {
      if (std::holds_alternative<geometry::Disk>(p.shape)) {
        svg << "<circle cx=\"" << fmt(X(p.position(0))) << "\" cy=\""
            << fmt(Y(p.position(1))) << "\" r=\""
            << fmt(std::get<geometry::Disk>(p.shape).radius * scale)
            << "\" fill=\"" << color << "\" fill-opacity=\"" << fmt(opacity)
            << "\" stroke=\"none\"/>\n";
      } else {
        const auto& he = std::get<geometry::OrientedBox>(p.shape).half_extents;
        svg << "<rect x=\"" << fmt(-he(0) * scale) << "\" y=\""
            << fmt(-he(1) * scale) << "\" width=\"" << fmt(2 * he(0) * scale)
            << "\" height=\"" << fmt(2 * he(1) * scale) << "\" fill=\"" << color
            << "\" fill-opacity=\"" << fmt(opacity) << "\" transform=\"translate("
            << fmt(X(p.position(0))) << " " << fmt(Y(p.position(1)))
            << ") rotate(" << fmt(-p.orientation * 180.0 / M_PI) << ")\"/>\n";
      }
    }
  };

  for (std::size_t i = 0; i < instance.robots.size(); ++i) {
    const char* color = kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
    const auto& spec = instance.robots[i];
    draw_footprint(spec, spec.start, color, 0.85);
    draw_footprint(spec, spec.goal, color, 0.25);
    if (ts != nullptr && i < ts->robots.size()) {
      const auto& tr = ts->robots[i];
      const int stride = std::max(1, tr.K() / 12);
      for (int k = stride; k < tr.K(); k += stride)
        draw_footprint(spec, tr.states[k], color, 0.10);
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
      for (const auto& s : tr.states)
        svg << fmt(X(s(0))) << "," << fmt(Y(s(1))) << " ";
      svg << "\"/>\n";
    }
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
}

}  // namespace kinocbs::scenario
