#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kinocbs/bench.hpp"
#include "kinocbs/cbs.hpp"
#include "kinocbs/dbastar.hpp"
#include "kinocbs/dynamics.hpp"
#include "kinocbs/primitives.hpp"
#include "kinocbs/scenario.hpp"
#include "kinocbs/trajopt.hpp"
#include "kinocbs/validate.hpp"

namespace py = pybind11;
using namespace kinocbs;

namespace {

RobotType type_from_name(const std::string& name) {
  const auto type = RobotType::from_name(name);
  if (!type) throw py::value_error("unknown robot type '" + name + "'");
  return *type;
}

py::dict trajectory_set_to_dict(const TrajectorySet& ts) {
  py::dict out;
  out["dt"] = ts.dt;
  out["cost"] = ts.cost;
  out["iteration"] = ts.iteration;
  out["delta"] = ts.delta;
  out["wall_time_s"] = ts.wall_time_s;
  py::list robots;
  for (const auto& tr : ts.robots) {
    py::dict r;
    r["states"] = tr.states;
    r["actions"] = tr.actions;
    robots.append(r);
  }
  out["robots"] = robots;
  return out;
}

TrajectorySet trajectory_set_from_dict(const py::dict& d) {
  TrajectorySet ts;
  ts.dt = d["dt"].cast<double>();
  for (const auto& item : d["robots"].cast<py::list>()) {
    const auto r = item.cast<py::dict>();
    RobotTrajectory tr;
    tr.states = r["states"].cast<std::vector<State>>();
    tr.actions = r["actions"].cast<std::vector<Action>>();
    ts.robots.push_back(std::move(tr));
  }
  ts.cost = d.contains("cost") ? d["cost"].cast<double>() : ts.recompute_cost();
  return ts;
}

py::dict validation_to_dict(const validate::Report& rep) {
  py::dict out;
  out["ok"] = rep.ok();
  out["euler_ok"] = rep.euler_ok;
  out["actions_ok"] = rep.actions_ok;
  out["free_space_ok"] = rep.free_space_ok;
  out["pairwise_ok"] = rep.pairwise_ok;
  out["goals_ok"] = rep.goals_ok;
  out["max_residual"] = rep.max_residual;
  out["min_pair_margin"] = rep.min_pair_margin;
  out["detail"] = rep.detail;
  return out;
}

cbs::PlannerConfig config_from_kwargs(const py::kwargs& kw) {
  cbs::PlannerConfig cfg;
  for (const auto& item : kw) {
    const auto key = item.first.cast<std::string>();
    if (key == "delta0") cfg.delta0 = item.second.cast<double>();
    else if (key == "delta_rate") cfg.delta_rate = item.second.cast<double>();
    else if (key == "alpha") cfg.alpha = item.second.cast<double>();
    else if (key == "primitives0") cfg.primitives0 = item.second.cast<int>();
    else if (key == "max_primitives") cfg.max_primitives = item.second.cast<int>();
    else if (key == "time_limit") cfg.time_limit_s = item.second.cast<double>();
    else if (key == "margin") cfg.margin = item.second.cast<double>();
    else if (key == "max_hl_expansions") cfg.max_hl_expansions = item.second.cast<int>();
    else if (key == "seed") cfg.seed = item.second.cast<std::uint64_t>();
    else if (key == "dt") cfg.dt = item.second.cast<double>();
    else if (key == "primitive_files")
      cfg.primitive_files = item.second.cast<std::map<std::string, std::string>>();
    else
      throw py::value_error("unknown solve option '" + key + "'");
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_kinocbs, m) {
  m.doc() = "multi-robot kinodynamic motion planner";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  m.def("robot_types", [] {
    std::vector<std::string> out;
    for (const auto& t : all_robot_types()) out.emplace_back(t.name());
    return out;
  });

  // dynamics
  m.def(
      "step",
      [](const std::string& type, const State& x, const Action& u, double dt) {
        return dynamics::step(type_from_name(type), x, u, dt);
      },
      py::arg("robot_type"), py::arg("state"), py::arg("action"),
      py::arg("dt") = dynamics::kDefaultDt);
  m.def(
      "jacobians",
      [](const std::string& type, const State& x, const Action& u, double dt) {
        Eigen::MatrixXd A, B;
        dynamics::jacobians(type_from_name(type), x, u, dt, A, B);
        return py::make_tuple(A, B);
      },
      py::arg("robot_type"), py::arg("state"), py::arg("action"),
      py::arg("dt") = dynamics::kDefaultDt);
  m.def(
      "distance",
      [](const std::string& type_name, const State& a, const State& b,
         std::optional<Eigen::VectorXd> weights) {
        const auto type = type_from_name(type_name);
        MetricWeights w = dynamics::default_metric_weights(type);
        if (weights) w.w = *weights;
        return dynamics::distance(type, a, b, w);
      },
      py::arg("robot_type"), py::arg("a"), py::arg("b"),
      py::arg("weights") = std::nullopt);
  m.def("state_dim", [](const std::string& t) { return type_from_name(t).state_dim; });
  m.def("action_dim", [](const std::string& t) { return type_from_name(t).action_dim; });

  // primitives
  py::class_<primitives::PrimitiveSet>(m, "PrimitiveSet")
      .def_property_readonly("size",
                             [](const primitives::PrimitiveSet& ps) {
                               return ps.prims.size();
                             })
      .def_property_readonly("dt",
                             [](const primitives::PrimitiveSet& ps) { return ps.dt; })
      .def("states",
           [](const primitives::PrimitiveSet& ps, std::size_t i) {
             return ps.prims.at(i).states;
           })
      .def("actions",
           [](const primitives::PrimitiveSet& ps, std::size_t i) {
             return ps.prims.at(i).actions;
           })
      .def("query_applicable",
           [](const primitives::PrimitiveSet& ps, const State& x, double radius) {
             return ps.query_applicable(x, radius);
           });
  m.def(
      "generate_primitives",
      [](const std::string& type_name, int count, int k_min, int k_max,
         std::uint64_t seed, double dt) {
        const auto type = type_from_name(type_name);
        auto ps = primitives::make_set(type, dt, seed);
        ps.prims = primitives::generate(type, count, k_min, k_max, seed,
                                        dynamics::default_bounds(type), dt);
        return ps;
      },
      py::arg("robot_type"), py::arg("count"), py::arg("k_min") = 5,
      py::arg("k_max") = 30, py::arg("seed") = 0,
      py::arg("dt") = dynamics::kDefaultDt);
  m.def("save_primitives", [](const primitives::PrimitiveSet& ps,
                              const std::string& path) { primitives::save(ps, path); });
  m.def("load_primitives", [](const std::string& path, const std::string& type_name) {
    const auto type = type_from_name(type_name);
    return primitives::load(path, type, dynamics::default_bounds(type));
  });

  // scenes and solutions
  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_property_readonly("name",
                             [](const ProblemInstance& p) { return p.name; })
      .def_property_readonly("num_robots",
                             [](const ProblemInstance& p) { return p.robots.size(); })
      .def("robot_type",
           [](const ProblemInstance& p, std::size_t i) {
             return std::string(p.robots.at(i).type.name());
           })
      .def("start", [](const ProblemInstance& p,
                       std::size_t i) { return p.robots.at(i).start; })
      .def("goal", [](const ProblemInstance& p,
                      std::size_t i) { return p.robots.at(i).goal; });
  m.def("parse_instance", &scenario::parse_instance);
  m.def("parse_instance_string", &scenario::parse_instance_string,
        py::arg("text"), py::arg("label") = "<string>");
  m.def("read_solution", [](const std::string& path) {
    return trajectory_set_to_dict(scenario::read_solution(path));
  });
  m.def("write_solution", [](const py::dict& sol, const std::string& path) {
    scenario::write_solution(trajectory_set_from_dict(sol), path);
  });
  m.def(
      "render_svg",
      [](const ProblemInstance& inst, std::optional<py::dict> sol,
         const std::string& path) {
        if (sol) {
          const auto ts = trajectory_set_from_dict(*sol);
          scenario::render_svg(inst, &ts, path);
        } else {
          scenario::render_svg(inst, nullptr, path);
        }
      },
      py::arg("instance"), py::arg("solution"), py::arg("path"));
  m.def("validate_solution", [](const ProblemInstance& inst, const py::dict& sol) {
    return validation_to_dict(validate::check(trajectory_set_from_dict(sol), inst));
  });

  // planning
  m.def(
      "solve",
      [](const ProblemInstance& inst, const py::kwargs& kw) {
        const auto cfg = config_from_kwargs(kw);
        py::list emissions;
        cbs::SolveReport report;
        {
          py::gil_scoped_release release;
          report = cbs::solve(inst, cfg,
                              [&](const TrajectorySet& ts, double, int) {
                                py::gil_scoped_acquire acquire;
                                emissions.append(trajectory_set_to_dict(ts));
                              });
        }
        py::dict out;
        out["solved"] = report.solved;
        out["best_cost"] = report.best_cost;
        out["wall_time_s"] = report.wall_time_s;
        out["emissions"] = emissions;
        py::list iters;
        for (const auto& it : report.iterations) {
          py::dict d;
          d["iteration"] = it.iteration;
          d["delta"] = it.delta;
          d["expansions"] = it.hl_expansions;
          d["conflicts"] = it.conflicts_resolved;
          d["optimizer_failures"] = it.optimizer_failures;
          d["first_conflict_free_cost"] = it.first_conflict_free_cost;
          d["root_built"] = it.root_built;
          iters.append(d);
        }
        out["iterations"] = iters;
        if (!report.solved) out["failure_reason"] = report.failure_reason;
        return out;
      },
      py::arg("instance"));
}
