#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <deque>

#include "kinocbs/cbs.hpp"
#include "kinocbs/dynamics.hpp"
#include "kinocbs/scenario.hpp"
#include "kinocbs/validate.hpp"
#include "lattice_util.hpp"
#include "test_util.hpp"

using namespace kinocbs;
namespace dyn = kinocbs::dynamics;

namespace {

dbastar::DbSolution line_solution(double x0, double y0, double x1, double y1,
                                  int steps) {
  // straight unicycle ride, dynamics-consistency irrelevant for conflict scans
  dbastar::DbSolution sol;
  for (int k = 0; k <= steps; ++k) {
    State s(3);
    const double t = static_cast<double>(k) / steps;
    s << x0 + t * (x1 - x0), y0 + t * (y1 - y0), 0.0;
    sol.states.push_back(s);
  }
  sol.actions.assign(steps, Eigen::Vector2d(0.0, 0.0));
  return sol;
}

}  // namespace

TEST_CASE("compute_delta: geometric schedule") {
  cbs::PlannerConfig cfg;
  cfg.delta0 = 0.5;
  cfg.delta_rate = 0.5;
  CHECK(cbs::compute_delta(cfg, 1) == doctest::Approx(0.5));
  CHECK(cbs::compute_delta(cfg, 3) == doctest::Approx(0.125));
  double prev = 1e18;
  for (int n = 1; n < 40; ++n) {
    const double d = cbs::compute_delta(cfg, n);
    REQUIRE(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-9);
}

TEST_CASE("get_earliest_conflict: parallel, earliest, parked") {
  const auto uni = RobotType::from_tag(RobotTypeTag::Unicycle1);
  std::vector<geometry::RobotGeometry> geos(2, {uni, geometry::Disk{0.2}});

  SUBCASE("parallel non-overlapping lines have no conflict") {
    std::vector<dbastar::DbSolution> sols{line_solution(0, 0, 3, 0, 20),
                                          line_solution(0, 1, 3, 1, 20)};
    CHECK_FALSE(cbs::get_earliest_conflict(sols, geos, 0.0).has_value());
  }
  SUBCASE("two crossings report the earlier timestep") {
    // 0.25 m/step head-on: gap 2 - 0.5k drops below the 0.4 contact gap
    // first at k = 4 (exact in binary)
    std::vector<dbastar::DbSolution> sols{line_solution(0, 0, 2, 0, 8),
                                          line_solution(2, 0, 0, 0, 8)};
    const auto c = cbs::get_earliest_conflict(sols, geos, 0.0);
    REQUIRE(c.has_value());
    CHECK(c->time == 4);
    CHECK(c->i == 0);
    CHECK(c->j == 1);
  }
  SUBCASE("a parked robot is hit at the later robot's traversal time") {
    std::vector<dbastar::DbSolution> sols{line_solution(0, 0, 1, 0, 5),
                                          line_solution(3, 0, 0.5, 0, 18)};
    const auto c = cbs::get_earliest_conflict(sols, geos, 0.0);
    REQUIRE(c.has_value());
    CHECK(c->time > 5);  // robot 0 finished at k=5 and is parked at (1, 0)
    CHECK((c->xi.head<2>() - Eigen::Vector2d(1, 0)).norm() <= 1e-12);
  }
}

TEST_CASE("branch: constraint bookkeeping and infeasible children") {
  cbs::HighLevelNode parent;
  parent.solutions = {line_solution(0, 0, 2, 0, 10), line_solution(2, 0, 0, 0, 10)};
  parent.cost = 2.0;
  cbs::Conflict conflict;
  conflict.i = 0;
  conflict.j = 1;
  conflict.xi = parent.solutions[0].states[5];
  conflict.xj = parent.solutions[1].states[5];
  conflict.time = 5;

  SUBCASE("both children constrain the right robot, the other is untouched") {
    const auto children = cbs::branch(
        parent, conflict, 0.1, [&](int robot, const auto& cons) {
          CHECK(cons.size() == 1);
          CHECK(cons[0].robot == robot);
          return line_solution(0, 0, 2, 0, 14);  // any replacement
        });
    REQUIRE(children.size() == 2);
    CHECK(children[0].constraints.size() == 1);
    CHECK(children[0].constraints[0].robot == 0);
    CHECK(children[1].constraints[0].robot == 1);
    // the unconstrained robot's solution is value-identical to the parent's
    for (std::size_t k = 0; k < parent.solutions[1].states.size(); ++k)
      REQUIRE((children[0].solutions[1].states[k] -
               parent.solutions[1].states[k])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    // replanning under an extra constraint cannot get cheaper
    for (const auto& child : children) REQUIRE(child.cost >= parent.cost - 1e-12);
  }
  SUBCASE("infeasible replans drop the child") {
    const auto children = cbs::branch(
        parent, conflict, 0.1, [&](int robot, const auto&) {
          if (robot == 0) return std::optional<dbastar::DbSolution>{};
          return std::optional<dbastar::DbSolution>{line_solution(2, 0, 0, 0, 12)};
        });
    REQUIRE(children.size() == 1);
    CHECK(children[0].constraints[0].robot == 1);
  }
}

TEST_CASE("solve: trivial single robot emits immediately") {
  ProblemInstance inst;
  inst.name = "trivial";
  inst.workspace.lo = {0, 0};
  inst.workspace.hi = {2, 2};
  RobotSpec spec;
  spec.type = RobotType::from_tag(RobotTypeTag::Unicycle1);
  spec.shape = geometry::Disk{0.15};
  spec.start = State(3);
  spec.start << 1.0, 1.0, 0.0;
  spec.goal = State(3);
  spec.goal << 1.05, 1.0, 0.0;
  spec.bounds = dyn::default_bounds(spec.type);
  spec.weights = dyn::default_metric_weights(spec.type);
  inst.robots.push_back(spec);

  cbs::PlannerConfig cfg;
  cfg.time_limit_s = 2.0;
  std::vector<double> costs;
  std::vector<int> iters;
  const auto report = cbs::solve(inst, cfg, [&](const TrajectorySet& ts,
                                                double cost, int iteration) {
    costs.push_back(cost);
    iters.push_back(iteration);
    const auto check = validate::check(ts, inst);
    CHECK(check.ok());
  });
  REQUIRE(report.solved);
  REQUIRE(!costs.empty());
  CHECK(iters.front() == 1);
  CHECK(costs.front() <= 0.5);
}

TEST_CASE("branch: only one ordering feasible on the boxed lattice junction") {
  // Robot B sits one cell below the junction with walls on both sides and
  // the workspace edge behind it; its only physical plan is straight north
  // into robot A's row, so the child constraining B can never replan and is
  // dropped, while the child constraining A detours and resolves.
  const auto inst = testutil::lattice_park_instance(/*boxed_robot=*/1);
  const auto prims = testutil::lattice_primitives();

  auto replan = [&](int robot, const std::vector<dbastar::Constraint>& cons)
      -> std::optional<dbastar::DbSolution> {
    dbastar::PlanOptions opts;
    opts.delta = 1e-6;
    opts.alpha = 0.0;
    const auto& spec = inst.robots[robot];
    auto res = dbastar::plan(inst.robot_geometry(robot), spec.start, spec.goal,
                             inst.workspace, prims, opts, cons, spec.bounds,
                             spec.weights);
    if (res.status != dbastar::PlanStatus::Success) return std::nullopt;
    return std::move(res.solution);
  };

  std::vector<geometry::RobotGeometry> geos{inst.robot_geometry(0),
                                            inst.robot_geometry(1)};
  cbs::HighLevelNode root;
  for (int r = 0; r < 2; ++r) {
    auto sol = replan(r, {});
    REQUIRE(sol.has_value());
    root.solutions.push_back(std::move(*sol));
  }
  const auto conflict = cbs::get_earliest_conflict(root.solutions, geos, 0.0);
  REQUIRE(conflict.has_value());

  const auto children = cbs::branch(root, *conflict, prims.dt, replan);
  REQUIRE(children.size() == 1);
  CHECK(children[0].constraints[0].robot == 0);  // only robot A can yield

  // exhaustive expansion of the surviving subtree reaches a conflict-free node
  std::deque<cbs::HighLevelNode> open{children[0]};
  bool conflict_free_found = false;
  int expansions = 0;
  while (!open.empty() && expansions < 200) {
    auto node = open.front();
    open.pop_front();
    const auto c = cbs::get_earliest_conflict(node.solutions, geos, 0.0);
    if (!c) {
      conflict_free_found = true;
      break;
    }
    ++expansions;
    for (auto& child : cbs::branch(node, *c, prims.dt, replan))
      open.push_back(std::move(child));
  }
  CHECK(conflict_free_found);
}

TEST_CASE("solve: first conflict-free cost equals joint brute force on toys") {
  const auto prims = testutil::lattice_primitives();
  for (int toy = 0; toy < 5; ++toy) {
    CAPTURE(toy);
    const auto inst = testutil::lattice_toy_instance(toy);
    const auto oracle =
        testutil::lattice_joint_brute_force(inst, prims, 4, 0.0);
    REQUIRE(oracle.has_value());

    const std::string prim_path = "lattice_prims_test.yaml";
    primitives::save(prims, prim_path);
    cbs::PlannerConfig cfg;
    cfg.delta0 = 1e-6;
    cfg.alpha = 0.0;
    cfg.dt = prims.dt;
    cfg.time_limit_s = 3.0;
    cfg.primitive_files["double_integrator2"] = prim_path;
    const auto report = cbs::solve(inst, cfg, nullptr);
    std::remove(prim_path.c_str());

    REQUIRE(!report.iterations.empty());
    REQUIRE(report.iterations[0].first_conflict_free_cost >= 0.0);
    CHECK(report.iterations[0].first_conflict_free_cost ==
          doctest::Approx(*oracle).epsilon(1e-12));
  }
}
