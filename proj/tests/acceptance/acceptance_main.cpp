// Acceptance suite: runs the eight release criteria and prints one
// pass/fail line each. Usage: kinocbs_acceptance [N ...] runs the listed
// criteria (default: all). Exits nonzero if any executed criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kinocbs/bench.hpp"
#include "kinocbs/cbs.hpp"
#include "kinocbs/dbastar.hpp"
#include "kinocbs/dynamics.hpp"
#include "kinocbs/primitives.hpp"
#include "kinocbs/scenario.hpp"
#include "kinocbs/trajopt.hpp"
#include "kinocbs/validate.hpp"

#include "../lattice_util.hpp"
#include "../test_util.hpp"

using namespace kinocbs;
namespace dyn = kinocbs::dynamics;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string scenario_path(const std::string& name) {
  return std::string(SCENARIO_DIR) + "/" + name + ".yaml";
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1. Analytic Jacobians vs central finite differences, 1e-5 absolute,
//    100 random pairs per robot type, under five seconds.
Outcome criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& type : all_robot_types()) {
    Rng rng(0xC1 + static_cast<int>(type.tag));
    for (int i = 0; i < 100; ++i) {
      const State x = testutil::random_state(type, rng);
      const Action u = testutil::random_action(type, rng);
      Eigen::MatrixXd A, B, A_fd, B_fd;
      dyn::jacobians(type, x, u, 0.1, A, B);
      testutil::fd_jacobians(type, x, u, 0.1, A_fd, B_fd);
      worst = std::max(worst, (A - A_fd).cwiseAbs().maxCoeff());
      worst = std::max(worst, (B - B_fd).cwiseAbs().maxCoeff());
    }
  }
  const double dt = seconds_since(t0);
  std::ostringstream os;
  os << "max |analytic - fd| = " << worst << ", " << dt << " s";
  return {worst <= 1e-5 && dt < 5.0, os.str()};
}

// 2. db-A* outputs satisfy all discontinuity-bound conditions on randomized
//    single-robot instances, 20 per robot type, checked by the independent
//    validator.
Outcome criterion2() {
  int solved = 0, passed = 0, total = 0;
  for (const auto& type : all_robot_types()) {
    const auto bounds = dyn::default_bounds(type);
    const auto weights = dyn::default_metric_weights(type);
    auto prims = primitives::make_set(type, dyn::kDefaultDt, 7);
    prims.prims = primitives::generate(type, 1500, 5, 30, 7, bounds, prims.dt);
    const geometry::RobotGeometry robot{type, geometry::Disk{0.15}};
    Rng rng(0xC2 + static_cast<int>(type.tag));
    int made = 0;
    while (made < 20) {
      geometry::Workspace ws;
      ws.lo = {0, 0};
      ws.hi = {6, 6};
      const int n_obs = static_cast<int>(rng.uniform_int(0, 2));
      for (int o = 0; o < n_obs; ++o) {
        ws.obstacles.push_back(
            {geometry::OrientedBox{Eigen::Vector2d(0.25, 0.25)},
             Eigen::Vector2d(rng.uniform(1.5, 4.5), rng.uniform(1.5, 4.5)),
             0.0});
      }
      const State start = dyn::sample_state(type, rng, bounds,
                                            Eigen::Vector2d(0.8, 0.8),
                                            Eigen::Vector2d(2.2, 5.2));
      const State goal = dyn::sample_state(type, rng, bounds,
                                           Eigen::Vector2d(3.8, 0.8),
                                           Eigen::Vector2d(5.2, 5.2));
      // keep endpoints clear of obstacles so every instance is solvable
      if (geometry::free_space_margin(
              geometry::place(type, robot.shape, start), ws) < 0.3 ||
          geometry::free_space_margin(geometry::place(type, robot.shape, goal),
                                      ws) < 0.3)
        continue;
      ++made;
      ++total;
      dbastar::PlanOptions opts;
      opts.delta = 0.55;
      opts.alpha = 0.5;
      opts.time_limit_s = 30.0;
      const auto res = dbastar::plan(robot, start, goal, ws, prims, opts, {},
                                     bounds, weights);
      if (res.status != dbastar::PlanStatus::Success) continue;
      ++solved;
      const auto rep = dbastar::validate(res.solution, start, goal, ws, robot,
                                         opts.delta, {}, bounds, weights,
                                         prims.dt);
      if (rep.ok()) ++passed;
    }
  }
  std::ostringstream os;
  os << passed << "/" << total << " solved-and-validated ("
     << solved << " solved)";
  return {passed == total, os.str()};
}

// 3. First conflict-free node cost equals joint brute-force enumeration on
//    the hand-built lattice toys, exactly, within 30 seconds total.
Outcome criterion3() {
  const auto t0 = Clock::now();
  const auto prims = testutil::lattice_primitives();
  int exact = 0;
  for (int toy = 0; toy < 5; ++toy) {
    const auto inst = testutil::lattice_toy_instance(toy);
    const auto oracle = testutil::lattice_joint_brute_force(inst, prims, 4, 0.0);
    if (!oracle) return {false, "oracle found no joint solution"};
    const std::string prim_path = "acceptance_lattice_prims.yaml";
    primitives::save(prims, prim_path);
    cbs::PlannerConfig cfg;
    cfg.delta0 = 1e-6;
    cfg.alpha = 0.0;
    cfg.dt = prims.dt;
    cfg.time_limit_s = 5.0;
    cfg.stop_after_emissions = 1;
    cfg.primitive_files["double_integrator2"] = prim_path;
    const auto report = cbs::solve(inst, cfg, nullptr);
    std::remove(prim_path.c_str());
    if (!report.iterations.empty() &&
        report.iterations[0].first_conflict_free_cost == *oracle)
      ++exact;
  }
  const double dt = seconds_since(t0);
  std::ostringstream os;
  os << exact << "/5 exact, " << dt << " s";
  return {exact == 5 && dt < 30.0, os.str()};
}

struct TrialStats {
  int successes = 0;
  std::vector<double> t_first, j_first;
  std::vector<TrajectorySet> first_solutions;
};

TrialStats run_trials(const std::string& scene, int trials, double limit,
                      bool stop_after_first) {
  const auto inst = scenario::parse_instance(scenario_path(scene));
  TrialStats stats;
  for (int trial = 0; trial < trials; ++trial) {
    cbs::PlannerConfig cfg;
    cfg.time_limit_s = limit;
    cfg.seed = mix_seed(2024, trial + 1);
    if (stop_after_first) cfg.stop_after_emissions = 1;
    std::optional<TrajectorySet> first;
    cbs::solve(inst, cfg, [&](const TrajectorySet& ts, double, int) {
      if (!first && validate::check(ts, inst).ok()) first = ts;
    });
    if (first) {
      ++stats.successes;
      stats.t_first.push_back(first->wall_time_s);
      stats.j_first.push_back(first->cost);
      stats.first_solutions.push_back(*first);
    }
    std::cerr << "  [criterion trial] " << scene << " trial " << trial
              << (first ? " solved t=" : " failed t=")
              << (first ? first->wall_time_s : limit) << "\n";
  }
  return stats;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2]
                      : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

// 4. Canonical swap: success rate, first-solution cost, and time to first
//    solution over ten seeded trials.
Outcome criterion4() {
  const auto stats = run_trials("swap2_unicycle1", 10, 60.0, true);
  const double p = stats.successes / 10.0;
  const double med_j = median(stats.j_first);
  const double med_t = median(stats.t_first);
  std::ostringstream os;
  os << "p=" << p << ", median J=" << med_j << " s, median t=" << med_t << " s";
  return {p >= 0.9 && med_j <= 20.0 && med_t <= 60.0, os.str()};
}

// 5. At-goal: mostly solved, and the blocking robot leaves its goal by more
//    than its own collision radius at some timestep.
Outcome criterion5() {
  const auto inst = scenario::parse_instance(scenario_path("at_goal"));
  const double radius =
      std::get<geometry::Disk>(inst.robots[1].shape).radius;
  const auto stats = run_trials("at_goal", 10, 60.0, true);
  int moved_away = 0;
  for (const auto& ts : stats.first_solutions) {
    double disp = 0.0;
    for (const auto& s : ts.robots[1].states)
      disp = std::max(disp,
                      (s.head<2>() - inst.robots[1].goal.head<2>()).norm());
    if (disp > radius) ++moved_away;
  }
  std::ostringstream os;
  os << stats.successes << "/10 solved, " << moved_away
     << " with blocking-robot displacement > " << radius;
  return {stats.successes >= 8 && moved_away == stats.successes, os.str()};
}

// 6. Anytime behavior on the heterogeneous 4-robot fixture: strictly
//    decreasing validated emissions.
Outcome criterion6() {
  const auto inst = scenario::parse_instance(scenario_path("rand_hetero_4"));
  cbs::PlannerConfig cfg;
  cfg.time_limit_s = 120.0;
  cfg.seed = 5;
  std::vector<double> costs;
  int validated = 0;
  cbs::solve(inst, cfg, [&](const TrajectorySet& ts, double cost, int) {
    costs.push_back(cost);
    if (validate::check(ts, inst).ok()) ++validated;
  });
  bool decreasing = true;
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] >= costs[i - 1]) decreasing = false;
  std::ostringstream os;
  os << costs.size() << " emissions, " << validated << " validated";
  if (!costs.empty()) {
    os << ", costs";
    for (double c : costs) os << " " << c;
  }
  const bool enough = costs.size() >= 2 ? decreasing : true;
  return {enough && validated == static_cast<int>(costs.size()) &&
              !costs.empty(),
          os.str()};
}

// 7. Optimizer contract on 50 perturbed guesses plus a criterion-level
//    gradient re-check.
Outcome criterion7() {
  // gradient re-check (two robots, obstacles, collision terms active)
  {
    ProblemInstance inst;
    inst.workspace.lo = {-8, -8};
    inst.workspace.hi = {8, 8};
    inst.workspace.obstacles.push_back(
        {geometry::OrientedBox{Eigen::Vector2d(0.2, 0.2)}, {0.6, 0.4}, 0.0});
    for (int r = 0; r < 2; ++r) {
      RobotSpec spec;
      spec.type = RobotType::from_tag(r == 0 ? RobotTypeTag::Unicycle1
                                             : RobotTypeTag::DoubleIntegrator2D);
      spec.shape = r == 0 ? geometry::Shape(geometry::OrientedBox{{0.2, 0.1}})
                          : geometry::Shape(geometry::Disk{0.2});
      spec.start = State::Zero(spec.type.state_dim);
      spec.goal = State::Zero(spec.type.state_dim);
      spec.start(0) = r * 1.2;
      spec.goal(0) = (1 - r) * 1.2;
      spec.bounds = dyn::default_bounds(spec.type);
      spec.weights = dyn::default_metric_weights(spec.type);
      inst.robots.push_back(std::move(spec));
    }
    trajopt::ShootingProblem sp;
    sp.instance = &inst;
    sp.horizons = {12, 12};
    sp.dt_nominal = 0.1;
    sp.penalty = 25.0;
    Rng rng(0xC7);
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXd vars(sp.num_vars());
      for (int i = 0; i < vars.size() - 1; ++i) vars(i) = rng.uniform(-0.4, 0.4);
      vars(vars.size() - 1) = rng.uniform(0.08, 0.15);
      Eigen::VectorXd grad;
      trajopt::objective_and_gradient(sp, vars, &grad);
      const double h = 1e-6;
      for (int i = 0; i < vars.size(); ++i) {
        Eigen::VectorXd vp = vars, vm = vars;
        vp(i) += h;
        vm(i) -= h;
        const double fd =
            (trajopt::objective_and_gradient(sp, vp, nullptr) -
             trajopt::objective_and_gradient(sp, vm, nullptr)) /
            (2 * h);
        if (std::abs(grad(i) - fd) / std::max(1.0, std::abs(fd)) > 1e-5)
          return {false, "gradient check failed at variable " +
                             std::to_string(i)};
      }
    }
  }

  // 50 perturbed guesses with injected discontinuities up to 0.3
  int successes = 0;
  int attempted = 0;
  const auto types = all_robot_types();
  Rng rng(0xC77);
  while (attempted < 50) {
    const auto& type = types[attempted % types.size()];
    ProblemInstance inst;
    inst.workspace.lo = {-10, -10};
    inst.workspace.hi = {10, 10};
    RobotSpec spec;
    spec.type = type;
    spec.shape = geometry::Disk{0.15};
    spec.bounds = dyn::default_bounds(type);
    spec.weights = dyn::default_metric_weights(type);
    spec.start = State::Zero(type.state_dim);
    if (type.tag == RobotTypeTag::CarWithTrailer) spec.start(3) = 0.0;

    // gentle rollout, actions at half scale, resampled every five steps
    const int K = 30 + static_cast<int>(rng.uniform_int(0, 30));
    RobotTrajectory tr;
    tr.states.push_back(spec.start);
    Action u;
    bool ok = true;
    for (int k = 0; k < K; ++k) {
      if (k % 5 == 0) {
        u = dyn::sample_action(type, rng, spec.bounds) * 0.5;
      }
      const State next = dyn::step(type, tr.states.back(), u, 0.1);
      if (!dyn::state_within_bounds(type, next, spec.bounds)) {
        ok = false;
        break;
      }
      tr.states.push_back(next);
      tr.actions.push_back(u);
    }
    if (!ok) continue;
    spec.goal = tr.states.back();
    inst.robots.push_back(spec);
    ++attempted;

    // inject 1-3 position jumps of metric size up to 0.3
    const int jumps = 1 + static_cast<int>(rng.uniform_int(0, 2));
    for (int j = 0; j < jumps; ++j) {
      const std::size_t at = 1 + static_cast<std::size_t>(
                                     rng.uniform_int(0, K - 2));
      const double ang = rng.uniform(-M_PI, M_PI);
      const double mag = rng.uniform(0.05, 0.3);
      const Eigen::Vector2d jump(mag * std::cos(ang), mag * std::sin(ang));
      for (std::size_t k = at; k < tr.states.size(); ++k)
        tr.states[k].head<2>() += jump;
    }

    trajopt::JointGuess guess;
    guess.dt = 0.1;
    guess.robots.push_back(tr);
    const auto res = trajopt::optimize(guess, inst, {});
    if (!res.success) continue;
    const auto& rep = res.solution.report;
    if (rep.max_dyn_residual <= 1e-6 && rep.min_margin >= -1e-4 &&
        rep.max_goal_pos_err <= 1e-3 && rep.max_goal_other_err <= 1e-2)
      ++successes;
  }
  std::ostringstream os;
  os << successes << "/50 optimizations met the contract";
  return {successes >= 45, os.str()};
}

// 8. Scalability smoke: the 8-robot heterogeneous instance must terminate
//    cleanly with either a validated solution or a structured failure
//    report.
Outcome criterion8() {
  const auto inst = scenario::parse_instance(scenario_path("rand_hetero_8"));
  cbs::PlannerConfig cfg;
  cfg.time_limit_s = 300.0;
  cfg.seed = 8;
  int validated = 0, emitted = 0;
  cbs::SolveReport report;
  try {
    report = cbs::solve(inst, cfg, [&](const TrajectorySet& ts, double, int) {
      ++emitted;
      if (validate::check(ts, inst).ok()) ++validated;
    });
  } catch (const std::exception& e) {
    return {false, std::string("crashed: ") + e.what()};
  }
  std::ostringstream os;
  os << emitted << " emissions (" << validated << " validated), "
     << report.iterations.size() << " iterations, wall "
     << report.wall_time_s << " s";
  const bool clean_failure =
      !report.solved && !report.failure_reason.empty() &&
      !report.iterations.empty();
  const bool clean_success = report.solved && validated == emitted && emitted > 0;
  return {clean_success || clean_failure, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

  const char* names[] = {
      "dynamics fidelity (jacobians vs finite differences)",
      "discontinuity-bound compliance of db-A* outputs",
      "discrete-optimality vs joint brute force",
      "canonical swap success/cost/time",
      "at-goal behavior",
      "anytime monotonicity on rand_hetero_4",
      "optimizer contract on perturbed guesses",
      "8-robot scalability smoke",
  };

  bool all_pass = true;
  for (int n : which) {
    if (n < 1 || n > 8) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    Outcome out;
    const auto t0 = Clock::now();
    switch (n) {
      case 1: out = criterion1(); break;
      case 2: out = criterion2(); break;
      case 3: out = criterion3(); break;
      case 4: out = criterion4(); break;
      case 5: out = criterion5(); break;
      case 6: out = criterion6(); break;
      case 7: out = criterion7(); break;
      case 8: out = criterion8(); break;
    }
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": "
              << names[n - 1] << " — " << out.detail << " ("
              << seconds_since(t0) << " s)" << std::endl;
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}
