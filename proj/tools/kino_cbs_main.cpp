#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "kinocbs/bench.hpp"
#include "kinocbs/cbs.hpp"
#include "kinocbs/dynamics.hpp"
#include "kinocbs/primitives.hpp"
#include "kinocbs/scenario.hpp"
#include "kinocbs/validate.hpp"

namespace fs = std::filesystem;
using namespace kinocbs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlannerFailure = 1;
constexpr int kExitInvalidInput = 2;

void write_failure_report(const cbs::SolveReport& report,
                          const std::string& path) {
  std::ofstream out(path);
  out << "status: failure\n";
  out << "reason: " << report.failure_reason << "\n";
  out << "wall_time_s: " << report.wall_time_s << "\n";
  out << "iterations:\n";
  for (const auto& it : report.iterations) {
    out << "  - {iteration: " << it.iteration << ", delta: " << it.delta
        << ", primitives: " << it.primitives_per_type
        << ", root_built: " << (it.root_built ? "true" : "false")
        << ", expansions: " << it.hl_expansions
        << ", conflicts: " << it.conflicts_resolved
        << ", infeasible_children: " << it.infeasible_children
        << ", optimizer_failures: " << it.optimizer_failures << "}\n";
  }
}

int run_plan(const std::string& input, const std::string& output,
             const std::string& cfg_path, double time_limit,
             std::uint64_t seed, const std::string& svg_path) {
  ProblemInstance instance;
  cbs::PlannerConfig cfg;
  try {
    instance = scenario::parse_instance(input);
    if (!cfg_path.empty()) cfg = scenario::parse_config(cfg_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  if (time_limit > 0) cfg.time_limit_s = time_limit;
  cfg.seed = seed;

  std::optional<TrajectorySet> best;
  const auto report =
      cbs::solve(instance, cfg, [&](const TrajectorySet& ts, double, int) {
        best = ts;
        scenario::write_solution(ts, output);  // keep the best-so-far on disk
      });
  if (!best) {
    std::cerr << "no solution within " << cfg.time_limit_s << " s\n";
    write_failure_report(report, output);
    return kExitPlannerFailure;
  }
  const auto check = validate::check(*best, instance);
  std::cout << "solved cost=" << best->cost << " iteration=" << best->iteration
            << " wall_time_s=" << best->wall_time_s
            << " validated=" << (check.ok() ? "yes" : "NO") << "\n";
  if (!svg_path.empty()) scenario::render_svg(instance, &*best, svg_path);
  return check.ok() ? kExitOk : kExitPlannerFailure;
}

int run_validate(const std::string& input, const std::string& solution) {
  ProblemInstance instance;
  TrajectorySet ts;
  try {
    instance = scenario::parse_instance(input);
    ts = scenario::read_solution(solution);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  const auto rep = validate::check(ts, instance);
  auto line = [](const char* name, bool ok, double value) {
    std::cout << (ok ? "[pass] " : "[FAIL] ") << name << " (" << value << ")\n";
  };
  line("euler residual", rep.euler_ok, rep.max_residual);
  line("action bounds", rep.actions_ok, 0.0);
  line("free space margin", rep.free_space_ok, rep.worst_space_margin);
  line("pairwise margin", rep.pairwise_ok, rep.min_pair_margin);
  line("goal error", rep.goals_ok,
       std::max(rep.max_goal_pos_err, rep.max_goal_other_err));
  if (!rep.ok() && !rep.detail.empty())
    std::cout << "detail: " << rep.detail << "\n";
  return rep.ok() ? kExitOk : kExitPlannerFailure;
}

int run_gen_primitives(const std::string& robot, int count, int k_min,
                       int k_max, std::uint64_t seed, double dt,
                       const std::string& out) {
  const auto type = RobotType::from_name(robot);
  if (!type) {
    std::cerr << "error: unknown robot type '" << robot << "'\n";
    return kExitInvalidInput;
  }
  try {
    auto ps = primitives::make_set(*type, dt, seed);
    ps.prims = primitives::generate(*type, count, k_min, k_max, seed,
                                    dynamics::default_bounds(*type), dt);
    primitives::save(ps, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPlannerFailure;
  }
  std::cout << "wrote " << count << " " << robot << " primitives to " << out
            << "\n";
  return kExitOk;
}

int run_bench(const std::string& suite, int trials, const std::string& out,
              const std::string& cfg_path, double time_limit, int parallelism,
              std::uint64_t seed) {
  std::vector<std::string> paths;
  try {
    for (const auto& entry : fs::directory_iterator(suite)) {
      if (entry.path().extension() == ".yaml") paths.push_back(entry.path());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    std::cerr << "error: no .yaml scenes in " << suite << "\n";
    return kExitInvalidInput;
  }
  cbs::PlannerConfig cfg;
  try {
    if (!cfg_path.empty()) cfg = scenario::parse_config(cfg_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  if (time_limit > 0) cfg.time_limit_s = time_limit;
  cfg.seed = seed;
  const auto report = bench::run_benchmark(paths, trials, cfg, parallelism);
  bench::write_csv(report, out);
  for (const auto& err : report.config_errors)
    std::cerr << "configuration error: " << err << "\n";
  std::cout << "instance,p,median_t_s,median_J_s\n";
  for (const auto& a : report.aggregates)
    std::cout << a.instance << "," << a.p << "," << a.median_t << ","
              << a.median_j << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-robot kinodynamic motion planner"};
  app.require_subcommand(1);

  auto* plan = app.add_subcommand("plan", "plan one scene");
  std::string plan_input, plan_output, plan_cfg, plan_svg;
  double plan_time_limit = 60.0;
  std::uint64_t plan_seed = 0;
  plan->add_option("--input", plan_input, "scene file")->required();
  plan->add_option("--output", plan_output, "solution file")->required();
  plan->add_option("--cfg", plan_cfg, "planner configuration file");
  plan->add_option("--time-limit", plan_time_limit, "seconds");
  plan->add_option("--seed", plan_seed, "rng seed");
  plan->add_option("--svg", plan_svg, "also render the solution to SVG");

  auto* validate_cmd = app.add_subcommand("validate", "check a solution");
  std::string val_input, val_solution;
  validate_cmd->add_option("--input", val_input, "scene file")->required();
  validate_cmd->add_option("--solution", val_solution, "solution file")
      ->required();

  auto* gen = app.add_subcommand("gen-primitives", "generate motion primitives");
  std::string gen_robot, gen_out;
  int gen_count = 1000, gen_kmin = 5, gen_kmax = 30;
  std::uint64_t gen_seed = 0;
  double gen_dt = dynamics::kDefaultDt;
  gen->add_option("--robot", gen_robot, "robot type name")->required();
  gen->add_option("--count", gen_count, "number of primitives");
  gen->add_option("--out", gen_out, "output file")->required();
  gen->add_option("--k-min", gen_kmin, "minimum primitive length");
  gen->add_option("--k-max", gen_kmax, "maximum primitive length");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--dt", gen_dt, "time step");

  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  std::string bench_suite, bench_out, bench_cfg;
  int bench_trials = 10, bench_par = 1;
  double bench_time_limit = 0.0;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--suite", bench_suite, "directory of scenes")
      ->required();
  bench_cmd->add_option("--trials", bench_trials, "trials per instance");
  bench_cmd->add_option("--out", bench_out, "CSV report path")->required();
  bench_cmd->add_option("--cfg", bench_cfg, "planner configuration file");
  bench_cmd->add_option("--time-limit", bench_time_limit,
                        "per-trial limit in seconds");
  bench_cmd->add_option("--parallelism", bench_par, "concurrent trials");
  bench_cmd->add_option("--seed", bench_seed, "base rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  if (plan->parsed())
    return run_plan(plan_input, plan_output, plan_cfg, plan_time_limit,
                    plan_seed, plan_svg);
  if (validate_cmd->parsed()) return run_validate(val_input, val_solution);
  if (gen->parsed())
    return run_gen_primitives(gen_robot, gen_count, gen_kmin, gen_kmax,
                              gen_seed, gen_dt, gen_out);
  if (bench_cmd->parsed())
    return run_bench(bench_suite, bench_trials, bench_out, bench_cfg,
                     bench_time_limit, bench_par, bench_seed);
  return kExitInvalidInput;
}
