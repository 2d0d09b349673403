#include "kinocbs/cbs.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "kinocbs/dynamics.hpp"
#include "kinocbs/log.hpp"
#include "kinocbs/primitives.hpp"

namespace kinocbs::cbs {

namespace {

using Clock = std::chrono::steady_clock;

struct NodeOrder {
  // min-heap by (cost, fewer constraints, FIFO)
  bool operator()(const std::shared_ptr<HighLevelNode>& a,
                  const std::shared_ptr<HighLevelNode>& b) const {
    if (a->cost != b->cost) return a->cost > b->cost;
    if (a->constraints.size() != b->constraints.size())
      return a->constraints.size() > b->constraints.size();
    return a->id > b->id;
  }
};

double node_cost(const std::vector<dbastar::DbSolution>& sols, double dt) {
  double c = 0.0;
  for (const auto& s : sols) c += s.cost(dt);
  return c;
}

std::vector<dbastar::Constraint> constraints_for(
    const std::vector<dbastar::Constraint>& all, int robot) {
  std::vector<dbastar::Constraint> out;
  for (const auto& c : all)
    if (c.robot == robot) out.push_back(c);
  return out;
}

}  // namespace

double compute_delta(const PlannerConfig& config, int n) {
  if (n < 1) throw ContractError("compute_delta: iteration must be >= 1");
  // floored to keep long anytime runs from underflowing delta to zero
  return std::max(config.delta0 * std::pow(config.delta_rate, n - 1), 1e-12);
}

std::optional<Conflict> get_earliest_conflict(
    const std::vector<dbastar::DbSolution>& solutions,
    const std::vector<geometry::RobotGeometry>& robots, double margin) {
  if (solutions.size() != robots.size())
    throw ContractError("get_earliest_conflict: size mismatch");
  int max_k = 0;
  for (const auto& s : solutions) max_k = std::max(max_k, s.K());
  for (int k = 0; k <= max_k; ++k) {
    for (std::size_t i = 0; i + 1 < solutions.size(); ++i) {
      const State& xi = solutions[i].states[std::min(k, solutions[i].K())];
      for (std::size_t j = i + 1; j < solutions.size(); ++j) {
        const State& xj = solutions[j].states[std::min(k, solutions[j].K())];
        if (geometry::robot_pair_distance(robots[i], xi, robots[j], xj) <
            margin) {
          Conflict c;
          c.i = static_cast<int>(i);
          c.j = static_cast<int>(j);
          c.xi = xi;
          c.xj = xj;
          c.time = k;
          return c;
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<HighLevelNode> branch(const HighLevelNode& node,
                                  const Conflict& conflict, double dt,
                                  const ReplanFn& replan) {
  std::vector<HighLevelNode> children;
  for (int who : {conflict.i, conflict.j}) {
    HighLevelNode child;
    child.constraints = node.constraints;
    dbastar::Constraint c;
    c.robot = who;
    c.state = who == conflict.i ? conflict.xi : conflict.xj;
    c.time = conflict.time;
    child.constraints.push_back(c);
    auto sol = replan(who, constraints_for(child.constraints, who));
    if (!sol) continue;  // infeasible child, dropped
    child.solutions = node.solutions;
    child.solutions[who] = std::move(*sol);
    child.cost = node_cost(child.solutions, dt);
    children.push_back(std::move(child));
  }
  return children;
}

SolveReport solve(const ProblemInstance& instance, const PlannerConfig& config,
                  const EmitFn& emit) {
  const auto t0 = Clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  SolveReport report;
  double best_cost = std::numeric_limits<double>::infinity();
  int emissions = 0;

  std::vector<geometry::RobotGeometry> geos;
  for (std::size_t i = 0; i < instance.robots.size(); ++i)
    geos.push_back(instance.robot_geometry(i));

  // primitive pools shared per robot type
  std::map<std::string, primitives::PrimitiveSet> pools;
  std::map<std::string, bool> fixed_pool;
  std::vector<std::string> type_of_robot;
  for (const auto& spec : instance.robots) {
    const std::string tn = spec.type.name();
    type_of_robot.push_back(tn);
    if (pools.count(tn)) continue;
    if (auto it = config.primitive_files.find(tn);
        it != config.primitive_files.end()) {
      pools.emplace(tn, primitives::load(it->second, spec.type, spec.bounds));
      fixed_pool[tn] = true;
    } else {
      pools.emplace(tn, primitives::make_set(spec.type, config.dt, config.seed));
      fixed_pool[tn] = false;
    }
  }

  for (int n = 1; elapsed() < config.time_limit_s; ++n) {
    IterationStats stats;
    stats.iteration = n;
    const double delta = compute_delta(config, n);
    stats.delta = delta;

    // AddPrimitives: grow each generated pool to primitives0 * 2^(n-1),
    // appending fresh rollouts (never regenerating old ones)
    const double target_d = config.primitives0 * std::pow(2.0, n - 1);
    const int target = static_cast<int>(
        std::min<double>(config.max_primitives, target_d));
    std::size_t type_idx = 0;
    for (auto& [tn, pool] : pools) {
      ++type_idx;
      if (fixed_pool[tn]) continue;
      const int missing = target - static_cast<int>(pool.prims.size());
      if (missing <= 0) continue;
      const auto type = *RobotType::from_name(tn);
      auto fresh = primitives::generate(
          type, missing, config.prim_k_min, config.prim_k_max,
          mix_seed(config.seed, type_idx * 1000003ULL + n),
          dynamics::default_bounds(type), config.dt);
      for (auto& m : fresh) pool.prims.push_back(std::move(m));
    }
    stats.primitives_per_type = target;

    // root: unconstrained single-robot plans
    auto replan = [&](int robot,
                      const std::vector<dbastar::Constraint>& cons)
        -> std::optional<dbastar::DbSolution> {
      const auto& spec = instance.robots[robot];
      dbastar::PlanOptions opts;
      opts.delta = delta;
      opts.alpha = config.alpha;
      opts.max_expansions = 50000;  // keep dead replans from eating the budget
      opts.time_limit_s = std::max(0.0, config.time_limit_s - elapsed());
      auto res = dbastar::plan(geos[robot], spec.start, spec.goal,
                               instance.workspace, pools.at(type_of_robot[robot]),
                               opts, cons, spec.bounds, spec.weights);
      if (res.status != dbastar::PlanStatus::Success) return std::nullopt;
      return std::move(res.solution);
    };

    auto root = std::make_shared<HighLevelNode>();
    bool root_ok = true;
    for (std::size_t i = 0; i < instance.robots.size(); ++i) {
      auto sol = replan(static_cast<int>(i), {});
      if (!sol) {
        root_ok = false;
        break;
      }
      root->solutions.push_back(std::move(*sol));
    }
    if (!root_ok) {
      KINOCBS_LOG_INFO("iter=" << n << " delta=" << delta
                               << " root infeasible, growing primitive set");
      report.iterations.push_back(stats);
      continue;
    }
    stats.root_built = true;
    root->cost = node_cost(root->solutions, config.dt);

    std::priority_queue<std::shared_ptr<HighLevelNode>,
                        std::vector<std::shared_ptr<HighLevelNode>>, NodeOrder>
        open;
    std::uint64_t next_id = 1;
    open.push(root);

#ifndef NDEBUG
    double last_popped_cost = 0.0;
#endif
    while (!open.empty() && elapsed() < config.time_limit_s &&
           stats.hl_expansions <
               static_cast<std::size_t>(config.max_hl_expansions)) {
      auto node = open.top();
      open.pop();
#ifndef NDEBUG
      assert(node->cost >= last_popped_cost - 1e-9);
      last_popped_cost = node->cost;
#endif
      auto conflict = get_earliest_conflict(node->solutions, geos, config.margin);
      if (!conflict) {
        if (stats.first_conflict_free_cost < 0.0)
          stats.first_conflict_free_cost = node->cost;
        trajopt::JointGuess guess;
        guess.dt = config.dt;
        for (std::size_t i = 0; i < node->solutions.size(); ++i) {
          const auto& s = node->solutions[i];
          RobotTrajectory tr{s.states, s.actions};
          if (tr.K() == 0) {
            // degenerate start-at-goal solution: give the optimizer a few
            // zero-action steps to absorb the remaining delta gap
            const auto& spec = instance.robots[i];
            const double gap =
                (spec.goal.head<2>() - spec.start.head<2>()).norm();
            const double vmax = dynamics::max_speed(spec.type, spec.bounds);
            const int pad = std::max(
                1, static_cast<int>(std::ceil(2.0 * gap / (vmax * config.dt))));
            const Action zero = Action::Zero(spec.type.action_dim);
            for (int k = 0; k < pad; ++k) {
              tr.states.push_back(dynamics::step(spec.type, tr.states.back(),
                                                 zero, config.dt));
              tr.actions.push_back(zero);
            }
          }
          guess.robots.push_back(std::move(tr));
        }
        auto opt = trajopt::optimize(guess, instance, config.opt);
        if (opt.success) {
          TrajectorySet ts;
          ts.robots = opt.solution.robots;
          ts.dt = opt.solution.dt;
          ts.cost = ts.recompute_cost();
          ts.iteration = n;
          ts.delta = delta;
          ts.wall_time_s = elapsed();
          if (ts.cost < best_cost - 1e-9) {
            best_cost = ts.cost;
            report.solved = true;
            report.best_cost = best_cost;
            stats.emitted = true;
            ++emissions;
            KINOCBS_LOG_INFO("iter=" << n << " delta=" << delta
                                     << " emit cost=" << ts.cost
                                     << " t=" << ts.wall_time_s);
            if (emit) emit(ts, ts.cost, n);
            if (config.stop_after_emissions > 0 &&
                emissions >= config.stop_after_emissions) {
              report.iterations.push_back(stats);
              report.wall_time_s = elapsed();
              return report;
            }
          }
          break;  // next delta iteration
        }
        ++stats.optimizer_failures;
        KINOCBS_LOG_INFO("iter=" << n << " optimizer failed: " << opt.failure);
        continue;  // keep expanding the tree for other candidates
      }
      ++stats.hl_expansions;
      ++stats.conflicts_resolved;
      auto children = branch(*node, *conflict, config.dt, replan);
      stats.infeasible_children += 2 - children.size();
      for (auto& child : children) {
        child.id = next_id++;
        open.push(std::make_shared<HighLevelNode>(std::move(child)));
      }
    }
    KINOCBS_LOG_INFO("iter=" << n << " delta=" << delta << " expansions="
                             << stats.hl_expansions << " conflicts="
                             << stats.conflicts_resolved << " cff_cost="
                             << stats.first_conflict_free_cost);
    report.iterations.push_back(stats);
  }

  report.wall_time_s = elapsed();
  if (!report.solved) {
    report.failure_reason = "time limit reached with no validated emission";
  }
  return report;
}

}  // namespace kinocbs::cbs
