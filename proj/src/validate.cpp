#include "kinocbs/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinocbs/dynamics.hpp"

namespace kinocbs::validate {

Report check(const TrajectorySet& ts, const ProblemInstance& instance,
             const Tolerances& tol) {
  Report rep;
  std::ostringstream detail;
  auto note = [&](auto&& msg) {
    if (detail.tellp() == 0) detail << msg;
  };
  if (ts.robots.size() != instance.robots.size()) {
    rep.detail = "robot count mismatch";
    return rep;
  }

  rep.min_pair_margin = std::numeric_limits<double>::infinity();
  rep.worst_space_margin = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < ts.robots.size(); ++i) {
    const auto& spec = instance.robots[i];
    const auto& tr = ts.robots[i];
    if (tr.states.size() != tr.actions.size() + 1 || tr.states.empty()) {
      rep.detail = "robot " + std::to_string(i) + ": malformed trajectory";
      return rep;
    }
    for (int k = 0; k < tr.K(); ++k) {
      const State pred =
          dynamics::step(spec.type, tr.states[k], tr.actions[k], ts.dt);
      const double r =
          dynamics::distance(spec.type, pred, tr.states[k + 1], spec.weights);
      if (r > rep.max_residual) rep.max_residual = r;
      if (r > tol.dyn_residual)
        note("robot " + std::to_string(i) + ": dynamics residual " +
             std::to_string(r) + " at step " + std::to_string(k));
      if (!dynamics::action_within_bounds(spec.type, tr.actions[k], spec.bounds,
                                          tol.action_tol))
        note("robot " + std::to_string(i) + ": action out of bounds at step " +
             std::to_string(k));
    }
    for (const auto& x : tr.states) {
      rep.worst_space_margin =
          std::min(rep.worst_space_margin,
                   geometry::free_space_margin(
                       geometry::place(spec.type, spec.shape, x),
                       instance.workspace));
    }
    const State& xK = tr.states.back();
    rep.max_goal_pos_err = std::max(
        rep.max_goal_pos_err, (xK.head<2>() - spec.goal.head<2>()).norm());
    for (int d = 2; d < spec.type.state_dim; ++d) {
      const auto& ad = dynamics::angle_dims(spec.type);
      const bool is_angle = std::find(ad.begin(), ad.end(), d) != ad.end();
      const double err = is_angle ? dynamics::angle_diff(xK(d), spec.goal(d))
                                  : std::abs(xK(d) - spec.goal(d));
      rep.max_goal_other_err = std::max(rep.max_goal_other_err, err);
    }
  }

  int max_k = 0;
  for (const auto& tr : ts.robots) max_k = std::max(max_k, tr.K());
  for (int k = 0; k <= max_k; ++k) {
    for (std::size_t i = 0; i + 1 < ts.robots.size(); ++i) {
      const State& xi =
          ts.robots[i].states[std::min<std::size_t>(k, ts.robots[i].K())];
      for (std::size_t j = i + 1; j < ts.robots.size(); ++j) {
        const State& xj =
            ts.robots[j].states[std::min<std::size_t>(k, ts.robots[j].K())];
        const double sd = geometry::robot_pair_distance(
            instance.robot_geometry(i), xi, instance.robot_geometry(j), xj);
        if (sd < rep.min_pair_margin) rep.min_pair_margin = sd;
        if (sd < tol.pair_margin)
          note("robots " + std::to_string(i) + "/" + std::to_string(j) +
               " margin " + std::to_string(sd) + " at step " +
               std::to_string(k));
      }
    }
  }
  if (ts.robots.size() == 1)
    rep.min_pair_margin = std::numeric_limits<double>::infinity();

  rep.euler_ok = rep.max_residual <= tol.dyn_residual;
  rep.actions_ok = true;
  for (std::size_t i = 0; i < ts.robots.size() && rep.actions_ok; ++i) {
    const auto& spec = instance.robots[i];
    for (const auto& u : ts.robots[i].actions) {
      if (!dynamics::action_within_bounds(spec.type, u, spec.bounds,
                                          tol.action_tol)) {
        rep.actions_ok = false;
        break;
      }
    }
  }
  rep.free_space_ok = rep.worst_space_margin > -tol.space_tol;
  if (!rep.free_space_ok)
    note("free-space margin " + std::to_string(rep.worst_space_margin));
  rep.pairwise_ok = rep.min_pair_margin >= tol.pair_margin;
  rep.goals_ok = rep.max_goal_pos_err <= tol.goal_tol_pos &&
                 rep.max_goal_other_err <= tol.goal_tol_other;
  if (!rep.goals_ok)
    note("goal error pos " + std::to_string(rep.max_goal_pos_err) + " other " +
         std::to_string(rep.max_goal_other_err));
  rep.detail = detail.str();
  return rep;
}

}  // namespace kinocbs::validate
