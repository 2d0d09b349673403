#include "kinocbs/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "kinocbs/dynamics.hpp"
#include "kinocbs/log.hpp"

namespace kinocbs::trajopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v(1), v(0)}; }

bool is_angle_dim(const RobotType& type, int d) {
  const auto& ad = dynamics::angle_dims(type);
  return std::find(ad.begin(), ad.end(), d) != ad.end();
}

// Maps a gradient on a placed footprint part (position, angle) back onto the
// robot state. Part 0 sits at the state position; part 1 is the trailer.
void add_pose_grad(const RobotType& type, int part, const State& x,
                   const Eigen::Vector2d& gpos, double gang,
                   Eigen::VectorXd& gx) {
  gx(0) += gpos(0);
  gx(1) += gpos(1);
  switch (type.tag) {
    case RobotTypeTag::Unicycle1:
    case RobotTypeTag::Unicycle2:
      gx(2) += gang;
      break;
    case RobotTypeTag::DoubleIntegrator2D:
      break;  // disk at fixed orientation
    case RobotTypeTag::CarWithTrailer:
      if (part == 0) {
        gx(2) += gang;
      } else {
        const double L = dynamics::kTrailerHitch;
        // trailer center = pos - L*(cos t1, sin t1)
        gx(3) += gpos.dot(Eigen::Vector2d(L * std::sin(x(3)),
                                          -L * std::cos(x(3)))) +
                 gang;
      }
      break;
  }
}

struct EvalScratch {
  std::vector<std::vector<State>> states;        // unwrapped rollout, per robot
  std::vector<std::vector<Eigen::VectorXd>> gx;  // state gradients
};

// Wall clearance terms for one placed part: appends (violation, grad) hinge
// contributions for every side closer than `margin`.
template <typename Fn>
void wall_terms(const geometry::PlacedShape& p, const geometry::Workspace& ws,
                double margin, Fn&& emit) {
  auto side = [&](double m, const Eigen::Vector2d& gpos, double gang) {
    if (m < margin) emit(margin - m, -gpos, -gang);
  };
  if (std::holds_alternative<geometry::Disk>(p.shape)) {
    const double r = std::get<geometry::Disk>(p.shape).radius;
    side(p.position(0) - r - ws.lo(0), {1, 0}, 0);
    side(ws.hi(0) - p.position(0) - r, {-1, 0}, 0);
    side(p.position(1) - r - ws.lo(1), {0, 1}, 0);
    side(ws.hi(1) - p.position(1) - r, {0, -1}, 0);
  } else {
    const auto& he = std::get<geometry::OrientedBox>(p.shape).half_extents;
    const double c = std::cos(p.orientation), s = std::sin(p.orientation);
    const Eigen::Vector2d ex(c * he(0), s * he(0)), ey(-s * he(1), c * he(1));
    for (int sx = -1; sx <= 1; sx += 2) {
      for (int sy = -1; sy <= 1; sy += 2) {
        const Eigen::Vector2d corner = p.position + sx * ex + sy * ey;
        const Eigen::Vector2d arm = perp(corner - p.position);
        side(corner(0) - ws.lo(0), {1, 0}, arm(0));
        side(ws.hi(0) - corner(0), {-1, 0}, -arm(0));
        side(corner(1) - ws.lo(1), {0, 1}, arm(1));
        side(ws.hi(1) - corner(1), {0, -1}, -arm(1));
      }
    }
  }
}

}  // namespace

int ShootingProblem::num_vars() const {
  int n = 1;  // dt
  for (std::size_t i = 0; i < horizons.size(); ++i)
    n += horizons[i] * instance->robots[i].type.action_dim;
  return n;
}

Eigen::VectorXd ShootingProblem::pack(
    const std::vector<RobotTrajectory>& robots, double dt) const {
  Eigen::VectorXd v(num_vars());
  int off = 0;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (const auto& u : robots[i].actions) {
      v.segment(off, u.size()) = u;
      off += static_cast<int>(u.size());
    }
  }
  v(off) = dt;
  return v;
}

void ShootingProblem::unpack(const Eigen::VectorXd& vars,
                             std::vector<std::vector<Action>>& actions,
                             double& dt) const {
  actions.assign(horizons.size(), {});
  int off = 0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const int du = instance->robots[i].type.action_dim;
    actions[i].reserve(horizons[i]);
    for (int k = 0; k < horizons[i]; ++k) {
      actions[i].push_back(vars.segment(off, du));
      off += du;
    }
  }
  dt = vars(off);
}

void ShootingProblem::project(Eigen::VectorXd& vars) const {
  int off = 0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto& b = instance->robots[i].bounds;
    const int du = instance->robots[i].type.action_dim;
    for (int k = 0; k < horizons[i]; ++k) {
      for (int d = 0; d < du; ++d) {
        vars(off + d) = std::clamp(vars(off + d), b.action_lo(d), b.action_hi(d));
      }
      off += du;
    }
  }
  vars(off) = std::clamp(vars(off), weights.dt_lo_factor * dt_nominal,
                         weights.dt_hi_factor * dt_nominal);
}

double objective_and_gradient(const ShootingProblem& sp,
                              const Eigen::VectorXd& vars,
                              Eigen::VectorXd* grad) {
  const ProblemInstance& inst = *sp.instance;
  const std::size_t n_robots = inst.robots.size();
  std::vector<std::vector<Action>> actions;
  double dt = 0.0;
  sp.unpack(vars, actions, dt);

  // shooting rollout, angles left unwrapped so the objective stays smooth
  EvalScratch sc;
  sc.states.resize(n_robots);
  sc.gx.resize(n_robots);
  int total_steps = 0;
  for (std::size_t i = 0; i < n_robots; ++i) {
    const auto& spec = inst.robots[i];
    auto& xs = sc.states[i];
    xs.resize(sp.horizons[i] + 1);
    xs[0] = spec.start;
    for (int k = 0; k < sp.horizons[i]; ++k)
      xs[k + 1] = xs[k] + dynamics::flow(spec.type, xs[k], actions[i][k]) * dt;
    sc.gx[i].assign(sp.horizons[i] + 1,
                    Eigen::VectorXd::Zero(spec.type.state_dim));
    total_steps += sp.horizons[i];
  }

  double value = 0.0;
  double gdt = 0.0;
  // base objective: sum_i sum_k (dt + beta |u|^2)
  value += total_steps * dt;
  gdt += total_steps;
  for (std::size_t i = 0; i < n_robots; ++i)
    for (const auto& u : actions[i]) value += sp.weights.beta * u.squaredNorm();

  const double rho = sp.penalty;
  const double margin = sp.weights.collision_margin;

  // goal penalties at each robot's K_i
  for (std::size_t i = 0; i < n_robots; ++i) {
    const auto& spec = inst.robots[i];
    const State& xK = sc.states[i].back();
    for (int d = 0; d < spec.type.state_dim; ++d) {
      const double diff = is_angle_dim(spec.type, d)
                              ? dynamics::wrap_angle(xK(d) - spec.goal(d))
                              : xK(d) - spec.goal(d);
      value += rho * diff * diff;
      sc.gx[i].back()(d) += 2.0 * rho * diff;
    }
  }

  // state-bound hinges (finite bounds and the trailer bend cap)
  for (std::size_t i = 0; i < n_robots; ++i) {
    const auto& spec = inst.robots[i];
    for (int k = 1; k <= sp.horizons[i]; ++k) {
      const State& x = sc.states[i][k];
      for (int d = 0; d < spec.type.state_dim; ++d) {
        if (std::isfinite(spec.bounds.state_lo(d)) &&
            x(d) < spec.bounds.state_lo(d)) {
          const double v = spec.bounds.state_lo(d) - x(d);
          value += rho * v * v;
          sc.gx[i][k](d) -= 2.0 * rho * v;
        }
        if (std::isfinite(spec.bounds.state_hi(d)) &&
            x(d) > spec.bounds.state_hi(d)) {
          const double v = x(d) - spec.bounds.state_hi(d);
          value += rho * v * v;
          sc.gx[i][k](d) += 2.0 * rho * v;
        }
      }
      if (spec.type.tag == RobotTypeTag::CarWithTrailer) {
        const double bend = dynamics::wrap_angle(x(2) - x(3));
        const double v = std::abs(bend) - dynamics::kTrailerMaxBend;
        if (v > 0.0) {
          const double s = bend >= 0.0 ? 1.0 : -1.0;
          value += rho * v * v;
          sc.gx[i][k](2) += 2.0 * rho * v * s;
          sc.gx[i][k](3) -= 2.0 * rho * v * s;
        }
      }
    }
  }

  // collision penalties: robot-robot over the joint horizon (parked robots
  // stay at their final state), robot-obstacle and walls per robot horizon
  int max_k = 0;
  for (std::size_t i = 0; i < n_robots; ++i)
    max_k = std::max(max_k, sp.horizons[i]);
  for (int k = 0; k <= max_k; ++k) {
    for (std::size_t i = 0; i + 1 < n_robots; ++i) {
      const int ki = std::min(k, sp.horizons[i]);
      const auto& xi = sc.states[i][ki];
      const auto parts_i =
          geometry::place(inst.robots[i].type, inst.robots[i].shape, xi);
      for (std::size_t j = i + 1; j < n_robots; ++j) {
        const int kj = std::min(k, sp.horizons[j]);
        const auto& xj = sc.states[j][kj];
        const auto parts_j =
            geometry::place(inst.robots[j].type, inst.robots[j].shape, xj);
        for (std::size_t pi = 0; pi < parts_i.size(); ++pi) {
          for (std::size_t pj = 0; pj < parts_j.size(); ++pj) {
            const auto res =
                geometry::signed_distance_grad(parts_i[pi], parts_j[pj]);
            if (res.distance >= margin) continue;
            const double v = margin - res.distance;
            value += rho * v * v;
            const double dsd = -2.0 * rho * v;  // d value / d sd
            add_pose_grad(inst.robots[i].type, static_cast<int>(pi), xi,
                          dsd * res.grad_pos_a, dsd * res.grad_angle_a,
                          sc.gx[i][ki]);
            add_pose_grad(inst.robots[j].type, static_cast<int>(pj), xj,
                          -dsd * res.grad_pos_a, dsd * res.grad_angle_b,
                          sc.gx[j][kj]);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < n_robots; ++i) {
    const auto& spec = inst.robots[i];
    for (int k = 0; k <= sp.horizons[i]; ++k) {
      const State& x = sc.states[i][k];
      const auto parts = geometry::place(spec.type, spec.shape, x);
      for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        for (const auto& obs : inst.workspace.obstacles) {
          const auto res = geometry::signed_distance_grad(parts[pi], obs);
          if (res.distance >= margin) continue;
          const double v = margin - res.distance;
          value += rho * v * v;
          const double dsd = -2.0 * rho * v;
          add_pose_grad(spec.type, static_cast<int>(pi), x,
                        dsd * res.grad_pos_a, dsd * res.grad_angle_a,
                        sc.gx[i][k]);
        }
        wall_terms(parts[pi], inst.workspace, margin,
                   [&](double v, const Eigen::Vector2d& gpos, double gang) {
                     value += rho * v * v;
                     add_pose_grad(spec.type, static_cast<int>(pi), x,
                                   2.0 * rho * v * gpos, 2.0 * rho * v * gang,
                                   sc.gx[i][k]);
                   });
      }
    }
  }

  if (grad != nullptr) {
    grad->setZero(sp.num_vars());
    int off = 0;
    for (std::size_t i = 0; i < n_robots; ++i) {
      const auto& spec = inst.robots[i];
      const int du = spec.type.action_dim;
      Eigen::MatrixXd A, B;
      Eigen::VectorXd lambda = sc.gx[i][sp.horizons[i]];
      // adjoint sweep; control gradients fill in reverse order
      for (int k = sp.horizons[i] - 1; k >= 0; --k) {
        dynamics::jacobians(spec.type, sc.states[i][k], actions[i][k], dt, A, B);
        grad->segment(off + k * du, du) =
            B.transpose() * lambda +
            2.0 * sp.weights.beta * actions[i][k];
        gdt += lambda.dot(
            dynamics::flow(spec.type, sc.states[i][k], actions[i][k]));
        lambda = sc.gx[i][k] + A.transpose() * lambda;
      }
      off += sp.horizons[i] * du;
    }
    (*grad)(off) = gdt;
  }
  return value;
}

double total_violation(const ShootingProblem& sp, const Eigen::VectorXd& vars) {
  // same terms as the penalty, unweighted: recompute via rho = 1 minus the
  // base objective
  ShootingProblem probe = sp;
  probe.penalty = 1.0;
  probe.weights.beta = 0.0;
  const double with_terms = objective_and_gradient(probe, vars, nullptr);
  std::vector<std::vector<Action>> actions;
  double dt = 0.0;
  sp.unpack(vars, actions, dt);
  int total_steps = 0;
  for (const auto& a : actions) total_steps += static_cast<int>(a.size());
  return with_terms - total_steps * dt;
}

namespace {

// Projected L-BFGS with Armijo backtracking. Good enough at desk scale; the
// memory is dropped whenever the two-loop direction stops descending.
class LbfgsSolver {
 public:
  LbfgsSolver(const ShootingProblem& sp, int max_iters)
      : sp_(sp), max_iters_(max_iters) {}

  double minimize(Eigen::VectorXd& x) {
    sp_.project(x);
    Eigen::VectorXd g(sp_.num_vars());
    double f = objective_and_gradient(sp_, x, &g);
    for (int it = 0; it < max_iters_; ++it) {
      Eigen::VectorXd d = -two_loop(g);
      if (d.dot(g) > -1e-18) {
        pairs_.clear();
        d = -g;
      }
      Eigen::VectorXd x_new, g_new(g.size());
      double f_new = f;
      bool accepted = false;
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        double alpha = 1.0;
        for (int bt = 0; bt < 48; ++bt) {
          x_new = x + alpha * d;
          sp_.project(x_new);
          const Eigen::VectorXd step = x_new - x;
          if (step.lpNorm<Eigen::Infinity>() < 1e-14) break;
          f_new = objective_and_gradient(sp_, x_new, &g_new);
          if (f_new <= f + 1e-4 * g.dot(step)) {
            accepted = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!accepted && attempt == 0) {
          // stale quasi-Newton direction; retry along the plain gradient
          if (d == -g) break;
          pairs_.clear();
          d = -g;
        }
      }
      if (!accepted) break;
      const Eigen::VectorXd s = x_new - x;
      const Eigen::VectorXd y = g_new - g;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        pairs_.push_back({s, y, sy});
        if (pairs_.size() > 8) pairs_.pop_front();
      }
      x = std::move(x_new);
      g = g_new;
      const double df = f - f_new;
      f = f_new;
      // projected-gradient stationarity
      Eigen::VectorXd probe = x - g;
      sp_.project(probe);
      if ((probe - x).lpNorm<Eigen::Infinity>() < 1e-10) break;
      if (df < 1e-12 * (1.0 + std::abs(f))) break;
    }
    return f;
  }

 private:
  struct Pair {
    Eigen::VectorXd s, y;
    double sy;
  };

  Eigen::VectorXd two_loop(const Eigen::VectorXd& g) const {
    Eigen::VectorXd q = g;
    std::vector<double> a(pairs_.size());
    for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
      a[i] = pairs_[i].s.dot(q) / pairs_[i].sy;
      q -= a[i] * pairs_[i].y;
    }
    if (!pairs_.empty()) {
      const auto& last = pairs_.back();
      q *= last.sy / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const double b = pairs_[i].y.dot(q) / pairs_[i].sy;
      q += (a[i] - b) * pairs_[i].s;
    }
    return q;
  }

  ShootingProblem sp_;
  int max_iters_;
  std::deque<Pair> pairs_;
};

std::vector<RobotTrajectory> rebuild_trajectories(
    const ShootingProblem& sp, const Eigen::VectorXd& vars, double* dt_out) {
  std::vector<std::vector<Action>> actions;
  double dt = 0.0;
  sp.unpack(vars, actions, dt);
  std::vector<RobotTrajectory> out(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& spec = sp.instance->robots[i];
    out[i].actions = actions[i];
    out[i].states.resize(actions[i].size() + 1);
    out[i].states[0] = spec.start;
    // final reconstruction steps through the canonical integrator so the
    // output is Euler-consistent to the last bit
    for (std::size_t k = 0; k < actions[i].size(); ++k)
      out[i].states[k + 1] =
          dynamics::step(spec.type, out[i].states[k], actions[i][k], dt);
  }
  *dt_out = dt;
  return out;
}

}  // namespace

FeasReport feasibility_report(const std::vector<RobotTrajectory>& robots,
                              double dt, const ProblemInstance& instance,
                              const OptWeights& weights) {
  FeasReport rep;
  rep.min_margin = kInf;
  std::ostringstream worst;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const auto& spec = instance.robots[i];
    const auto& tr = robots[i];
    for (int k = 0; k < tr.K(); ++k) {
      const State pred = dynamics::step(spec.type, tr.states[k], tr.actions[k], dt);
      const double r =
          dynamics::distance(spec.type, pred, tr.states[k + 1], spec.weights);
      if (r > rep.max_dyn_residual) {
        rep.max_dyn_residual = r;
        if (r > weights.dyn_tol) {
          worst.str("");
          worst << "dynamics residual " << r << " at robot " << i << " step " << k;
        }
      }
      for (int d = 0; d < spec.type.action_dim; ++d) {
        const double excess =
            std::max(spec.bounds.action_lo(d) - tr.actions[k](d),
                     tr.actions[k](d) - spec.bounds.action_hi(d));
        rep.max_action_violation = std::max(rep.max_action_violation, excess);
      }
    }
    for (const auto& x : tr.states) {
      for (int d = 0; d < spec.type.state_dim; ++d) {
        if (std::isfinite(spec.bounds.state_lo(d)))
          rep.max_state_violation =
              std::max(rep.max_state_violation, spec.bounds.state_lo(d) - x(d));
        if (std::isfinite(spec.bounds.state_hi(d)))
          rep.max_state_violation =
              std::max(rep.max_state_violation, x(d) - spec.bounds.state_hi(d));
      }
      if (spec.type.tag == RobotTypeTag::CarWithTrailer)
        rep.max_state_violation = std::max(
            rep.max_state_violation,
            dynamics::angle_diff(x(2), x(3)) - dynamics::kTrailerMaxBend);
      rep.min_margin =
          std::min(rep.min_margin,
                   geometry::free_space_margin(
                       geometry::place(spec.type, spec.shape, x),
                       instance.workspace));
    }
    // goal attainment at this robot's own horizon
    const State& xK = tr.states.back();
    const double pos_err = (xK.head<2>() - spec.goal.head<2>()).norm();
    rep.max_goal_pos_err = std::max(rep.max_goal_pos_err, pos_err);
    for (int d = 2; d < spec.type.state_dim; ++d) {
      const double err = is_angle_dim(spec.type, d)
                             ? dynamics::angle_diff(xK(d), spec.goal(d))
                             : std::abs(xK(d) - spec.goal(d));
      rep.max_goal_other_err = std::max(rep.max_goal_other_err, err);
    }
  }
  // inter-robot clearance with parking semantics
  int max_k = 0;
  for (const auto& tr : robots) max_k = std::max(max_k, tr.K());
  for (int k = 0; k <= max_k; ++k) {
    for (std::size_t i = 0; i + 1 < robots.size(); ++i) {
      const State& xi = robots[i].states[std::min<std::size_t>(k, robots[i].K())];
      for (std::size_t j = i + 1; j < robots.size(); ++j) {
        const State& xj =
            robots[j].states[std::min<std::size_t>(k, robots[j].K())];
        const double sd = geometry::robot_pair_distance(
            instance.robot_geometry(i), xi, instance.robot_geometry(j), xj);
        if (sd < rep.min_margin) {
          rep.min_margin = sd;
          if (sd < -weights.margin_tol) {
            worst.str("");
            worst << "robots " << i << "," << j << " overlap " << sd
                  << " at step " << k;
          }
        }
      }
    }
  }
  if (rep.max_goal_pos_err > weights.goal_tol_pos && worst.str().empty())
    worst << "goal position error " << rep.max_goal_pos_err;
  rep.worst_note = worst.str();
  return rep;
}

OptResult optimize(const JointGuess& guess, const ProblemInstance& instance,
                   const OptWeights& weights) {
  if (guess.robots.size() != instance.robots.size())
    throw ContractError("optimize: guess/instance robot count mismatch");
  for (std::size_t i = 0; i < guess.robots.size(); ++i) {
    if (guess.robots[i].K() < 1)
      throw ContractError("optimize: horizons must be >= 1");
    if (!guess.robots[i].actions.empty() &&
        guess.robots[i].actions[0].size() != instance.robots[i].type.action_dim)
      throw ContractError("optimize: action dimension mismatch");
  }

  ShootingProblem sp;
  sp.instance = &instance;
  sp.dt_nominal = guess.dt;
  sp.weights = weights;
  for (const auto& tr : guess.robots) sp.horizons.push_back(tr.K());

  Eigen::VectorXd x = sp.pack(guess.robots, guess.dt);
  sp.project(x);  // clamp guess actions on ingest

  OptResult result;
  double best_violation = kInf;
  Eigen::VectorXd best_x = x;
  double rho = weights.penalty_init;
  for (int round = 0; round < weights.max_rounds; ++round) {
    sp.penalty = rho;
    LbfgsSolver solver(sp, weights.max_inner_iters);
    solver.minimize(x);
    const double viol = total_violation(sp, x);
    result.round_violations.push_back(viol);
    if (viol < best_violation) {
      best_violation = viol;
      best_x = x;
    }
    double dt_opt = 0.0;
    auto robots = rebuild_trajectories(sp, x, &dt_opt);
    FeasReport rep = feasibility_report(robots, dt_opt, instance, weights);
    KINOCBS_LOG_DEBUG("trajopt round=" << round << " rho=" << rho
                                       << " violation=" << viol
                                       << " min_margin=" << rep.min_margin
                                       << " goal_pos=" << rep.max_goal_pos_err);
    if (rep.pass(weights)) {
      result.success = true;
      result.solution.robots = std::move(robots);
      result.solution.dt = dt_opt;
      result.solution.report = rep;
      double obj = 0.0;
      for (const auto& tr : result.solution.robots) {
        obj += tr.K() * dt_opt;
        for (const auto& u : tr.actions) obj += weights.beta * u.squaredNorm();
      }
      result.solution.objective = obj;
      return result;
    }
    rho *= weights.penalty_mult;
  }

  double dt_opt = 0.0;
  auto robots = rebuild_trajectories(sp, best_x, &dt_opt);
  result.solution.robots = std::move(robots);
  result.solution.dt = dt_opt;
  result.solution.report =
      feasibility_report(result.solution.robots, dt_opt, instance, weights);
  result.failure = result.solution.report.worst_note.empty()
                       ? "penalty rounds exhausted"
                       : result.solution.report.worst_note;
  return result;
}

}  // namespace kinocbs::trajopt
