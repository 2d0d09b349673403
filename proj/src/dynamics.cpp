#include "kinocbs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinocbs {

RobotType RobotType::from_tag(RobotTypeTag tag) {
  switch (tag) {
    case RobotTypeTag::Unicycle1:
      return {tag, 3, 2};
    case RobotTypeTag::Unicycle2:
      return {tag, 5, 2};
    case RobotTypeTag::DoubleIntegrator2D:
      return {tag, 4, 2};
    case RobotTypeTag::CarWithTrailer:
      return {tag, 4, 2};
  }
  throw ContractError("unknown robot type tag");
}

std::optional<RobotType> RobotType::from_name(std::string_view name) {
  if (name == "unicycle1") return from_tag(RobotTypeTag::Unicycle1);
  if (name == "unicycle2") return from_tag(RobotTypeTag::Unicycle2);
  if (name == "double_integrator2")
    return from_tag(RobotTypeTag::DoubleIntegrator2D);
  if (name == "car_with_trailer")
    return from_tag(RobotTypeTag::CarWithTrailer);
  return std::nullopt;
}

const char* RobotType::name() const {
  switch (tag) {
    case RobotTypeTag::Unicycle1:
      return "unicycle1";
    case RobotTypeTag::Unicycle2:
      return "unicycle2";
    case RobotTypeTag::DoubleIntegrator2D:
      return "double_integrator2";
    case RobotTypeTag::CarWithTrailer:
      return "car_with_trailer";
  }
  return "?";
}

std::vector<RobotType> all_robot_types() {
  return {RobotType::from_tag(RobotTypeTag::Unicycle1),
          RobotType::from_tag(RobotTypeTag::Unicycle2),
          RobotType::from_tag(RobotTypeTag::DoubleIntegrator2D),
          RobotType::from_tag(RobotTypeTag::CarWithTrailer)};
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 finalizer over base ^ rotated salt
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace kinocbs

namespace kinocbs::dynamics {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double wrap_angle(double a) {
  double r = std::fmod(a + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

const std::vector<int>& angle_dims(const RobotType& type) {
  static const std::vector<int> uni{2};
  static const std::vector<int> none{};
  static const std::vector<int> trailer{2, 3};
  switch (type.tag) {
    case RobotTypeTag::Unicycle1:
    case RobotTypeTag::Unicycle2:
      return uni;
    case RobotTypeTag::DoubleIntegrator2D:
      return none;
    case RobotTypeTag::CarWithTrailer:
      return trailer;
  }
  return none;
}

Eigen::VectorXd flow(const RobotType& type, const State& x, const Action& u) {
  check_dims(type, x, u);
  Eigen::VectorXd f(type.state_dim);
  switch (type.tag) {
    case RobotTypeTag::Unicycle1: {
      // x = (x, y, theta), u = (v, omega)
      f << u(0) * std::cos(x(2)), u(0) * std::sin(x(2)), u(1);
      break;
    }
    case RobotTypeTag::Unicycle2: {
      // x = (x, y, theta, v, omega), u = (vdot, omegadot)
      f << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), x(4), u(0), u(1);
      break;
    }
    case RobotTypeTag::DoubleIntegrator2D: {
      // x = (x, y, vx, vy), u = (ax, ay)
      f << x(2), x(3), u(0), u(1);
      break;
    }
    case RobotTypeTag::CarWithTrailer: {
      // x = (x, y, theta0, theta1), u = (v, phi)
      f << u(0) * std::cos(x(2)), u(0) * std::sin(x(2)),
          u(0) * std::tan(u(1)) / kCarWheelbase,
          u(0) / kTrailerHitch * std::sin(x(2) - x(3));
      break;
    }
  }
  return f;
}

State step(const RobotType& type, const State& x, const Action& u, double dt) {
  if (dt <= 0.0) throw ContractError("step: dt must be positive");
  State next = x + flow(type, x, u) * dt;
  for (int d : angle_dims(type)) next(d) = wrap_angle(next(d));
  return next;
}

void jacobians(const RobotType& type, const State& x, const Action& u,
               double dt, Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  check_dims(type, x, u);
  Eigen::MatrixXd fx = Eigen::MatrixXd::Zero(type.state_dim, type.state_dim);
  Eigen::MatrixXd fu = Eigen::MatrixXd::Zero(type.state_dim, type.action_dim);
  switch (type.tag) {
    case RobotTypeTag::Unicycle1: {
      const double c = std::cos(x(2)), s = std::sin(x(2));
      fx(0, 2) = -u(0) * s;
      fx(1, 2) = u(0) * c;
      fu(0, 0) = c;
      fu(1, 0) = s;
      fu(2, 1) = 1.0;
      break;
    }
    case RobotTypeTag::Unicycle2: {
      const double c = std::cos(x(2)), s = std::sin(x(2));
      fx(0, 2) = -x(3) * s;
      fx(0, 3) = c;
      fx(1, 2) = x(3) * c;
      fx(1, 3) = s;
      fx(2, 4) = 1.0;
      fu(3, 0) = 1.0;
      fu(4, 1) = 1.0;
      break;
    }
    case RobotTypeTag::DoubleIntegrator2D: {
      fx(0, 2) = 1.0;
      fx(1, 3) = 1.0;
      fu(2, 0) = 1.0;
      fu(3, 1) = 1.0;
      break;
    }
    case RobotTypeTag::CarWithTrailer: {
      const double c0 = std::cos(x(2)), s0 = std::sin(x(2));
      const double cd = std::cos(x(2) - x(3));
      const double tphi = std::tan(u(1));
      fx(0, 2) = -u(0) * s0;
      fx(1, 2) = u(0) * c0;
      fx(3, 2) = u(0) / kTrailerHitch * cd;
      fx(3, 3) = -u(0) / kTrailerHitch * cd;
      fu(0, 0) = c0;
      fu(1, 0) = s0;
      fu(2, 0) = tphi / kCarWheelbase;
      fu(2, 1) = u(0) * (1.0 + tphi * tphi) / kCarWheelbase;
      fu(3, 0) = std::sin(x(2) - x(3)) / kTrailerHitch;
      break;
    }
  }
  A = Eigen::MatrixXd::Identity(type.state_dim, type.state_dim) + fx * dt;
  B = fu * dt;
}

double distance(const RobotType& type, const State& a, const State& b,
                const MetricWeights& weights) {
  if (a.size() != type.state_dim || b.size() != type.state_dim)
    throw ContractError("distance: state dimension mismatch");
  if (weights.w.size() != type.state_dim)
    throw ContractError("distance: weight dimension mismatch");
  const auto& adim = angle_dims(type);
  double sq = 0.0;
  for (int i = 0; i < type.state_dim; ++i) {
    double diff;
    if (std::find(adim.begin(), adim.end(), i) != adim.end()) {
      diff = angle_diff(a(i), b(i));
    } else {
      diff = a(i) - b(i);
    }
    const double wd = weights.w(i) * diff;
    sq += wd * wd;
  }
  return std::sqrt(sq);
}

MetricWeights zero_position_weights(const RobotType& type,
                                    const MetricWeights& weights) {
  MetricWeights out = weights;
  out.w(0) = 0.0;
  out.w(1) = 0.0;
  (void)type;
  return out;
}

Bounds default_bounds(const RobotType& type) {
  Bounds b;
  b.state_lo = Eigen::VectorXd::Constant(type.state_dim, -kInf);
  b.state_hi = Eigen::VectorXd::Constant(type.state_dim, kInf);
  switch (type.tag) {
    case RobotTypeTag::Unicycle1:
      b.action_lo = Eigen::Vector2d(-0.5, -0.5);
      b.action_hi = Eigen::Vector2d(0.5, 0.5);
      break;
    case RobotTypeTag::Unicycle2:
      b.state_lo(3) = -0.5;
      b.state_hi(3) = 0.5;
      b.state_lo(4) = -0.5;
      b.state_hi(4) = 0.5;
      b.action_lo = Eigen::Vector2d(-0.25, -0.25);
      b.action_hi = Eigen::Vector2d(0.25, 0.25);
      break;
    case RobotTypeTag::DoubleIntegrator2D:
      b.state_lo(2) = -0.5;
      b.state_hi(2) = 0.5;
      b.state_lo(3) = -0.5;
      b.state_hi(3) = 0.5;
      b.action_lo = Eigen::Vector2d(-2.0, -2.0);
      b.action_hi = Eigen::Vector2d(2.0, 2.0);
      break;
    case RobotTypeTag::CarWithTrailer:
      b.action_lo = Eigen::Vector2d(-0.1, -M_PI / 3.0);
      b.action_hi = Eigen::Vector2d(0.5, M_PI / 3.0);
      break;
  }
  return b;
}

MetricWeights default_metric_weights(const RobotType& type) {
  MetricWeights mw;
  mw.w = Eigen::VectorXd::Ones(type.state_dim);
  for (int d : angle_dims(type)) mw.w(d) = 0.5;
  switch (type.tag) {
    case RobotTypeTag::Unicycle2:
      mw.w(3) = 0.25;
      mw.w(4) = 0.25;
      break;
    case RobotTypeTag::DoubleIntegrator2D:
      mw.w(2) = 0.25;
      mw.w(3) = 0.25;
      break;
    default:
      break;
  }
  return mw;
}

bool state_within_bounds(const RobotType& type, const State& x,
                         const Bounds& bounds) {
  for (int i = 0; i < type.state_dim; ++i) {
    if (x(i) < bounds.state_lo(i) || x(i) > bounds.state_hi(i)) return false;
  }
  if (type.tag == RobotTypeTag::CarWithTrailer) {
    if (angle_diff(x(2), x(3)) > kTrailerMaxBend) return false;
  }
  return true;
}

bool action_within_bounds(const RobotType& type, const Action& u,
                          const Bounds& bounds, double tol) {
  for (int i = 0; i < type.action_dim; ++i) {
    if (u(i) < bounds.action_lo(i) - tol || u(i) > bounds.action_hi(i) + tol)
      return false;
  }
  return true;
}

State sample_state(const RobotType& type, Rng& rng, const Bounds& bounds,
                   const Eigen::Vector2d& ws_lo, const Eigen::Vector2d& ws_hi) {
  State x(type.state_dim);
  x(0) = rng.uniform(ws_lo(0), ws_hi(0));
  x(1) = rng.uniform(ws_lo(1), ws_hi(1));
  const auto& adim = angle_dims(type);
  for (int i = 2; i < type.state_dim; ++i) {
    if (std::find(adim.begin(), adim.end(), i) != adim.end()) {
      x(i) = wrap_angle(rng.uniform(-M_PI, M_PI));
    } else {
      x(i) = rng.uniform(bounds.state_lo(i), bounds.state_hi(i));
    }
  }
  if (type.tag == RobotTypeTag::CarWithTrailer) {
    // keep the hitch bend feasible by sampling the trailer angle relative
    // to the tractor heading
    x(3) = wrap_angle(x(2) + rng.uniform(-kTrailerMaxBend, kTrailerMaxBend));
  }
  return x;
}

Action sample_action(const RobotType& type, Rng& rng, const Bounds& bounds) {
  Action u(type.action_dim);
  for (int i = 0; i < type.action_dim; ++i)
    u(i) = rng.uniform(bounds.action_lo(i), bounds.action_hi(i));
  return u;
}

double max_speed(const RobotType& type, const Bounds& bounds) {
  switch (type.tag) {
    case RobotTypeTag::Unicycle1:
    case RobotTypeTag::CarWithTrailer: {
      return std::max(std::abs(bounds.action_lo(0)),
                      std::abs(bounds.action_hi(0)));
    }
    case RobotTypeTag::Unicycle2: {
      return std::max(std::abs(bounds.state_lo(3)),
                      std::abs(bounds.state_hi(3)));
    }
    case RobotTypeTag::DoubleIntegrator2D: {
      const double vx = std::max(std::abs(bounds.state_lo(2)),
                                 std::abs(bounds.state_hi(2)));
      const double vy = std::max(std::abs(bounds.state_lo(3)),
                                 std::abs(bounds.state_hi(3)));
      return std::hypot(vx, vy);
    }
  }
  return 1.0;
}

}  // namespace kinocbs::dynamics
