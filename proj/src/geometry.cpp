#include "kinocbs/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "kinocbs/dynamics.hpp"

namespace kinocbs::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v(1), v(0)}; }

Eigen::Matrix2d rot(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

bool is_disk(const Shape& s) { return std::holds_alternative<Disk>(s); }

std::array<Eigen::Vector2d, 4> box_corners(const PlacedShape& p) {
  const auto& b = std::get<OrientedBox>(p.shape);
  const Eigen::Matrix2d r = rot(p.orientation);
  const Eigen::Vector2d ex = r.col(0) * b.half_extents(0);
  const Eigen::Vector2d ey = r.col(1) * b.half_extents(1);
  return {p.position + ex + ey, p.position - ex + ey, p.position - ex - ey,
          p.position + ex - ey};
}

// Closest points between two segments; returns squared distance.
double segment_segment(const Eigen::Vector2d& p1, const Eigen::Vector2d& q1,
                       const Eigen::Vector2d& p2, const Eigen::Vector2d& q2,
                       Eigen::Vector2d& c1, Eigen::Vector2d& c2) {
  const Eigen::Vector2d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  const double c = d1.dot(r);
  if (a <= 1e-18 && e <= 1e-18) {
    c1 = p1;
    c2 = p2;
    return (c1 - c2).squaredNorm();
  }
  if (a <= 1e-18) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else if (e <= 1e-18) {
    s = std::clamp(-c / a, 0.0, 1.0);
  } else {
    const double b = d1.dot(d2);
    const double denom = a * e - b * b;
    if (denom > 1e-18) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
    t = (b * s + f) / e;
    if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1.0) {
      t = 1.0;
      s = std::clamp((b - c) / a, 0.0, 1.0);
    }
  }
  c1 = p1 + d1 * s;
  c2 = p2 + d2 * t;
  return (c1 - c2).squaredNorm();
}

struct SatAxis {
  double overlap = kInf;
  Eigen::Vector2d axis{1.0, 0.0};  // unit, owned by one of the boxes
  int owner = 0;                   // 0: axis from a, 1: axis from b
  double t = 0.0;                  // (c_b - c_a) . axis
};

// Extent of a box projected onto a unit axis.
double projected_extent(const PlacedShape& p, const Eigen::Vector2d& n) {
  const auto& b = std::get<OrientedBox>(p.shape);
  const Eigen::Matrix2d r = rot(p.orientation);
  return b.half_extents(0) * std::abs(n.dot(r.col(0))) +
         b.half_extents(1) * std::abs(n.dot(r.col(1)));
}

DistanceResult disk_disk(const PlacedShape& a, const PlacedShape& b) {
  const double ra = std::get<Disk>(a.shape).radius;
  const double rb = std::get<Disk>(b.shape).radius;
  const Eigen::Vector2d d = a.position - b.position;
  const double dist = d.norm();
  DistanceResult res;
  res.distance = dist - ra - rb;
  res.grad_pos_a = dist > 1e-12 ? Eigen::Vector2d(d / dist)
                                : Eigen::Vector2d(1.0, 0.0);
  return res;
}

// a is the disk, b the box.
DistanceResult disk_box(const PlacedShape& a, const PlacedShape& b) {
  const double r = std::get<Disk>(a.shape).radius;
  const auto& box = std::get<OrientedBox>(b.shape);
  const Eigen::Matrix2d rb = rot(b.orientation);
  const Eigen::Vector2d q = rb.transpose() * (a.position - b.position);
  const Eigen::Vector2d h = box.half_extents;
  DistanceResult res;
  const Eigen::Vector2d clamped(std::clamp(q(0), -h(0), h(0)),
                                std::clamp(q(1), -h(1), h(1)));
  if ((q - clamped).squaredNorm() > 0.0) {
    // center outside the box (possibly still overlapping through the radius)
    const Eigen::Vector2d delta = q - clamped;
    const double dist = delta.norm();
    res.distance = dist - r;
    const Eigen::Vector2d n = rb * (delta / dist);
    res.grad_pos_a = n;
    const Eigen::Vector2d pb = b.position + rb * clamped;  // witness on box
    res.grad_angle_b = -n.dot(perp(pb - b.position));
  } else {
    // center inside the box: separate along the nearest face
    const int j = (h(0) - std::abs(q(0)) <= h(1) - std::abs(q(1))) ? 0 : 1;
    const double sgn = q(j) >= 0.0 ? 1.0 : -1.0;
    res.distance = std::abs(q(j)) - h(j) - r;
    const Eigen::Vector2d n = rb.col(j) * sgn;
    res.grad_pos_a = n;
    res.grad_angle_b = -n.dot(perp(a.position - b.position));
  }
  return res;
}

DistanceResult box_box(const PlacedShape& a, const PlacedShape& b) {
  const Eigen::Matrix2d ra = rot(a.orientation), rb = rot(b.orientation);
  const Eigen::Vector2d cab = b.position - a.position;

  SatAxis best;
  bool disjoint = false;
  for (int owner = 0; owner < 2 && !disjoint; ++owner) {
    const Eigen::Matrix2d& r = owner == 0 ? ra : rb;
    for (int j = 0; j < 2; ++j) {
      const Eigen::Vector2d n = r.col(j);
      const double t = cab.dot(n);
      const double overlap =
          projected_extent(a, n) + projected_extent(b, n) - std::abs(t);
      if (overlap < 0.0) disjoint = true;
      if (overlap < best.overlap) best = {overlap, n, owner, t};
    }
  }

  DistanceResult res;
  if (disjoint) {
    // exact separation: minimum over edge pairs
    const auto ca = box_corners(a), cb = box_corners(b);
    double best_sq = kInf;
    Eigen::Vector2d pa, pb, w1, w2;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double sq = segment_segment(ca[i], ca[(i + 1) % 4], cb[j],
                                          cb[(j + 1) % 4], w1, w2);
        if (sq < best_sq) {
          best_sq = sq;
          pa = w1;
          pb = w2;
        }
      }
    }
    const double dist = std::sqrt(best_sq);
    res.distance = dist;
    const Eigen::Vector2d n =
        dist > 1e-12 ? Eigen::Vector2d((pa - pb) / dist) : best.axis;
    res.grad_pos_a = n;
    res.grad_angle_a = n.dot(perp(pa - a.position));
    res.grad_angle_b = -n.dot(perp(pb - b.position));
    return res;
  }

  // overlapping: penetration depth along the least-overlap face normal
  res.distance = -best.overlap;
  const double sgn = best.t >= 0.0 ? 1.0 : -1.0;
  const Eigen::Vector2d n = best.axis;
  res.grad_pos_a = -sgn * n;

  // d(overlap)/d(theta): rotating the axis owner rotates n, which moves the
  // other box's projected extent and the center projection; rotating the
  // other box only moves its own extent. sd = -overlap flips the sign.
  const PlacedShape& other_shape = best.owner == 0 ? b : a;
  const Eigen::Vector2d dn = perp(n);
  const auto& ho = std::get<OrientedBox>(other_shape.shape).half_extents;
  const Eigen::Matrix2d ro = rot(other_shape.orientation);
  double d_overlap_owner = -sgn * cab.dot(dn);
  double d_overlap_other = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double pr = n.dot(ro.col(j));
    const double s = pr >= 0.0 ? 1.0 : -1.0;
    d_overlap_owner += ho(j) * s * dn.dot(ro.col(j));
    d_overlap_other += ho(j) * s * n.dot(perp(ro.col(j)));
  }
  if (best.owner == 0) {
    res.grad_angle_a = -d_overlap_owner;
    res.grad_angle_b = -d_overlap_other;
  } else {
    res.grad_angle_b = -d_overlap_owner;
    res.grad_angle_a = -d_overlap_other;
  }
  return res;
}

double wall_margin(const PlacedShape& p, const Workspace& ws) {
  double m = kInf;
  if (is_disk(p.shape)) {
    const double r = std::get<Disk>(p.shape).radius;
    m = std::min(m, p.position(0) - r - ws.lo(0));
    m = std::min(m, ws.hi(0) - p.position(0) - r);
    m = std::min(m, p.position(1) - r - ws.lo(1));
    m = std::min(m, ws.hi(1) - p.position(1) - r);
  } else {
    for (const auto& c : box_corners(p)) {
      m = std::min(m, c(0) - ws.lo(0));
      m = std::min(m, ws.hi(0) - c(0));
      m = std::min(m, c(1) - ws.lo(1));
      m = std::min(m, ws.hi(1) - c(1));
    }
  }
  return m;
}

}  // namespace

std::vector<PlacedShape> place(const RobotType& type, const Shape& shape,
                               const State& state) {
  if (state.size() != type.state_dim)
    throw ContractError("place: state dimension mismatch");
  switch (type.tag) {
    case RobotTypeTag::Unicycle1:
    case RobotTypeTag::Unicycle2:
      return {{shape, state.head<2>(), state(2)}};
    case RobotTypeTag::DoubleIntegrator2D:
      return {{shape, state.head<2>(), 0.0}};
    case RobotTypeTag::CarWithTrailer: {
      const Eigen::Vector2d hitch(std::cos(state(3)), std::sin(state(3)));
      return {{shape, state.head<2>(), state(2)},
              {shape,
               Eigen::Vector2d(state.head<2>() -
                               dynamics::kTrailerHitch * hitch),
               state(3)}};
    }
  }
  throw ContractError("place: unknown robot type");
}

double signed_distance(const PlacedShape& a, const PlacedShape& b) {
  return signed_distance_grad(a, b).distance;
}

DistanceResult signed_distance_grad(const PlacedShape& a,
                                    const PlacedShape& b) {
  if (is_disk(a.shape) && is_disk(b.shape)) return disk_disk(a, b);
  if (is_disk(a.shape) && !is_disk(b.shape)) return disk_box(a, b);
  if (!is_disk(a.shape) && is_disk(b.shape)) {
    DistanceResult r = disk_box(b, a);
    std::swap(r.grad_angle_a, r.grad_angle_b);
    r.grad_pos_a = -r.grad_pos_a;
    return r;
  }
  return box_box(a, b);
}

double free_space_margin(const std::vector<PlacedShape>& placed,
                         const Workspace& ws) {
  double m = kInf;
  for (const auto& p : placed) {
    m = std::min(m, wall_margin(p, ws));
    for (const auto& obs : ws.obstacles)
      m = std::min(m, signed_distance(p, obs));
  }
  return m;
}

namespace {

double circumradius(const Shape& s) {
  if (std::holds_alternative<Disk>(s)) return std::get<Disk>(s).radius;
  return std::get<OrientedBox>(s).half_extents.norm();
}

}  // namespace

bool in_free_space(const std::vector<PlacedShape>& placed,
                   const Workspace& ws) {
  for (const auto& p : placed) {
    if (wall_margin(p, ws) <= 0.0) return false;
    const double rp = circumradius(p.shape);
    for (const auto& obs : ws.obstacles) {
      // bounding-circle reject before the exact test
      if ((p.position - obs.position).norm() - rp - circumradius(obs.shape) >
          0.0)
        continue;
      if (signed_distance(p, obs) <= 0.0) return false;
    }
  }
  return true;
}

bool in_free_space_tol(const std::vector<PlacedShape>& placed,
                       const Workspace& ws, double tol) {
  return free_space_margin(placed, ws) > -tol;
}

double robot_pair_distance(const RobotGeometry& ga, const State& xa,
                           const RobotGeometry& gb, const State& xb) {
  const auto pa = place(ga.type, ga.shape, xa);
  const auto pb = place(gb.type, gb.shape, xb);
  double m = kInf;
  for (const auto& sa : pa)
    for (const auto& sb : pb) m = std::min(m, signed_distance(sa, sb));
  return m;
}

std::optional<std::pair<std::size_t, std::size_t>> pairwise_clear(
    const std::vector<RobotGeometry>& robots, const std::vector<State>& states,
    double margin) {
  if (robots.size() != states.size())
    throw ContractError("pairwise_clear: robots/states size mismatch");
  for (std::size_t i = 0; i + 1 < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      if (robot_pair_distance(robots[i], states[i], robots[j], states[j]) <
          margin)
        return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

}  // namespace kinocbs::geometry
