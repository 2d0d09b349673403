#include "kinocbs/dbastar.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <boost/heap/d_ary_heap.hpp>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <unordered_map>

#include "kinocbs/dynamics.hpp"

namespace kinocbs::dbastar {

namespace {

using Clock = std::chrono::steady_clock;

struct Arrival {
  double g = 0.0;
  struct SearchNode* parent = nullptr;
  std::size_t prim = 0;  // index into the primitive set (unused at the root)
};

struct SearchNode;

struct NodeCompare {
  // boost max-heap: top() is the "greatest"; we invert so that the node with
  // the lowest f (tie: largest g, then FIFO) is on top.
  bool operator()(const SearchNode* a, const SearchNode* b) const;
};

using OpenHeap =
    boost::heap::d_ary_heap<SearchNode*, boost::heap::arity<2>,
                            boost::heap::compare<NodeCompare>,
                            boost::heap::mutable_<true>>;

struct SearchNode {
  State state;
  double g = 0.0;
  double h = 0.0;
  std::uint64_t id = 0;
  std::vector<Arrival> arrivals;  // sorted by g ascending
  bool in_open = false;
  int late_arrivals = 0;  // slower arrivals kept near a constrained goal
  OpenHeap::handle_type handle;
  double f() const { return g + h; }
};

bool NodeCompare::operator()(const SearchNode* a, const SearchNode* b) const {
  if (a->f() != b->f()) return a->f() > b->f();
  if (a->g != b->g) return a->g < b->g;
  return a->id > b->id;
}

// Exact radius search over explored vertices, accelerated by uniform grid
// buckets on position. Falls back to the full metric for the final filter,
// so results match a linear scan exactly.
class VertexIndex {
 public:
  VertexIndex(const RobotType& type, const MetricWeights& weights,
              double radius)
      : type_(type), weights_(weights), radius_(radius) {
    const double wmin = std::min(weights.w(0), weights.w(1));
    cell_ = std::max(radius / std::max(wmin, 1e-12), 1e-9);
  }

  void add(SearchNode* n) {
    buckets_[key(n->state)].push_back(n);
  }

  std::vector<SearchNode*> query(const State& x) const {
    std::vector<SearchNode*> out;
    const auto [cx, cy] = key(x);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find({cx + dx, cy + dy});
        if (it == buckets_.end()) continue;
        for (SearchNode* n : it->second) {
          if (dynamics::distance(type_, n->state, x, weights_) <= radius_)
            out.push_back(n);
        }
      }
    }
    return out;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
      return std::hash<std::int64_t>()(k.first * 0x9e3779b97f4a7c15LL ^ k.second);
    }
  };
  std::pair<std::int64_t, std::int64_t> key(const State& x) const {
    return {static_cast<std::int64_t>(std::floor(x(0) / cell_)),
            static_cast<std::int64_t>(std::floor(x(1) / cell_))};
  }
  RobotType type_;
  MetricWeights weights_;
  double radius_;
  double cell_;
  std::unordered_map<std::pair<std::int64_t, std::int64_t>,
                     std::vector<SearchNode*>, KeyHash>
      buckets_;
};

// Timestep index a constraint maps to within a motion that starts at
// elapsed time node_g. Robust against accumulated floating error in g.
std::int64_t constraint_index(double constraint_time_s, double node_g,
                              double dt) {
  const double s = (constraint_time_s - node_g) / dt;
  const double r = std::round(s);
  if (std::abs(s - r) < 1e-6) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(s));
}

struct Candidate {
  std::vector<State> states;
  std::vector<Action> actions;
  double g = 0.0;
};

// Rebuild the state/action sequence for one arrival chain. Returns false if
// the chain's timing cannot be reconstructed (should not happen).
bool reconstruct(const primitives::PrimitiveSet& prims, SearchNode* node,
                 const Arrival& arrival, Candidate& out) {
  std::vector<std::pair<SearchNode*, const Arrival*>> chain;  // goal..root
  SearchNode* cur = node;
  const Arrival* arr = &arrival;
  while (arr->parent != nullptr) {
    chain.emplace_back(cur, arr);
    SearchNode* p = arr->parent;
    const double want_g = arr->g - prims.prims[arr->prim].duration(prims.dt);
    const Arrival* parr = nullptr;
    for (const auto& a : p->arrivals) {
      if (std::abs(a.g - want_g) < 1e-9) {
        parr = &a;
        break;
      }
    }
    if (parr == nullptr) return false;
    cur = p;
    arr = parr;
  }
  // `cur` is now the root; walk forward
  out.states.clear();
  out.actions.clear();
  out.g = arrival.g;
  if (chain.empty()) {
    out.states.push_back(node->state);
    return true;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    SearchNode* parent = it->second->parent;
    const auto& m = prims.prims[it->second->prim];
    auto seq = primitives::apply(parent->state, m);
    const bool last = std::next(it) == chain.rend();
    const std::size_t take = last ? seq.size() : seq.size() - 1;
    for (std::size_t k = 0; k < take; ++k) out.states.push_back(seq[k]);
    for (const auto& a : m.actions) out.actions.push_back(a);
  }
  return true;
}

// Full acceptance check for a reconstructed candidate: endpoint gaps,
// junction residuals, and constraint clearance (with parking) at actual
// timesteps.
bool candidate_ok(const Candidate& c, const State& start, const State& goal,
                  const std::vector<Constraint>& constraints,
                  const RobotType& type, const MetricWeights& weights,
                  double delta, double dt) {
  if (dynamics::distance(type, c.states.front(), start, weights) > delta)
    return false;
  if (dynamics::distance(type, c.states.back(), goal, weights) > delta)
    return false;
  const int K = static_cast<int>(c.actions.size());
  for (int k = 0; k < K; ++k) {
    const State pred = dynamics::step(type, c.states[k], c.actions[k], dt);
    if (dynamics::distance(type, pred, c.states[k + 1], weights) > delta)
      return false;
  }
  for (const auto& con : constraints) {
    const int k = std::min(con.time, K);
    if (k < 0) continue;
    if (dynamics::distance(type, c.states[k], con.state, weights) <= delta)
      return false;
  }
  return true;
}

}  // namespace

bool constraint_filter(double node_g, const std::vector<State>& motion_states,
                       const std::vector<Constraint>& constraints, double delta,
                       double dt, const RobotType& type,
                       const MetricWeights& weights) {
  const std::int64_t k_max = static_cast<std::int64_t>(motion_states.size()) - 1;
  for (const auto& c : constraints) {
    const std::int64_t idx = constraint_index(c.time * dt, node_g, dt);
    if (idx < 0 || idx > k_max) continue;
    if (dynamics::distance(type, motion_states[idx], c.state, weights) <= delta)
      return false;
  }
  return true;
}

PlanResult plan(const geometry::RobotGeometry& robot, const State& start,
                const State& goal, const geometry::Workspace& ws,
                const primitives::PrimitiveSet& prims, const PlanOptions& opts,
                const std::vector<Constraint>& constraints,
                const Bounds& bounds, const MetricWeights& weights) {
  if (opts.delta <= 0.0) throw ContractError("plan: delta must be positive");
  if (opts.alpha < 0.0 || opts.alpha >= 1.0)
    throw ContractError("plan: alpha must be in [0, 1)");
  const auto t0 = Clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  const RobotType& type = robot.type;
  const double dt = prims.dt;
  const double vmax = dynamics::max_speed(type, bounds);
  auto h_fn = opts.heuristic
                  ? opts.heuristic
                  : std::function<double(const State&)>([&goal, vmax](const State& x) {
                      return (x.head<2>() - goal.head<2>()).norm() / vmax;
                    });

  PlanResult res;
  res.status = PlanStatus::Infeasible;

  // Constraints sitting within delta of the goal force a robot that is
  // already there to leave and come back. The return leg arrives at
  // already-explored vertices with a worse cost, so near such a goal we
  // also record a few non-improving arrivals (and re-open their nodes);
  // plain duplicate pruning would make waiting impossible.
  double last_goal_constraint_time = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    if (dynamics::distance(robot.type, c.state, goal, weights) <= opts.delta)
      last_goal_constraint_time =
          std::max(last_goal_constraint_time, c.time * prims.dt);
  }

  std::deque<SearchNode> pool;  // stable addresses
  VertexIndex explored(type, weights, (1.0 - opts.alpha) * opts.delta);
  OpenHeap open;
  std::uint64_t next_id = 0;

  auto make_node = [&](const State& s, double g, const Arrival& a) {
    pool.push_back(SearchNode{s, g, h_fn(s), next_id++, {a}, false, {}});
    return &pool.back();
  };

  SearchNode* root = make_node(start, 0.0, Arrival{0.0, nullptr, 0});
  root->handle = open.push(root);
  root->in_open = true;
  explored.add(root);

  auto accept = [&](SearchNode* n) -> bool {
    if (dynamics::distance(type, n->state, goal, weights) > opts.delta)
      return false;
    for (const auto& arr : n->arrivals) {
      Candidate cand;
      if (!reconstruct(prims, n, arr, cand)) continue;
      if (!candidate_ok(cand, start, goal, constraints, type, weights,
                        opts.delta, dt))
        continue;
      res.solution.states = std::move(cand.states);
      res.solution.actions = std::move(cand.actions);
      res.solution.delta_used = opts.delta;
      res.status = PlanStatus::Success;
      return true;
    }
    return false;
  };

  while (!open.empty()) {
    if (elapsed() > opts.time_limit_s) {
      res.status = PlanStatus::TimeLimit;
      break;
    }
    SearchNode* n = open.top();
#ifndef NDEBUG
    for (auto it = open.begin(); it != open.end(); ++it)
      assert(n->f() <= (*it)->f() + 1e-12);
#endif
    open.pop();
    n->in_open = false;
    ++res.expansions;
    if (res.expansions > opts.max_expansions) break;

    if (accept(n)) break;

    for (std::size_t pi : prims.query_applicable(n->state, opts.alpha * opts.delta)) {
      const auto& m = prims.prims[pi];
      const double g_t = n->g + m.duration(dt);

      // duplicate test first: most motions land on already-explored cells
      // with no better cost, so the expensive checks can be skipped
      State x_new = m.states.back();
      x_new.head<2>() += n->state.head<2>() - m.states.front().head<2>();
      const auto nearby = explored.query(x_new);
      bool improves = nearby.empty();
      bool late_goal_return = false;
      for (SearchNode* other : nearby) {
        if (g_t < other->g - 1e-12) {
          improves = true;
          break;
        }
        if (g_t > last_goal_constraint_time && other->late_arrivals < 3 &&
            dynamics::distance(type, other->state, goal, weights) <=
                opts.delta)
          late_goal_return = true;
      }
      if (!improves && !late_goal_return) continue;

      const auto seq = primitives::apply(n->state, m);
      if (!constraint_filter(n->g, seq, constraints, opts.delta, dt, type,
                             weights))
        continue;
      bool free = true;
      for (const auto& s : seq) {
        if (!dynamics::state_within_bounds(type, s, bounds) ||
            !geometry::in_free_space(geometry::place(type, robot.shape, s), ws)) {
          free = false;
          break;
        }
      }
      if (!free) continue;

      if (nearby.empty()) {
        SearchNode* child = make_node(x_new, g_t, Arrival{g_t, n, pi});
        child->handle = open.push(child);
        child->in_open = true;
        explored.add(child);
      } else {
        for (SearchNode* other : nearby) {
          if (g_t < other->g - 1e-12) {
            other->g = g_t;
            // keep earlier arrivals: constrained re-expansion may need them
            other->arrivals.insert(other->arrivals.begin(),
                                   Arrival{g_t, n, pi});
            if (other->in_open) {
              open.update(other->handle);
            } else {
              other->handle = open.push(other);
              other->in_open = true;
            }
          } else if (g_t > last_goal_constraint_time &&
                     other->late_arrivals < 3 &&
                     dynamics::distance(type, other->state, goal, weights) <=
                         opts.delta) {
            auto at = std::lower_bound(
                other->arrivals.begin(), other->arrivals.end(), g_t,
                [](const Arrival& a, double g) { return a.g < g; });
            other->arrivals.insert(at, Arrival{g_t, n, pi});
            ++other->late_arrivals;
            if (!other->in_open) {
              other->handle = open.push(other);
              other->in_open = true;
            }
          }
        }
      }
    }
  }

  res.wall_time_s = elapsed();
  if (res.status == PlanStatus::Infeasible && elapsed() > opts.time_limit_s)
    res.status = PlanStatus::TimeLimit;

  if (!opts.tree_dump_path.empty()) {
    YAML::Emitter em;
    em << YAML::BeginSeq;
    for (const auto& n : pool) {
      em << YAML::Flow << YAML::BeginMap;
      em << YAML::Key << "id" << YAML::Value << n.id;
      em << YAML::Key << "g" << YAML::Value << n.g;
      em << YAML::Key << "h" << YAML::Value << n.h;
      em << YAML::Key << "arrivals" << YAML::Value << n.arrivals.size();
      std::vector<double> sv(n.state.data(), n.state.data() + n.state.size());
      em << YAML::Key << "state" << YAML::Value << YAML::Flow << sv;
      em << YAML::EndMap;
    }
    em << YAML::EndSeq;
    std::ofstream out(opts.tree_dump_path);
    out << em.c_str() << "\n";
  }
  return res;
}

ValidationReport validate(const DbSolution& sol, const State& start,
                          const State& goal, const geometry::Workspace& ws,
                          const geometry::RobotGeometry& robot, double delta,
                          const std::vector<Constraint>& constraints,
                          const Bounds& bounds, const MetricWeights& weights,
                          double dt) {
  ValidationReport rep;
  const RobotType& type = robot.type;
  const int K = sol.K();
  for (int k = 0; k < K; ++k) {
    const State pred = dynamics::step(type, sol.states[k], sol.actions[k], dt);
    rep.max_step_residual =
        std::max(rep.max_step_residual,
                 dynamics::distance(type, pred, sol.states[k + 1], weights));
    if (!dynamics::action_within_bounds(type, sol.actions[k], bounds, 1e-9))
      rep.actions_in_bounds = false;
  }
  rep.worst_space_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : sol.states) {
    rep.worst_space_margin = std::min(
        rep.worst_space_margin,
        geometry::free_space_margin(geometry::place(type, robot.shape, s), ws));
  }
  rep.start_gap = dynamics::distance(type, sol.states.front(), start, weights);
  rep.goal_gap = dynamics::distance(type, sol.states.back(), goal, weights);
  for (const auto& c : constraints) {
    const int k = std::min(c.time, K);
    if (k < 0) continue;
    rep.min_constraint_clearance =
        std::min(rep.min_constraint_clearance,
                 dynamics::distance(type, sol.states[k], c.state, weights));
  }
  rep.cond_steps = rep.max_step_residual <= delta + 1e-12;
  rep.cond_feasible = rep.actions_in_bounds && rep.worst_space_margin > 0.0;
  rep.cond_endpoints =
      rep.start_gap <= delta + 1e-12 && rep.goal_gap <= delta + 1e-12;
  rep.cond_constraints = rep.min_constraint_clearance > delta;
  return rep;
}

}  // namespace kinocbs::dbastar
