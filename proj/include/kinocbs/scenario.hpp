#pragma once

#include <string>

#include "kinocbs/cbs.hpp"
#include "kinocbs/problem.hpp"

namespace kinocbs::scenario {

// Scene file schema:
//   name: swap
//   environment:
//     min: [0, 0]
//     max: [4, 2]
//     obstacles: [{type: box, center: [x, y], size: [lx, ly]}]
//   robots:
//     - type: unicycle1
//       shape: {disk: 0.2}      # or {box: [lx, ly]}
//       start: [...]
//       goal: [...]
// All invariants (free starts/goals, positive pairwise margins, dimensions)
// are checked on load.
ProblemInstance parse_instance(const std::string& path);
ProblemInstance parse_instance_string(const std::string& text,
                                      const std::string& label = "<string>");

void write_instance(const ProblemInstance& instance, const std::string& path);

// Solution files round-trip losslessly; the stored cost is re-derived and
// checked on read.
void write_solution(const TrajectorySet& ts, const std::string& path);
TrajectorySet read_solution(const std::string& path);

// Planner configuration file (all keys optional, defaults apply).
cbs::PlannerConfig parse_config(const std::string& path);

// Deterministic static rendering: workspace, obstacles, footprints at
// sampled timesteps, one polyline per robot.
void render_svg(const ProblemInstance& instance, const TrajectorySet* ts,
                const std::string& path);

}  // namespace kinocbs::scenario
