#pragma once

// Free-final-time check: a solved slice's t_f should be a local minimizer of
// the slice cost, so re-solving with t_f frozen slightly off must not do
// better.

#include <Eigen/Dense>

#include <algorithm>
#include <string>

#include "sweepopt/errors.hpp"
#include "sweepopt/geometry.hpp"
#include "sweepopt/planner.hpp"
#include "sweepopt/transcription.hpp"

namespace sweepopt {

namespace detail {

inline Trajectory to_local(const Trajectory& global, const SweepFrame& frame) {
  Trajectory l = global;
  const Point2 tx = frame.direction.travel(), nx = frame.direction.normal();
  for (Eigen::Index j = 0; j < global.states.rows(); ++j) {
    const Point2 pos = frame.to_local(Point2{global.states(j, 0), global.states(j, 1)});
    const Point2 vel{global.states(j, 2), global.states(j, 3)};
    const Point2 acc{global.controls(j, 0), global.controls(j, 1)};
    l.states.row(j) << pos.x, pos.y, dot(vel, tx), dot(vel, nx);
    l.controls.row(j) << dot(acc, tx), dot(acc, nx);
  }
  return l;
}

}  // namespace detail

/// Re-solves slice k with t_f frozen at t_f (1 -/+ epsilon), warm-started from
/// `solved` (global frame), and returns max(0, C - min(C, C-, C+)) / C.
inline double transversality_check(const Scene& scene, int slice_index, const Trajectory& solved, double epsilon,
                                   const PlannerOptions& opts = {}) {
  if (!(epsilon > 0.0 && epsilon <= 0.1)) throw ValidationError("epsilon must lie in (0, 0.1]");
  validate_scene(scene);
  const SweepDirection sweep = optimal_sweep_direction(scene.workspace, scene.obstacles).direction;
  const SliceLayout layout = SliceLayout::make(scene, sweep);
  const Trajectory local = detail::to_local(solved, layout.frame);
  SliceProblem problem =
      detail::with_guards(detail::prepare_slice(scene, layout, slice_index, local.start().x).problem, scene, opts);
  if (problem.chord_length() == 0.0) return 0.0;

  const LglGrid grid(local.order());
  const double cost = local.cost();
  if (!(cost > 0.0)) return 0.0;
  double best = cost;
  for (double factor : {1.0 - epsilon, 1.0 + epsilon}) {
    problem.fixed_final_time = local.t_f * factor;
    const SliceNlp nlp = transcribe(problem, grid);
    const SolveReport r = solve(nlp, detail::stretch_time(pack(local), grid.size(), factor), opts.solver);
    if (!detail::usable(r)) {
      throw InfeasibleSolution("slice " + std::to_string(slice_index) + " has no feasible solution at t_f = " +
                               std::to_string(*problem.fixed_final_time));
    }
    best = std::min(best, r.objective);
  }
  return std::max(0.0, cost - best) / cost;
}

}  // namespace sweepopt
