#pragma once

// Boustrophedon coverage: pick the sweep direction, then solve one
// rest-to-rest slice per band of width 2 r_bot, alternating travel direction.
//
// Slices are posed in the sweep frame (travel = local x, advance = local y,
// y = 0 on the workspace's lowest support line). Slice k's nominal line is
// y = (2k + 1) r_bot so its covered band is [2k r_bot, 2(k+1) r_bot]; the last
// line is pulled down to extent - r_bot when the extent is not a multiple of
// 2 r_bot. The corridor runs from the nominal line up 2 r_bot, clipped to the
// workspace extent.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sweepopt/collocation.hpp"
#include "sweepopt/errors.hpp"
#include "sweepopt/geometry.hpp"
#include "sweepopt/nlp_solver.hpp"
#include "sweepopt/oracle.hpp"
#include "sweepopt/transcription.hpp"

namespace sweepopt {

struct RobotSpec {
  double coverage_radius = 0.1;
};

struct Scene {
  Polygon workspace;
  std::vector<CircleObstacle> obstacles;
  RobotSpec robot;
  double weight = 0.5;
  int nodes_per_slice = 20;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kMinNodesPerSlice = 4;

/// First violated scene invariant, phrased for an error message.
inline std::optional<std::string> scene_defect(const Scene& scene) {
  if (auto d = polygon_defect(scene.workspace)) return "workspace: " + *d;
  if (!(std::isfinite(scene.weight) && scene.weight >= 0.0 && scene.weight <= 1.0)) return "weight out of range";
  if (scene.nodes_per_slice < kMinNodesPerSlice) {
    return "nodes_per_slice must be at least " + std::to_string(kMinNodesPerSlice);
  }
  const double r = scene.robot.coverage_radius;
  if (!(std::isfinite(r) && r > 0.0)) return "robot radius must be positive";
  const SweepDirection sweep = optimal_sweep_direction(scene.workspace, {}).direction;
  if (!(2.0 * r < diameter(scene.workspace, sweep))) return "robot coverage width exceeds the workspace extent";
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto& o = scene.obstacles[i];
    const std::string name = "obstacle " + std::to_string(i);
    if (!(std::isfinite(o.center.x) && std::isfinite(o.center.y) && std::isfinite(o.radius))) {
      return name + " is not finite";
    }
    if (!(o.radius > 0.0)) return name + " has non-positive radius";
    if (!(inset_distance(scene.workspace, o.center) > o.radius)) return name + " is not strictly inside the workspace";
    for (std::size_t j = 0; j < i; ++j) {
      const auto& p = scene.obstacles[j];
      if (distance(o.center, p.center) < o.radius + p.radius) {
        return "obstacle " + std::to_string(j) + " intersects obstacle " + std::to_string(i);
      }
    }
  }
  return std::nullopt;
}

inline void validate_scene(const Scene& scene) {
  if (auto d = scene_defect(scene)) throw ValidationError(*d);
}

enum class SliceFlag { Nominal, CorridorExpanded };

inline const char* to_string(SliceFlag f) { return f == SliceFlag::Nominal ? "Nominal" : "CorridorExpanded"; }

struct CoveragePlan {
  SweepDirection sweep;
  SweepFrame frame;
  int order = 0;
  int n_turn = 0;
  std::vector<Trajectory> slices;        // global frame
  std::vector<Trajectory> local_slices;  // sweep frame
  std::vector<SliceProblem> problems;    // sweep frame
  std::vector<SliceFlag> flags;
  std::vector<SolveStatus> statuses;
  double total_energy = 0.0;
  double total_time = 0.0;
  double total_cost = 0.0;

  std::size_t size() const { return slices.size(); }
  int expanded_count() const {
    return static_cast<int>(std::count(flags.begin(), flags.end(), SliceFlag::CorridorExpanded));
  }
};

struct PlannerOptions {
  /// A stiffer start than the solver default: with obstacles the first
  /// low-penalty pass otherwise cuts through them and lands far from the
  /// bent warm start.
  SolverOptions solver = [] {
    SolverOptions o;
    o.initial_penalty = 1e3;
    return o;
  }();
  /// Obstacle slices are solved from the warm start retimed by each factor,
  /// keeping the cheapest result; their landscape has many poor local minima
  /// (slowing down to bunch nodes near an obstacle).
  std::vector<double> time_stretches{1.5, 0.7};
  /// Dense samples per LGL order at which obstacle clearance is also imposed.
  int guard_factor = 10;
  /// A slice costing more than this multiple of the straight rest-to-rest
  /// optimum over its chord (a lower bound) is retried from the extra
  /// stretches below.
  double retry_ratio = 1.25;
  std::vector<double> retry_stretches{1.0, 2.0, 0.5, 3.0};
  /// Lateral bumps (fractions of corridor width) tried when a slice fails.
  std::vector<double> restart_bumps{0.25, 0.5, 0.75};
};

/// Layout of the slice lines for a scene and sweep direction.
struct SliceLayout {
  SweepFrame frame;
  double extent = 0.0;
  double radius = 0.0;
  int count = 0;

  static SliceLayout make(const Scene& scene, const SweepDirection& sweep) {
    SliceLayout l;
    l.frame = SweepFrame::for_polygon(scene.workspace, sweep);
    l.extent = diameter(scene.workspace, sweep);
    l.radius = scene.robot.coverage_radius;
    if (!(2.0 * l.radius < l.extent)) {
      throw ValidationError("robot coverage width exceeds the workspace extent along the sweep normal");
    }
    l.count = static_cast<int>(std::ceil(l.extent / (2.0 * l.radius) - 1e-9));
    return l;
  }

  double nominal(int k) const { return std::min((2 * k + 1) * radius, extent - radius); }
};

struct PreparedSlice {
  SliceProblem problem;
  SliceFlag flag = SliceFlag::Nominal;
};

namespace detail {

inline std::pair<double, double> slice_chord(const Scene& scene, const SliceLayout& layout, int k) {
  const auto c = chord(scene.workspace, layout.frame, layout.nominal(k));
  if (!c) throw DegenerateInput("slice line " + std::to_string(k) + " misses the workspace");
  return *c;
}

/// Builds slice k given the local x of its start point.
inline PreparedSlice prepare_slice(const Scene& scene, const SliceLayout& layout, int k, double start_x) {
  if (k < 0 || k >= layout.count) throw ValidationError("slice index out of range");
  const double y = layout.nominal(k);
  const auto [x_lo, x_hi] = slice_chord(scene, layout, k);
  const bool reverse = (k % 2) == 1;
  start_x = std::clamp(start_x, x_lo, x_hi);
  const double end_x = reverse ? x_lo : x_hi;

  const Point2 start_local{start_x, y};
  const Point2 end_local{end_x, y};
  for (const Point2& p : {start_local, end_local}) {
    const Point2 g = layout.frame.to_global(p);
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
      if (distance(g, scene.obstacles[i].center) <= scene.obstacles[i].radius) {
        throw BlockedEndpoint("obstacle " + std::to_string(i) + " contains an endpoint of slice " + std::to_string(k));
      }
    }
  }

  PreparedSlice out;
  SliceProblem& p = out.problem;
  p.start_state << start_x, y, 0.0, 0.0;
  p.end_state << end_x, y, 0.0, 0.0;
  p.x_range = {x_lo, x_hi};
  p.weight = scene.weight;
  p.corridor = {y, std::min(y + 2.0 * layout.radius, layout.extent)};

  // An obstacle spanning the whole corridor leaves no way through: lift the
  // upper bound over it (and over anything the lift brings in).
  for (;;) {
    const auto active = obstacles_in_corridor(scene.obstacles, p.corridor, layout.frame);
    double lift = p.corridor.second;
    for (const auto& o : active) {
      const CircleObstacle local = layout.frame.to_local(o);
      const bool spans = local.center.y - local.radius <= p.corridor.first + kGeomTol &&
                         local.center.y + local.radius >= p.corridor.second - kGeomTol;
      if (spans) lift = std::max(lift, local.center.y + local.radius + 0.1 * layout.radius);
    }
    if (lift == p.corridor.second) {
      p.obstacles.clear();
      for (const auto& o : active) p.obstacles.push_back(layout.frame.to_local(o));
      break;
    }
    if (lift > layout.extent) {
      throw SliceInfeasible("slice " + std::to_string(k) + ": an obstacle blocks the corridor up to the workspace edge");
    }
    p.corridor.second = lift;
    out.flag = SliceFlag::CorridorExpanded;
  }
  return out;
}

inline Trajectory to_global(const Trajectory& local, const SweepFrame& frame) {
  Trajectory g = local;
  for (Eigen::Index j = 0; j < local.states.rows(); ++j) {
    const Point2 pos = frame.to_global({local.states(j, 0), local.states(j, 1)});
    const Point2 vel = frame.rotate_to_global({local.states(j, 2), local.states(j, 3)});
    const Point2 acc = frame.rotate_to_global({local.controls(j, 0), local.controls(j, 1)});
    g.states.row(j) << pos.x, pos.y, vel.x, vel.y;
    g.controls.row(j) << acc.x, acc.y;
  }
  return g;
}

struct SliceSolve {
  Trajectory trajectory;
  SolveStatus status = SolveStatus::MaxIterations;
};

inline bool usable(const SolveReport& r) { return r.constraint_violation <= kExtractTolerance; }

/// Same path, traversed `factor` times slower.
inline Eigen::VectorXd stretch_time(Eigen::VectorXd z, Eigen::Index n1, double factor) {
  z.segment(2 * n1, 2 * n1) /= factor;
  z.segment(4 * n1, 2 * n1) /= factor * factor;
  z(6 * n1) *= factor;
  return z;
}

inline SliceSolve solve_prepared(const SliceProblem& problem, const LglGrid& grid, const PlannerOptions& opts,
                                 int k) {
  const SliceNlp nlp = transcribe(problem, grid);
  const Eigen::VectorXd guess = initial_guess(problem, grid);
  SolveReport report;
  if (problem.obstacles.empty() || opts.time_stretches.empty()) {
    report = solve(nlp, guess, opts.solver);
  } else {
    bool first = true;
    const auto attempt = [&](double factor) {
      SolveReport r = solve(nlp, stretch_time(guess, grid.size(), factor), opts.solver);
      const bool better = usable(r) && (!usable(report) || r.objective < report.objective);
      if (first || better) report = std::move(r);
      first = false;
    };
    for (double factor : opts.time_stretches) attempt(factor);
    const double bound = problem.chord_length() > 0.0
                             ? analytic_rest_to_rest(problem.chord_length(), nlp.weight()).cost_star
                             : 0.0;
    for (double factor : opts.retry_stretches) {
      if (usable(report) && report.objective <= opts.retry_ratio * bound) break;
      attempt(factor);
    }
  }
  if (!usable(report)) {
    // Restart from the guess pushed sideways by a half-sine bump.
    const Eigen::Index n1 = grid.size();
    const double width = problem.corridor.second - problem.corridor.first;
    for (double bump : opts.restart_bumps) {
      Eigen::VectorXd start = guess;
      for (Eigen::Index j = 1; j + 1 < n1; ++j) {
        const double s = 0.5 * (grid.nodes()(j) + 1.0);
        start(n1 + j) = std::clamp(start(n1 + j) + bump * width * std::sin(M_PI * s), problem.corridor.first,
                                   problem.corridor.second);
      }
      report = solve(nlp, start, opts.solver);
      if (usable(report)) break;
    }
  }
  if (!usable(report)) {
    throw SliceInfeasible("slice " + std::to_string(k) + " has no feasible trajectory (violation " +
                          std::to_string(report.constraint_violation) + ", " + to_string(report.status) + ")");
  }
  return {extract_trajectory(problem, grid, report.solution), report.status};
}

inline SliceProblem with_guards(SliceProblem p, const Scene& scene, const PlannerOptions& opts) {
  if (!p.obstacles.empty()) p.guard_samples = opts.guard_factor * scene.nodes_per_slice;
  return p;
}

}  // namespace detail

/// Slice k's problem in the sweep frame. `prev_final` is the previous slice's
/// final state in global coordinates (ignored for k = 0); the new start is
/// that point moved to the next line along the advance normal.
inline SliceProblem next_slice_problem(const Scene& scene, const SweepDirection& sweep, int k,
                                       const State4& prev_final) {
  const SliceLayout layout = SliceLayout::make(scene, sweep);
  double start_x = 0.0;
  if (k == 0) {
    start_x = detail::slice_chord(scene, layout, 0).first;
  } else {
    start_x = layout.frame.to_local(Point2{prev_final(0), prev_final(1)}).x;
  }
  return detail::prepare_slice(scene, layout, k, start_x).problem;
}

inline CoveragePlan plan_coverage(const Scene& scene, const PlannerOptions& opts = {}) {
  validate_scene(scene);
  const LglGrid grid(scene.nodes_per_slice);
  CoveragePlan plan;
  plan.sweep = optimal_sweep_direction(scene.workspace, scene.obstacles).direction;
  const SliceLayout layout = SliceLayout::make(scene, plan.sweep);
  plan.frame = layout.frame;
  plan.order = scene.nodes_per_slice;
  plan.n_turn = layout.count;

  double start_x = detail::slice_chord(scene, layout, 0).first;
  for (int k = 0; k < layout.count; ++k) {
    const PreparedSlice prepared = detail::prepare_slice(scene, layout, k, start_x);
    const SliceProblem problem = detail::with_guards(prepared.problem, scene, opts);
    const detail::SliceSolve solved = detail::solve_prepared(problem, grid, opts, k);
    plan.problems.push_back(problem);
    plan.flags.push_back(prepared.flag);
    plan.statuses.push_back(solved.status);
    plan.local_slices.push_back(solved.trajectory);
    plan.slices.push_back(detail::to_global(solved.trajectory, layout.frame));
    plan.total_energy += solved.trajectory.energy;
    plan.total_time += solved.trajectory.t_f;
    plan.total_cost += solved.trajectory.cost();
    start_x = solved.trajectory.finish().x;
  }
  return plan;
}

}  // namespace sweepopt
