#include "sweepopt/transversality.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sweepopt {
namespace {

Scene square() {
  Scene s;
  s.workspace = Polygon{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  return s;
}

// Solves slice 0 of the square with t_f pinned, returned in global frame.
Trajectory pinned_first_slice(const Scene& s, double t_f) {
  const SweepDirection sweep = optimal_sweep_direction(s.workspace, s.obstacles).direction;
  SliceProblem p = next_slice_problem(s, sweep, 0, State4::Zero());
  p.fixed_final_time = t_f;
  const LglGrid grid(s.nodes_per_slice);
  const SolveReport r = solve(transcribe(p, grid), initial_guess(p, grid));
  EXPECT_EQ(r.status, SolveStatus::Converged);
  return detail::to_global(extract_trajectory(p, grid, r.solution), SweepFrame::for_polygon(s.workspace, sweep));
}

TEST(Transversality, OptimalSlicesAreStationaryInFinalTime) {
  Scene s = square();
  for (double w : {0.25, 0.5, 0.75}) {
    s.weight = w;
    const CoveragePlan plan = plan_coverage(s);
    for (int k : {0, 1, 24, 49}) EXPECT_LE(transversality_check(s, k, plan.slices[k], 0.05), 1e-4) << w << " " << k;
  }
}

TEST(Transversality, FrozenAtHalfOptimumIsDetected) {
  const Scene s = square();
  const Trajectory half = pinned_first_slice(s, 0.5 * std::sqrt(60.0));
  EXPECT_GT(transversality_check(s, 0, half, 0.05), 1e-2);
  EXPECT_GT(transversality_check(s, 0, half, 0.01), 0.0);
}

TEST(Transversality, ResidualShrinksTowardOptimum) {
  const Scene s = square();
  const double t_star = std::sqrt(60.0);
  double prev = INFINITY;
  for (double f : {0.6, 0.8, 0.9}) {
    const double r = transversality_check(s, 0, pinned_first_slice(s, f * t_star), 0.05);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Transversality, RejectsBadEpsilon) {
  const Scene s = square();
  const Trajectory t = pinned_first_slice(s, std::sqrt(60.0));
  EXPECT_THROW(transversality_check(s, 0, t, 0.0), ValidationError);
  EXPECT_THROW(transversality_check(s, 0, t, 0.2), ValidationError);
}

}  // namespace
}  // namespace sweepopt
