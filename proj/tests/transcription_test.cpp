#include "sweepopt/transcription.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace sweepopt {
namespace {

SliceProblem straight_slice(double weight = 0.5) {
  SliceProblem p;
  p.start_state << 0.0, 0.1, 0.0, 0.0;
  p.end_state << 10.0, 0.1, 0.0, 0.0;
  p.corridor = {0.1, 0.3};
  p.x_range = {0.0, 10.0};
  p.weight = weight;
  return p;
}

SliceProblem blocked_slice(int guards) {
  SliceProblem p = straight_slice();
  p.obstacles.push_back({{5.0, 0.12}, 0.05});
  p.obstacles.push_back({{2.5, 0.28}, 0.04});
  p.guard_samples = guards;
  return p;
}

// Random point inside the box with moderate values elsewhere.
Eigen::VectorXd random_point(const SliceNlp& nlp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> free(-2.0, 2.0);
  const Eigen::VectorXd lo = nlp.lower_bounds();
  const Eigen::VectorXd hi = nlp.upper_bounds();
  Eigen::VectorXd z(nlp.num_variables());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::isfinite(lo(i)) && std::isfinite(hi(i))) {
      z(i) = lo(i) + unit(rng) * (hi(i) - lo(i));
    } else {
      z(i) = free(rng);
    }
  }
  z(nlp.final_time_index()) = 1.0 + 9.0 * unit(rng);
  return z;
}

template <class F>
Eigen::MatrixXd central_jacobian(F f, const Eigen::VectorXd& z, double h) {
  const Eigen::VectorXd f0 = f(z);
  Eigen::MatrixXd jac(f0.size(), z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Eigen::VectorXd zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    jac.col(i) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return jac;
}

SolveReport solve_slice(const SliceProblem& p, const LglGrid& grid) {
  const SliceNlp nlp = transcribe(p, grid);
  return solve(nlp, initial_guess(p, grid));
}

TEST(Transcribe, CountsForOrderTwo) {
  const SliceNlp nlp = transcribe(straight_slice(), lgl_grid(2));
  EXPECT_EQ(nlp.num_variables(), 19);
  EXPECT_EQ(nlp.num_defects(), 12);
  EXPECT_EQ(nlp.num_equalities(), 20);
  EXPECT_EQ(nlp.num_inequalities(), 0);
}

TEST(Transcribe, OneObstacleAddsOneRowPerNode) {
  SliceProblem p = straight_slice();
  p.obstacles.push_back({{5.0, 0.25}, 0.04});
  const SliceNlp nlp = transcribe(p, lgl_grid(10));
  EXPECT_EQ(nlp.num_inequalities(), 11);
  p.guard_samples = 30;
  // 11 node rows + 30 guard rows for the obstacle, then 2 x 30 corridor rows.
  EXPECT_EQ(transcribe(p, lgl_grid(10)).num_inequalities(), 101);
}

TEST(Transcribe, ObjectiveAtZeroControlIsWeightTimesDuration) {
  for (double w : {0.1, 0.5, 0.8}) {
    const SliceNlp nlp = transcribe(straight_slice(w), lgl_grid(7));
    Eigen::VectorXd z = Eigen::VectorXd::Constant(nlp.num_variables(), 0.3);
    z.segment(nlp.control_offset(0), 2 * nlp.nodes()).setZero();
    z(nlp.final_time_index()) = 6.5;
    EXPECT_NEAR(nlp.objective(z), w * 6.5, 1e-13);
  }
}

TEST(Transcribe, BoundsFollowCorridorAndRange) {
  const SliceNlp nlp = transcribe(straight_slice(), lgl_grid(4));
  const Eigen::VectorXd lo = nlp.lower_bounds();
  const Eigen::VectorXd hi = nlp.upper_bounds();
  EXPECT_EQ(lo(nlp.state_offset(0)), 0.0);
  EXPECT_EQ(hi(nlp.state_offset(0) + 4), 10.0);
  EXPECT_EQ(lo(nlp.state_offset(1) + 2), 0.1);
  EXPECT_EQ(hi(nlp.state_offset(1) + 2), 0.3);
  EXPECT_EQ(lo(nlp.final_time_index()), kMinFinalTime);
  EXPECT_TRUE(std::isinf(hi(nlp.final_time_index())));
  EXPECT_TRUE(std::isinf(lo(nlp.control_offset(1))));
}

TEST(Transcribe, RejectsInvalidProblems) {
  SliceProblem p = straight_slice();
  p.corridor = {0.3, 0.1};
  EXPECT_THROW(transcribe(p, lgl_grid(4)), ValidationError);
  p = straight_slice();
  p.obstacles.push_back({{0.0, 0.1}, 0.05});
  EXPECT_THROW(transcribe(p, lgl_grid(4)), ValidationError);
}

TEST(Transcribe, ObjectiveGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  const SliceNlp nlp = transcribe(blocked_slice(0), lgl_grid(8));
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd z = random_point(nlp, rng);
    const Eigen::VectorXd grad = nlp.objective_gradient(z);
    const Eigen::MatrixXd fd =
        central_jacobian([&](const Eigen::VectorXd& p) { return Eigen::VectorXd::Constant(1, nlp.objective(p)); }, z, 1e-6);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      EXPECT_NEAR(grad(i), fd(0, i), 1e-5 * std::max(1.0, std::abs(grad(i)))) << "i=" << i;
    }
  }
}

TEST(Transcribe, DefectFinalTimeColumnMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  const SliceNlp nlp = transcribe(straight_slice(), lgl_grid(9));
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd z = random_point(nlp, rng);
    const Eigen::Index tf = nlp.final_time_index();
    const Eigen::MatrixXd jac = nlp.equality_jacobian(z);
    Eigen::VectorXd zp = z, zm = z;
    zp(tf) += 1e-6;
    zm(tf) -= 1e-6;
    const Eigen::VectorXd fd = (nlp.equalities(zp) - nlp.equalities(zm)) / 2e-6;
    EXPECT_LT((jac.col(tf) - fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Transcribe, JacobiansAgreeWithProductsAndDifferences) {
  std::mt19937_64 rng(29);
  const SliceNlp nlp = transcribe(blocked_slice(25), lgl_grid(6));
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd z = random_point(nlp, rng);
    const Eigen::MatrixXd je = nlp.equality_jacobian(z);
    const Eigen::MatrixXd ji = nlp.inequality_jacobian(z);
    const Eigen::MatrixXd fd_e = central_jacobian([&](const Eigen::VectorXd& p) { return nlp.equalities(p); }, z, 1e-6);
    const Eigen::MatrixXd fd_i = central_jacobian([&](const Eigen::VectorXd& p) { return nlp.inequalities(p); }, z, 1e-6);
    EXPECT_LT((je - fd_e).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((ji - fd_i).cwiseAbs().maxCoeff(), 1e-5);
    const Eigen::VectorXd ve = Eigen::VectorXd::Random(nlp.num_equalities());
    const Eigen::VectorXd vi = Eigen::VectorXd::Random(nlp.num_inequalities());
    EXPECT_LT((nlp.equality_vjp(z, ve) - je.transpose() * ve).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((nlp.inequality_vjp(z, vi) - ji.transpose() * vi).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Transcribe, LagrangianHessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  const SliceNlp nlp = transcribe(blocked_slice(15), lgl_grid(5));
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd z = random_point(nlp, rng);
    const Eigen::VectorXd lambda = Eigen::VectorXd::Random(nlp.num_equalities());
    const Eigen::VectorXd mu = Eigen::VectorXd::Random(nlp.num_inequalities()).cwiseAbs();
    auto grad_l = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      return nlp.objective_gradient(p) - nlp.equality_vjp(p, lambda) - nlp.inequality_vjp(p, mu);
    };
    const Eigen::MatrixXd h = nlp.lagrangian_hessian(z, lambda, mu);
    const Eigen::MatrixXd fd = central_jacobian(grad_l, z, 1e-5);
    EXPECT_LT((h - fd).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InitialGuess, StraightLineExamples) {
  const LglGrid grid(6);
  SliceProblem p = straight_slice(0.5);
  p.start_state << 0, 0, 0, 0;
  p.end_state << 10, 0, 0, 0;
  p.corridor = {0.0, 0.2};
  const Eigen::VectorXd z = initial_guess(p, grid);
  const double t_f = z(6 * 7);
  EXPECT_NEAR(t_f, std::sqrt(60.0), 1e-12);
  const TimeMap map{t_f};
  for (int j = 0; j < 7; ++j) {
    // Positions linear in node time, constant velocity, zero control.
    EXPECT_NEAR(z(j), 10.0 * map.time(grid.nodes()(j)) / t_f, 1e-12);
    EXPECT_EQ(z(7 + j), 0.0);
    EXPECT_NEAR(z(14 + j), 10.0 / t_f, 1e-15);
    EXPECT_EQ(z(28 + j), 0.0);
    EXPECT_EQ(z(35 + j), 0.0);
  }
  p.weight = 0.9;
  EXPECT_NEAR(initial_guess(p, grid)(42), std::sqrt(20.0), 1e-12);
  p.end_state = p.start_state;
  const Eigen::VectorXd rest = initial_guess(p, grid);
  EXPECT_EQ(rest(42), kMinFinalTime);
  EXPECT_TRUE(rest.segment(14, 28).isZero(0.0));
}

TEST(InitialGuess, BendsAroundObstacleOnTheChord) {
  const LglGrid grid(20);
  SliceProblem p = straight_slice();
  p.obstacles.push_back({{5.0, 0.1}, 0.05});
  const Eigen::VectorXd z = initial_guess(p, grid);
  for (int j = 0; j <= 20; ++j) {
    const Point2 q{z(j), z(21 + j)};
    EXPECT_GE(distance(q, p.obstacles[0].center), 0.05);
    EXPECT_GE(q.y, 0.1 - 1e-15);
    EXPECT_LE(q.y, 0.3 + 1e-15);
  }
}

TEST(ExtractTrajectory, RestSolution) {
  const LglGrid grid(4);
  SliceProblem p = straight_slice(0.3);
  p.end_state = p.start_state;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(31);
  z.segment(0, 5).setConstant(0.0);
  z.segment(5, 5).setConstant(0.1);
  z(30) = 2.0;
  const Trajectory traj = extract_trajectory(p, grid, z);
  EXPECT_EQ(traj.energy, 0.0);
  EXPECT_NEAR(traj.cost(), 0.3 * 2.0, 1e-15);
  EXPECT_EQ(traj.times(0), 0.0);
  EXPECT_EQ(traj.times(4), 2.0);
}

TEST(ExtractTrajectory, ObstacleViolationThrows) {
  const LglGrid grid(4);
  SliceProblem p = straight_slice();
  p.end_state = p.start_state;
  p.obstacles.push_back({{0.0, 0.2}, 0.05});
  Eigen::VectorXd z = Eigen::VectorXd::Zero(31);
  z.segment(5, 5).setConstant(0.1);
  z(30) = 2.0;
  EXPECT_NO_THROW(extract_trajectory(p, grid, z));
  // Node 2 moves to where r^2 - d^2 = 1e-3.
  z(5 + 2) = 0.2 - std::sqrt(0.05 * 0.05 - 1e-3);
  EXPECT_THROW(extract_trajectory(p, grid, z), InfeasibleSolution);
}

TEST(ExtractTrajectory, SolvedObstacleFreeSlice) {
  const LglGrid grid(20);
  const SliceProblem p = straight_slice(0.5);
  const SolveReport r = solve_slice(p, grid);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  const Trajectory traj = extract_trajectory(p, grid, r.solution);
  EXPECT_NEAR(traj.energy, 2.582, 1e-3);
  EXPECT_NEAR(traj.t_f, 7.746, 1e-3);
  EXPECT_NEAR(traj.finish().x, 10.0, 1e-8);
  // Round trip is exact.
  EXPECT_TRUE(pack(traj) == r.solution);
}

TEST(ExtractTrajectory, InterpolantStaysNearCorridor) {
  const LglGrid grid(20);
  for (const SliceProblem& p : {straight_slice(0.3), blocked_slice(200)}) {
    const SolveReport r = solve_slice(p, grid);
    ASSERT_EQ(r.status, SolveStatus::Converged);
    const Trajectory traj = extract_trajectory(p, grid, r.solution);
    const Eigen::MatrixXd dense = grid.interpolation_matrix(uniform_taus(200)) * traj.states;
    const double width = p.corridor.second - p.corridor.first;
    EXPECT_GE(dense.col(1).minCoeff(), p.corridor.first - 0.1 * width);
    EXPECT_LE(dense.col(1).maxCoeff(), p.corridor.second + 0.1 * width);
    for (const auto& o : p.obstacles) {
      for (Eigen::Index k = 0; k < dense.rows(); ++k) {
        const double d = distance({dense(k, 0), dense(k, 1)}, o.center);
        EXPECT_GE(d * d - o.radius * o.radius, -1e-6);
      }
    }
  }
}

TEST(Solve, ObstacleFreeObjectiveNeverBeatsTheOptimum) {
  const LglGrid grid(20);
  for (double w : {0.2, 0.5, 0.8}) {
    const SolveReport r = solve_slice(straight_slice(w), grid);
    ASSERT_EQ(r.status, SolveStatus::Converged);
    const double best = analytic_rest_to_rest(10.0, w).cost_star;
    EXPECT_LE(std::abs(r.objective - best), 1e-3 * best);
    EXPECT_LE(constraint_violation(transcribe(straight_slice(w), grid), r.solution), SolverOptions{}.feasibility_tol);
    EXPECT_LE(r.line_search.worst_armijo_increase, 0.0);
  }
}

TEST(Solve, IsDeterministicOnSlices) {
  const LglGrid grid(12);
  const SliceProblem p = blocked_slice(120);
  const SolveReport a = solve_slice(p, grid);
  const SolveReport b = solve_slice(p, grid);
  EXPECT_TRUE(a.solution == b.solution);
  EXPECT_EQ(a.kkt_residual, b.kkt_residual);
  EXPECT_EQ(a.inner_iterations, b.inner_iterations);
}

}  // namespace
}  // namespace sweepopt
