#pragma once

// Direct LGL transcription of one slice's optimal control problem.
//
// State (x1, x2, x3, x4) = (position x, position y, velocity x, velocity y),
// control (u1, u2), double-integrator dynamics, running cost
// (1 - w)(u1^2 + u2^2) + w, free final time. The decision vector is
//
//   [x1_0..N, x2_0..N, x3_0..N, x4_0..N, u1_0..N, u2_0..N, t_f].
//
// Defects use the time-scaled form D x = (t_f / 2) f(x, u) and the cost the
// scaled quadrature (t_f / 2) sum_j w_j L_j.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sweepopt/collocation.hpp"
#include "sweepopt/geometry.hpp"
#include "sweepopt/nlp_solver.hpp"
#include "sweepopt/oracle.hpp"

namespace sweepopt {

/// Lower bound on the final time; keeps the time map away from t_f = 0.
inline constexpr double kMinFinalTime = 1e-3;

/// Weights are clamped into this range before solving.
inline constexpr double kMinWeight = 0.01;
inline constexpr double kMaxWeight = 0.99;

inline double clamp_weight(double w) { return std::clamp(w, kMinWeight, kMaxWeight); }

using State4 = Eigen::Vector4d;

struct SliceProblem {
  State4 start_state = State4::Zero();
  State4 end_state = State4::Zero();
  std::pair<double, double> corridor{0.0, 0.0};  // bounds on x2
  std::pair<double, double> x_range{0.0, 0.0};   // bounds on x1
  std::vector<CircleObstacle> obstacles;
  double weight = 0.5;
  /// When set, t_f is pinned to this value instead of being free.
  std::optional<double> fixed_final_time;
  /// Extra time-uniform points where the obstacle inequalities are also
  /// imposed on the interpolated path (0 = collocation nodes only).
  int guard_samples = 0;

  double chord_length() const { return (end_state.head<2>() - start_state.head<2>()).norm(); }
};

/// Returns the first violated problem invariant, if any.
inline std::optional<std::string> slice_problem_defect(const SliceProblem& p) {
  if (!(p.corridor.first < p.corridor.second)) return "corridor is empty";
  if (!(p.x_range.first < p.x_range.second)) return "x-range is empty";
  for (const State4* s : {&p.start_state, &p.end_state}) {
    if (!s->allFinite()) return "boundary state is not finite";
    if ((*s)(0) < p.x_range.first - kGeomTol || (*s)(0) > p.x_range.second + kGeomTol) {
      return "boundary state leaves the x-range";
    }
    if ((*s)(1) < p.corridor.first - kGeomTol || (*s)(1) > p.corridor.second + kGeomTol) {
      return "boundary state leaves the corridor";
    }
    for (const auto& o : p.obstacles) {
      if (distance({(*s)(0), (*s)(1)}, o.center) <= o.radius) return "boundary state touches an obstacle";
    }
  }
  if (p.fixed_final_time && !(*p.fixed_final_time >= kMinFinalTime)) return "fixed final time too small";
  if (p.guard_samples < 0) return "negative guard sample count";
  return std::nullopt;
}

/// Time-uniform sample points on [-1, 1], endpoints included.
inline std::vector<double> uniform_taus(int count) {
  std::vector<double> taus(static_cast<std::size_t>(std::max(count, 0)));
  if (count == 1) taus[0] = -1.0;
  for (int k = 0; k < count && count > 1; ++k) taus[static_cast<std::size_t>(k)] = -1.0 + 2.0 * k / (count - 1);
  return taus;
}

/// The NLP of one slice. Immutable; evaluation is thread-safe.
class SliceNlp {
 public:
  SliceNlp(SliceProblem problem, const LglGrid& grid)
      : problem_(std::move(problem)), grid_(grid), nodes_(grid.size()),
        weight_(clamp_weight(problem_.weight)) {
    if (auto defect = slice_problem_defect(problem_)) throw ValidationError("invalid slice problem: " + *defect);
    if (problem_.guard_samples > 0) guard_ = grid_.interpolation_matrix(uniform_taus(problem_.guard_samples));
  }

  const SliceProblem& problem() const { return problem_; }
  const LglGrid& grid() const { return grid_; }
  double weight() const { return weight_; }

  // Layout.
  Eigen::Index nodes() const { return nodes_; }
  Eigen::Index state_offset(int k) const { return k * nodes_; }
  Eigen::Index control_offset(int k) const { return (4 + k) * nodes_; }
  Eigen::Index final_time_index() const { return 6 * nodes_; }

  Eigen::Index num_variables() const { return 6 * nodes_ + 1; }
  Eigen::Index num_defects() const { return 4 * nodes_; }
  Eigen::Index num_equalities() const { return num_defects() + 8; }
  Eigen::Index rows_per_obstacle() const { return nodes_ + guard_.rows(); }
  /// Guard points also carry the corridor bounds, loosened by a small slack:
  /// the bounds on x2 only hold at nodes, and in between the interpolant can
  /// otherwise slip under an obstacle that spans the corridor. Without the
  /// slack these rows duplicate the node bounds whenever the path runs along
  /// a corridor edge, and the multipliers stop converging.
  static constexpr double kCorridorSlack = 0.05;
  Eigen::Index num_corridor_rows() const { return 2 * guard_.rows(); }
  double corridor_slack() const { return kCorridorSlack * (problem_.corridor.second - problem_.corridor.first); }
  Eigen::Index num_inequalities() const {
    return static_cast<Eigen::Index>(problem_.obstacles.size()) * rows_per_obstacle() + num_corridor_rows();
  }

  Eigen::VectorXd lower_bounds() const {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(num_variables(), -std::numeric_limits<double>::infinity());
    lo.segment(state_offset(0), nodes_).setConstant(problem_.x_range.first);
    lo.segment(state_offset(1), nodes_).setConstant(problem_.corridor.first);
    lo(final_time_index()) = problem_.fixed_final_time.value_or(kMinFinalTime);
    return lo;
  }
  Eigen::VectorXd upper_bounds() const {
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(num_variables(), std::numeric_limits<double>::infinity());
    hi.segment(state_offset(0), nodes_).setConstant(problem_.x_range.second);
    hi.segment(state_offset(1), nodes_).setConstant(problem_.corridor.second);
    if (problem_.fixed_final_time) hi(final_time_index()) = *problem_.fixed_final_time;
    return hi;
  }

  double objective(const Eigen::VectorXd& z) const {
    const auto u1 = z.segment(control_offset(0), nodes_);
    const auto u2 = z.segment(control_offset(1), nodes_);
    const double t_f = z(final_time_index());
    const Eigen::VectorXd running =
        ((1.0 - weight_) * (u1.array().square() + u2.array().square()) + weight_).matrix();
    return 0.5 * t_f * grid_.weights().dot(running);
  }

  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_variables());
    const double t_f = z(final_time_index());
    const Eigen::ArrayXd& w = grid_.weights().array();
    for (int k = 0; k < 2; ++k) {
      const auto u = z.segment(control_offset(k), nodes_).array();
      grad.segment(control_offset(k), nodes_) = (t_f * (1.0 - weight_) * w * u).matrix();
    }
    const auto u1 = z.segment(control_offset(0), nodes_).array();
    const auto u2 = z.segment(control_offset(1), nodes_).array();
    grad(final_time_index()) = 0.5 * (w * ((1.0 - weight_) * (u1.square() + u2.square()) + weight_)).sum();
    return grad;
  }

  /// Defects (4 blocks of N+1 rows), then the 8 boundary pins. Defect row j
  /// is weighted by the quadrature weight w_j: D's corner rows reach N(N+1)/4
  /// and w_j brings every row to O(1), which keeps rounding in rho * J^T c
  /// well below the stationarity tolerance at large penalties.
  Eigen::VectorXd equalities(const Eigen::VectorXd& z) const {
    Eigen::VectorXd c(num_equalities());
    const double half = 0.5 * z(final_time_index());
    const Eigen::MatrixXd& d = grid_.diff_matrix();
    const Eigen::VectorXd& w = grid_.weights();
    for (int k = 0; k < 4; ++k) {
      // x1' = x3, x2' = x4, x3' = u1, x4' = u2.
      const Eigen::Index rate = k < 2 ? state_offset(k + 2) : control_offset(k - 2);
      c.segment(k * nodes_, nodes_) =
          w.cwiseProduct(d * z.segment(state_offset(k), nodes_) - half * z.segment(rate, nodes_));
    }
    for (int k = 0; k < 4; ++k) {
      c(num_defects() + k) = z(state_offset(k)) - problem_.start_state(k);
      c(num_defects() + 4 + k) = z(state_offset(k) + nodes_ - 1) - problem_.end_state(k);
    }
    return c;
  }

  Eigen::VectorXd equality_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_variables());
    const double half = 0.5 * z(final_time_index());
    const Eigen::MatrixXd& d = grid_.diff_matrix();
    double dt = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Eigen::VectorXd vk = grid_.weights().cwiseProduct(v.segment(k * nodes_, nodes_));
      const Eigen::Index rate = k < 2 ? state_offset(k + 2) : control_offset(k - 2);
      out.segment(state_offset(k), nodes_) += d.transpose() * vk;
      out.segment(rate, nodes_) -= half * vk;
      dt -= 0.5 * z.segment(rate, nodes_).dot(vk);
    }
    out(final_time_index()) = dt;
    for (int k = 0; k < 4; ++k) {
      out(state_offset(k)) += v(num_defects() + k);
      out(state_offset(k) + nodes_ - 1) += v(num_defects() + 4 + k);
    }
    return out;
  }

  /// Per obstacle: clearance (d^2 - r^2) / (2r) at every node, then at guard
  /// points. The scaling makes a row read as signed distance near the circle,
  /// which keeps it on the same footing as the defects.
  Eigen::VectorXd inequalities(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g(num_inequalities());
    const auto x = z.segment(state_offset(0), nodes_);
    const auto y = z.segment(state_offset(1), nodes_);
    Eigen::VectorXd gx, gy;
    if (guard_.rows() > 0) {
      gx = guard_ * x;
      gy = guard_ * y;
    }
    Eigen::Index row = 0;
    for (const auto& o : problem_.obstacles) {
      const double r2 = o.radius * o.radius;
      const double scale = clearance_scale(o);
      g.segment(row, nodes_) =
          scale * ((x.array() - o.center.x).square() + (y.array() - o.center.y).square() - r2).matrix();
      row += nodes_;
      if (guard_.rows() > 0) {
        g.segment(row, guard_.rows()) =
            scale * ((gx.array() - o.center.x).square() + (gy.array() - o.center.y).square() - r2).matrix();
        row += guard_.rows();
      }
    }
    if (guard_.rows() > 0) {
      const double slack = corridor_slack();
      g.segment(row, guard_.rows()) = gy.array() - (problem_.corridor.first - slack);
      g.segment(row + guard_.rows(), guard_.rows()) = (problem_.corridor.second + slack) - gy.array();
    }
    return g;
  }

  Eigen::VectorXd inequality_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_variables());
    if (num_inequalities() == 0) return out;
    const auto x = z.segment(state_offset(0), nodes_);
    const auto y = z.segment(state_offset(1), nodes_);
    Eigen::VectorXd gx, gy;
    Eigen::VectorXd guard_wx, guard_wy;
    if (guard_.rows() > 0) {
      gx = guard_ * x;
      gy = guard_ * y;
      guard_wx = Eigen::VectorXd::Zero(guard_.rows());
      guard_wy = Eigen::VectorXd::Zero(guard_.rows());
    }
    auto ox = out.segment(state_offset(0), nodes_);
    auto oy = out.segment(state_offset(1), nodes_);
    Eigen::Index row = 0;
    for (const auto& o : problem_.obstacles) {
      const double twice = 2.0 * clearance_scale(o);
      const auto vn = v.segment(row, nodes_).array();
      ox.array() += twice * (x.array() - o.center.x) * vn;
      oy.array() += twice * (y.array() - o.center.y) * vn;
      row += nodes_;
      if (guard_.rows() > 0) {
        const auto vg = v.segment(row, guard_.rows()).array();
        guard_wx.array() += twice * (gx.array() - o.center.x) * vg;
        guard_wy.array() += twice * (gy.array() - o.center.y) * vg;
        row += guard_.rows();
      }
    }
    if (guard_.rows() > 0) {
      guard_wy += v.segment(row, guard_.rows()) - v.segment(row + guard_.rows(), guard_.rows());
      ox += guard_.transpose() * guard_wx;
      oy += guard_.transpose() * guard_wy;
    }
    return out;
  }

  /// Hessian of f - lambda^T c - mu^T g. Only three kinds of terms survive:
  /// the control/t_f block of the cost, the bilinear t_f * rate terms of the
  /// defects and the quadratic clearances.
  Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& z, const Eigen::VectorXd& lambda,
                                     const Eigen::VectorXd& mu) const {
    const Eigen::Index n = num_variables();
    const Eigen::Index tf = final_time_index();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd& w = grid_.weights();
    for (int k = 0; k < 2; ++k) {
      const Eigen::Index off = control_offset(k);
      for (Eigen::Index j = 0; j < nodes_; ++j) {
        h(off + j, off + j) = z(tf) * (1.0 - weight_) * w(j);
        h(off + j, tf) = (1.0 - weight_) * w(j) * z(off + j);
      }
    }
    if (lambda.size() > 0) {
      for (int k = 0; k < 4; ++k) {
        const Eigen::Index rate = k < 2 ? state_offset(k + 2) : control_offset(k - 2);
        h.block(rate, tf, nodes_, 1) += 0.5 * w.cwiseProduct(lambda.segment(k * nodes_, nodes_));
      }
    }
    if (mu.size() > 0) {
      Eigen::VectorXd node_mu = Eigen::VectorXd::Zero(nodes_);
      Eigen::VectorXd guard_mu = Eigen::VectorXd::Zero(guard_.rows());
      Eigen::Index row = 0;
      for (const auto& o : problem_.obstacles) {
        const double twice = 2.0 * clearance_scale(o);
        node_mu += twice * mu.segment(row, nodes_);
        row += nodes_;
        if (guard_.rows() > 0) {
          guard_mu += twice * mu.segment(row, guard_.rows());
          row += guard_.rows();
        }
      }
      Eigen::MatrixXd block = (-node_mu).asDiagonal();
      if (guard_.rows() > 0) block.noalias() -= guard_.transpose() * guard_mu.asDiagonal() * guard_;
      h.block(state_offset(0), state_offset(0), nodes_, nodes_) += block;
      h.block(state_offset(1), state_offset(1), nodes_, nodes_) += block;
    }
    // Mirror the t_f column into the t_f row.
    h.row(tf).head(tf) = h.col(tf).head(tf).transpose();
    return h;
  }

  Eigen::MatrixXd equality_jacobian(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(num_equalities(), num_variables());
    const double half = 0.5 * z(final_time_index());
    for (int k = 0; k < 4; ++k) {
      const Eigen::Index rate = k < 2 ? state_offset(k + 2) : control_offset(k - 2);
      const Eigen::VectorXd& w = grid_.weights();
      jac.block(k * nodes_, state_offset(k), nodes_, nodes_) = w.asDiagonal() * grid_.diff_matrix();
      jac.block(k * nodes_, rate, nodes_, nodes_).diagonal() = -half * w;
      jac.block(k * nodes_, final_time_index(), nodes_, 1) = -0.5 * w.cwiseProduct(z.segment(rate, nodes_));
    }
    for (int k = 0; k < 4; ++k) {
      jac(num_defects() + k, state_offset(k)) = 1.0;
      jac(num_defects() + 4 + k, state_offset(k) + nodes_ - 1) = 1.0;
    }
    return jac;
  }

  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(num_inequalities(), num_variables());
    const auto x = z.segment(state_offset(0), nodes_);
    const auto y = z.segment(state_offset(1), nodes_);
    Eigen::VectorXd gx, gy;
    if (guard_.rows() > 0) {
      gx = guard_ * x;
      gy = guard_ * y;
    }
    Eigen::Index row = 0;
    for (const auto& o : problem_.obstacles) {
      const double twice = 2.0 * clearance_scale(o);
      for (Eigen::Index j = 0; j < nodes_; ++j, ++row) {
        jac(row, state_offset(0) + j) = twice * (x(j) - o.center.x);
        jac(row, state_offset(1) + j) = twice * (y(j) - o.center.y);
      }
      for (Eigen::Index k = 0; k < guard_.rows(); ++k, ++row) {
        jac.block(row, state_offset(0), 1, nodes_) = twice * (gx(k) - o.center.x) * guard_.row(k);
        jac.block(row, state_offset(1), 1, nodes_) = twice * (gy(k) - o.center.y) * guard_.row(k);
      }
    }
    if (guard_.rows() > 0) {
      jac.block(row, state_offset(1), guard_.rows(), nodes_) = guard_;
      jac.block(row + guard_.rows(), state_offset(1), guard_.rows(), nodes_) = -guard_;
    }
    return jac;
  }

 private:
  static double clearance_scale(const CircleObstacle& o) { return 0.5 / o.radius; }

  SliceProblem problem_;
  LglGrid grid_;
  Eigen::Index nodes_;
  double weight_;
  Eigen::MatrixXd guard_;
};

static_assert(SmoothNlp<SliceNlp> && HasLagrangianHessian<SliceNlp>);

inline SliceNlp transcribe(SliceProblem problem, const LglGrid& grid) { return SliceNlp(std::move(problem), grid); }

/// Warm start: the straight chord at constant velocity with u = 0, timed with
/// the obstacle-free optimal t_f. Where the chord cuts an obstacle it is lifted
/// over it (or dropped under it) on the side the corridor leaves room for: a
/// plateau across the obstacle with cosine ramps wide enough for the nodes to
/// resolve. The bend's spectral derivatives are added to velocities and controls.
inline Eigen::VectorXd initial_guess(const SliceProblem& problem, const LglGrid& grid) {
  const Eigen::Index n1 = grid.size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(6 * n1 + 1);
  const double length = problem.chord_length();
  double t_f = kMinFinalTime;
  if (problem.fixed_final_time) {
    t_f = *problem.fixed_final_time;
  } else if (length > 0.0) {
    t_f = std::max(kMinFinalTime, analytic_rest_to_rest(length, clamp_weight(problem.weight)).t_f_star);
  }
  const Eigen::Vector2d p0 = problem.start_state.head<2>();
  const Eigen::Vector2d p1 = problem.end_state.head<2>();
  const Eigen::Vector2d velocity = (p1 - p0) / t_f;
  Eigen::VectorXd x(n1), y(n1);
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double s = 0.5 * (grid.nodes()(j) + 1.0);
    x(j) = p0(0) + s * (p1(0) - p0(0));
    y(j) = p0(1) + s * (p1(1) - p0(1));
  }
  Eigen::VectorXd bend = Eigen::VectorXd::Zero(n1);
  const auto [y_lo, y_hi] = problem.corridor;
  const double span = p1(0) - p0(0);
  for (const auto& o : problem.obstacles) {
    const double at = span != 0.0 ? std::clamp((o.center.x - p0(0)) / span, 0.0, 1.0) : 0.0;
    const double chord_y = p0(1) + at * (p1(1) - p0(1));
    const double room_above = y_hi - (o.center.y + o.radius);
    const double room_below = (o.center.y - o.radius) - y_lo;
    // Keep to the side the chord already passes on unless it has no room.
    bool above = chord_y >= o.center.y;
    if (above && room_above < 0.0 && room_below > room_above) above = false;
    if (!above && room_below < 0.0 && room_above > room_below) above = true;
    const double margin = std::clamp(0.5 * std::max(above ? room_above : room_below, 0.0), 0.0, 0.5 * o.radius);
    const double reach = o.radius + margin;
    if (std::abs(chord_y - o.center.y) >= reach) continue;
    const double target = above ? std::min(o.center.y + reach, y_hi) : std::max(o.center.y - reach, y_lo);
    const double lift = target - chord_y;
    const double ramp = std::max(2.0 * reach, 2.0 * std::abs(span) / grid.order());
    for (Eigen::Index j = 1; j + 1 < n1; ++j) {
      const double dx = std::abs(x(j) - o.center.x);
      if (dx >= reach + ramp) continue;
      const double f = dx <= reach ? 1.0 : 0.5 * (1.0 + std::cos(M_PI * (dx - reach) / ramp));
      if (std::abs(f * lift) > std::abs(bend(j))) bend(j) = f * lift;
    }
  }
  z.segment(0, n1) = x;
  z.segment(n1, n1) = y + bend;
  z.segment(2 * n1, n1).setConstant(velocity(0));
  z.segment(3 * n1, n1).setConstant(velocity(1));
  if (!bend.isZero(0.0)) {
    const Eigen::VectorXd bend_rate = differentiate(grid, bend, t_f);
    z.segment(3 * n1, n1) += bend_rate;
    z.segment(5 * n1, n1) = differentiate(grid, bend_rate, t_f);
  }
  z(6 * n1) = t_f;
  return z;
}

struct Trajectory {
  double t_f = 0.0;
  double weight = 0.5;
  Eigen::VectorXd times;    // t_0 = 0 .. t_N = t_f at the LGL nodes
  Eigen::MatrixXd states;   // (N+1) x 4
  Eigen::MatrixXd controls; // (N+1) x 2
  double energy = 0.0;

  int order() const { return static_cast<int>(times.size()) - 1; }
  double elapsed() const { return t_f; }
  double cost() const { return (1.0 - weight) * energy + weight * t_f; }
  Point2 start() const { return {states(0, 0), states(0, 1)}; }
  Point2 finish() const { return {states(states.rows() - 1, 0), states(states.rows() - 1, 1)}; }
};

/// Packs a trajectory back into the decision-vector layout.
inline Eigen::VectorXd pack(const Trajectory& traj) {
  const Eigen::Index n1 = traj.times.size();
  Eigen::VectorXd z(6 * n1 + 1);
  for (int k = 0; k < 4; ++k) z.segment(k * n1, n1) = traj.states.col(k);
  for (int k = 0; k < 2; ++k) z.segment((4 + k) * n1, n1) = traj.controls.col(k);
  z(6 * n1) = traj.t_f;
  return z;
}

/// Violation threshold used when accepting a solved slice.
inline constexpr double kExtractTolerance = 1e-6;

inline Trajectory unpack(const LglGrid& grid, const Eigen::VectorXd& z, double weight) {
  const Eigen::Index n1 = grid.size();
  if (z.size() != 6 * n1 + 1) throw DimensionMismatch("decision vector does not match the grid");
  Trajectory traj;
  traj.weight = weight;
  traj.t_f = z(6 * n1);
  const TimeMap map{traj.t_f};
  traj.times = grid.nodes().unaryExpr([&](double tau) { return map.time(tau); });
  traj.times(0) = 0.0;
  traj.times(n1 - 1) = traj.t_f;
  traj.states.resize(n1, 4);
  traj.controls.resize(n1, 2);
  for (int k = 0; k < 4; ++k) traj.states.col(k) = z.segment(k * n1, n1);
  for (int k = 0; k < 2; ++k) traj.controls.col(k) = z.segment((4 + k) * n1, n1);
  const Eigen::VectorXd effort = traj.controls.rowwise().squaredNorm();
  traj.energy = quadrature(grid, effort, traj.t_f);
  return traj;
}

inline Trajectory extract_trajectory(const SliceProblem& problem, const LglGrid& grid, const Eigen::VectorXd& solution) {
  const SliceNlp nlp(problem, grid);
  detail::check_dimension(nlp, solution);
  const double violation = constraint_violation(nlp, solution);
  if (!(violation <= kExtractTolerance)) {
    throw InfeasibleSolution("slice solution violates its constraints by " + std::to_string(violation));
  }
  return unpack(grid, solution, nlp.weight());
}

}  // namespace sweepopt
