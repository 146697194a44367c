#pragma once

// Plan-level measures: energy, time, path length, rasterized coverage, and the
// path ratio between plans with and without obstacles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sweepopt/collocation.hpp"
#include "sweepopt/errors.hpp"
#include "sweepopt/geometry.hpp"
#include "sweepopt/planner.hpp"
#include "sweepopt/transcription.hpp"

namespace sweepopt {

/// Dense samples per LGL order used for path length and coverage.
inline constexpr int kDenseFactor = 10;

/// States at 10N time-uniform samples, endpoints included; (10N) x 4.
inline Eigen::MatrixXd dense_states(const Trajectory& traj, const LglGrid& grid) {
  return grid.interpolation_matrix(uniform_taus(kDenseFactor * traj.order())) * traj.states;
}

inline Eigen::MatrixXd dense_states(const Trajectory& traj) { return dense_states(traj, LglGrid(traj.order())); }

/// Trapezoidal integral of the interpolated speed over uniform time samples.
inline double path_length(const Trajectory& traj, const LglGrid& grid) {
  if (traj.t_f <= 0.0) return 0.0;
  const Eigen::MatrixXd dense = dense_states(traj, grid);
  const Eigen::VectorXd speed = (dense.col(2).array().square() + dense.col(3).array().square()).sqrt().matrix();
  const Eigen::Index m = speed.size();
  if (m < 2) return 0.0;
  const double dt = traj.t_f / static_cast<double>(m - 1);
  return dt * (speed.sum() - 0.5 * (speed(0) + speed(m - 1)));
}

inline double path_length(const Trajectory& traj) { return path_length(traj, LglGrid(traj.order())); }

/// LGL quadrature of u1^2 + u2^2 over one slice.
inline double slice_energy(const Trajectory& traj, const LglGrid& grid) {
  return quadrature(grid, traj.controls.rowwise().squaredNorm().eval(), traj.t_f);
}

inline double slice_energy(const Trajectory& traj) { return slice_energy(traj, LglGrid(traj.order())); }

inline double total_energy(const CoveragePlan& plan) {
  std::optional<LglGrid> grid;
  double e = 0.0;
  for (const auto& t : plan.slices) {
    if (!grid || grid->order() != t.order()) grid.emplace(t.order());
    e += slice_energy(t, *grid);
  }
  return e;
}

inline double total_time(const CoveragePlan& plan) {
  double t = 0.0;
  for (const auto& s : plan.slices) t += s.t_f;
  return t;
}

inline double total_path_length(const CoveragePlan& plan) {
  if (plan.slices.empty()) return 0.0;
  const LglGrid grid(plan.slices.front().order());
  double l = 0.0;
  for (const auto& t : plan.slices) l += t.order() == grid.order() ? path_length(t, grid) : path_length(t);
  return l;
}

/// Ratio of total path length with obstacles to that without.
inline double coverage_ratio(const CoveragePlan& with_obstacles, const CoveragePlan& without) {
  const double base = total_path_length(without);
  if (!(base > 0.0)) throw DivisionByZero("obstacle-free plan has zero path length");
  return total_path_length(with_obstacles) / base;
}

inline double default_cell(const Scene& scene) { return scene.robot.coverage_radius / 5.0; }

namespace detail {

/// Occupancy grid over the workspace bounding box. A cell counts when its
/// center is inside the workspace, outside every obstacle, and within r_bot of
/// the swept polyline through a slice's dense samples.
class CoverageRaster {
 public:
  CoverageRaster(const Scene& scene, double cell) : scene_(scene), cell_(cell) {
    const double r = scene.robot.coverage_radius;
    if (!(cell > 0.0) || cell > 0.5 * r) throw ResolutionTooCoarse("cell must be in (0, r_bot/2]");
    lo_ = hi_ = scene.workspace.vertices.front();
    for (const auto& v : scene.workspace.vertices) {
      lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
      hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
    }
    nx_ = static_cast<std::int64_t>(std::ceil((hi_.x - lo_.x) / cell));
    ny_ = static_cast<std::int64_t>(std::ceil((hi_.y - lo_.y) / cell));
    state_.assign(static_cast<std::size_t>(nx_ * ny_), kUnknown);
  }

  /// Marks cells swept by one trajectory; returns the newly covered area.
  double add(const Trajectory& traj, const LglGrid& grid) {
    const Eigen::MatrixXd dense = dense_states(traj, grid);
    std::int64_t fresh = 0;
    for (Eigen::Index k = 0; k < dense.rows(); ++k) {
      const Point2 a{dense(k, 0), dense(k, 1)};
      const Point2 b = k + 1 < dense.rows() ? Point2{dense(k + 1, 0), dense(k + 1, 1)} : a;
      fresh += sweep_segment(a, b);
    }
    return static_cast<double>(fresh) * cell_ * cell_;
  }

 private:
  static constexpr std::uint8_t kUnknown = 0, kCovered = 1, kExcluded = 2;

  Point2 center(std::int64_t i, std::int64_t j) const {
    return {lo_.x + (static_cast<double>(i) + 0.5) * cell_, lo_.y + (static_cast<double>(j) + 0.5) * cell_};
  }

  bool admissible(Point2 c) const {
    if (!contains(scene_.workspace, c)) return false;
    for (const auto& o : scene_.obstacles) {
      if (o.contains(c)) return false;
    }
    return true;
  }

  std::int64_t sweep_segment(Point2 a, Point2 b) {
    const double r = scene_.robot.coverage_radius;
    const auto index = [&](double v, double origin, std::int64_t n) {
      return std::clamp(static_cast<std::int64_t>(std::floor((v - origin) / cell_)), std::int64_t{0}, n - 1);
    };
    const std::int64_t i0 = index(std::min(a.x, b.x) - r, lo_.x, nx_), i1 = index(std::max(a.x, b.x) + r, lo_.x, nx_);
    const std::int64_t j0 = index(std::min(a.y, b.y) - r, lo_.y, ny_), j1 = index(std::max(a.y, b.y) + r, lo_.y, ny_);
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    std::int64_t fresh = 0;
    for (std::int64_t j = j0; j <= j1; ++j) {
      for (std::int64_t i = i0; i <= i1; ++i) {
        std::uint8_t& s = state_[static_cast<std::size_t>(j * nx_ + i)];
        if (s != kUnknown) continue;
        const Point2 c = center(i, j);
        const double t = len2 > 0.0 ? std::clamp(dot(c - a, ab) / len2, 0.0, 1.0) : 0.0;
        if (distance(c, a + t * ab) > r) continue;
        if (admissible(c)) {
          s = kCovered;
          ++fresh;
        } else {
          s = kExcluded;
        }
      }
    }
    return fresh;
  }

  const Scene& scene_;
  double cell_;
  Point2 lo_, hi_;
  std::int64_t nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> state_;
};

}  // namespace detail

/// Covered area after each slice, cumulative.
inline std::vector<double> cumulative_covered_area(const CoveragePlan& plan, const Scene& scene, double cell) {
  detail::CoverageRaster raster(scene, cell);
  std::vector<double> out;
  out.reserve(plan.slices.size());
  double area = 0.0;
  std::optional<LglGrid> grid;
  for (const auto& t : plan.slices) {
    if (!grid || grid->order() != t.order()) grid.emplace(t.order());
    area += raster.add(t, *grid);
    out.push_back(area);
  }
  return out;
}

inline double covered_area(const CoveragePlan& plan, const Scene& scene, double cell) {
  if (plan.slices.empty()) {
    detail::CoverageRaster check(scene, cell);  // still rejects a coarse cell
    return 0.0;
  }
  return cumulative_covered_area(plan, scene, cell).back();
}

inline double covered_area(const CoveragePlan& plan, const Scene& scene) {
  return covered_area(plan, scene, default_cell(scene));
}

/// Coefficient of determination of the least-squares line through
/// (1, y_1), ..., (n, y_n). A constant series fits perfectly.
inline double linear_fit_r2(std::span<const double> y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() < 2) return 1.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mx += static_cast<double>(i + 1);
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

struct PlanMetrics {
  double total_energy = 0.0;
  double total_time = 0.0;
  double total_path_length = 0.0;
  double covered_area = 0.0;
  std::optional<double> coverage_ratio;
};

inline PlanMetrics plan_metrics(const CoveragePlan& plan, const Scene& scene, double cell) {
  PlanMetrics m;
  m.total_energy = total_energy(plan);
  m.total_time = total_time(plan);
  m.total_path_length = total_path_length(plan);
  m.covered_area = covered_area(plan, scene, cell);
  return m;
}

}  // namespace sweepopt
