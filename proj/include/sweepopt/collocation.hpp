#pragma once

// Legendre-Gauss-Lobatto nodes, quadrature weights, differentiation matrix
// and barycentric Lagrange interpolation on [-1, 1].

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "sweepopt/errors.hpp"

namespace sweepopt {

namespace detail {

/// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = next;
  }
  // (1 - x^2) P_n' = n (P_{n-1} - x P_n); only used at interior points.
  const double dp = (std::abs(x) < 1.0) ? n * (p_prev - x * p) / (1.0 - x * x)
                                        : 0.5 * n * (n + 1.0) * std::pow(x, n + 1);
  return {p, dp};
}

}  // namespace detail

/// Immutable LGL grid of order N (N + 1 nodes).
class LglGrid {
 public:
  explicit LglGrid(int order) : order_(order) {
    if (order < 1) throw InvalidOrder("LGL order must be >= 1, got " + std::to_string(order));
    const int n = order;
    nodes_.resize(n + 1);
    nodes_(0) = -1.0;
    nodes_(n) = 1.0;
    // Interior nodes are the roots of P_N'. Newton on P_N' with
    // (1 - x^2) P_N'' = 2x P_N' - N(N+1) P_N.
    for (int j = 1; j < n; ++j) {
      double x = -std::cos(std::numbers::pi * j / n);
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        const auto [p, dp] = detail::legendre(n, x);
        const double ddp = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
        const double step = dp / ddp;
        x -= step;
        if (std::abs(step) <= 1e-14) {
          converged = true;
          break;
        }
      }
      if (!converged) throw NumericalError("LGL Newton iteration did not converge");
      nodes_(j) = x;
    }
    for (int j = 0; j <= n / 2; ++j) {
      const double half = 0.5 * (nodes_(n - j) - nodes_(j));
      nodes_(j) = -half;
      nodes_(n - j) = half;
    }
    if (n % 2 == 0) nodes_(n / 2) = 0.0;

    Eigen::VectorXd pn(n + 1);
    weights_.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
      pn(j) = detail::legendre(n, nodes_(j)).first;
      weights_(j) = 2.0 / (n * (n + 1.0) * pn(j) * pn(j));
    }

    diff_.setZero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        if (i != j) diff_(i, j) = pn(i) / (pn(j) * (nodes_(i) - nodes_(j)));
      }
    }
    diff_(0, 0) = -0.25 * n * (n + 1.0);
    diff_(n, n) = 0.25 * n * (n + 1.0);

    bary_.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
      double prod = 1.0;
      for (int k = 0; k <= n; ++k) {
        if (k != j) prod *= nodes_(j) - nodes_(k);
      }
      bary_(j) = 1.0 / prod;
    }
    bary_ /= bary_.cwiseAbs().maxCoeff();
  }

  int order() const { return order_; }
  int size() const { return order_ + 1; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& diff_matrix() const { return diff_; }
  const Eigen::VectorXd& barycentric_weights() const { return bary_; }

  /// Row of Lagrange basis values phi_j(tau), j = 0..N.
  Eigen::RowVectorXd basis_row(double tau) const {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(size());
    for (int j = 0; j < size(); ++j) {
      if (tau == nodes_(j)) {
        row(j) = 1.0;
        return row;
      }
    }
    double denom = 0.0;
    for (int j = 0; j < size(); ++j) {
      row(j) = bary_(j) / (tau - nodes_(j));
      denom += row(j);
    }
    return row / denom;
  }

  /// Basis values at several points, one row per point.
  Eigen::MatrixXd interpolation_matrix(std::span<const double> taus) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(taus.size()), size());
    for (std::size_t k = 0; k < taus.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = basis_row(taus[k]);
    return m;
  }

 private:
  int order_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd diff_;
  Eigen::VectorXd bary_;
};

inline LglGrid lgl_grid(int order) { return LglGrid(order); }

/// Affine map between the collocation interval [-1, 1] and [0, t_f].
struct TimeMap {
  double t_f = 1.0;

  double time(double tau) const { return 0.5 * t_f * (tau + 1.0); }
  double tau(double t) const { return 2.0 * t / t_f - 1.0; }
  double dtau_dt() const { return 2.0 / t_f; }
};

inline void check_length(const LglGrid& grid, Eigen::Index n) {
  if (n != grid.size()) {
    throw DimensionMismatch("expected " + std::to_string(grid.size()) + " samples, got " +
                            std::to_string(n));
  }
}

/// Value at `tau` of the degree-N polynomial through (tau_j, values_j).
inline double interpolate(const LglGrid& grid, const Eigen::VectorXd& values, double tau) {
  check_length(grid, values.size());
  return grid.basis_row(tau).dot(values);
}

/// Approximates the integral over [0, t_f] of the sampled function.
inline double quadrature(const LglGrid& grid, const Eigen::VectorXd& values, double t_f) {
  check_length(grid, values.size());
  return 0.5 * t_f * grid.weights().dot(values);
}

/// Time derivative at the nodes: (2 / t_f) D values.
inline Eigen::VectorXd differentiate(const LglGrid& grid, const Eigen::VectorXd& values, double t_f) {
  check_length(grid, values.size());
  return (2.0 / t_f) * (grid.diff_matrix() * values);
}

}  // namespace sweepopt
