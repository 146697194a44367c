#pragma once

// Augmented Lagrangian solver for small dense NLPs
//
//   minimize f(z)  s.t.  c(z) = 0,  g(z) >= 0,  lower <= z <= upper.
//
// Equalities get first-order multiplier updates, inequalities a squared-hinge
// (Rockafellar) term, and box bounds are kept by projection inside a
// BFGS line-search minimizer. The Lagrangian convention is
//
//   L(z, lambda, mu) = f(z) - lambda^T c(z) - mu^T g(z),  mu >= 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sweepopt/errors.hpp"

namespace sweepopt {

/// Problem interface consumed by solve(). Gradients go through transposed
/// products J^T v; dense Jacobians feed the inner model Hessian.
template <class P>
concept SmoothNlp = requires(const P& p, const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
  { p.num_variables() } -> std::convertible_to<Eigen::Index>;
  { p.num_equalities() } -> std::convertible_to<Eigen::Index>;
  { p.num_inequalities() } -> std::convertible_to<Eigen::Index>;
  { p.lower_bounds() } -> std::convertible_to<Eigen::VectorXd>;
  { p.upper_bounds() } -> std::convertible_to<Eigen::VectorXd>;
  { p.objective(z) } -> std::convertible_to<double>;
  { p.objective_gradient(z) } -> std::convertible_to<Eigen::VectorXd>;
  { p.equalities(z) } -> std::convertible_to<Eigen::VectorXd>;
  { p.equality_vjp(z, v) } -> std::convertible_to<Eigen::VectorXd>;
  { p.inequalities(z) } -> std::convertible_to<Eigen::VectorXd>;
  { p.inequality_vjp(z, v) } -> std::convertible_to<Eigen::VectorXd>;
  { p.equality_jacobian(z) } -> std::convertible_to<Eigen::MatrixXd>;
  { p.inequality_jacobian(z) } -> std::convertible_to<Eigen::MatrixXd>;
};

/// Optional: exact Hessian of f - lambda^T c - mu^T g. When present the inner
/// solver takes Newton steps instead of building a quasi-Newton model.
template <class P>
concept HasLagrangianHessian = requires(const P& p, const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
  { p.lagrangian_hessian(z, v, v) } -> std::convertible_to<Eigen::MatrixXd>;
};

struct SolverOptions {
  double stationarity_tol = 1e-6;
  double feasibility_tol = 1e-8;
  int max_outer_iterations = 50;
  int max_inner_iterations = 500;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e8;
  double armijo = 1e-4;

  void validate() const {
    if (!(stationarity_tol > 0.0) || !(feasibility_tol > 0.0)) {
      throw ValidationError("solver tolerances must be positive");
    }
    if (!(penalty_growth > 1.0)) throw ValidationError("penalty growth must exceed 1");
    if (!(initial_penalty > 0.0) || max_penalty < initial_penalty) {
      throw ValidationError("penalty bounds are inconsistent");
    }
    if (max_outer_iterations < 1 || max_inner_iterations < 1) {
      throw ValidationError("iteration limits must be positive");
    }
  }
};

enum class SolveStatus { Converged, MaxIterations, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

/// Per-solve counters for the inner line search.
struct LineSearchStats {
  int armijo_steps = 0;
  /// Steps accepted because the predicted decrease fell below rounding noise.
  int noise_steps = 0;
  /// Largest objective increase over an Armijo-accepted step (should be <= 0).
  double worst_armijo_increase = -std::numeric_limits<double>::infinity();
};

struct SolveReport {
  Eigen::VectorXd solution;
  Eigen::VectorXd multipliers;  // equalities first, then inequalities
  double objective = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  LineSearchStats line_search;
};

/// Max-norm violation of equalities, inequalities and bounds.
template <SmoothNlp P>
double constraint_violation(const P& nlp, const Eigen::VectorXd& z) {
  double v = 0.0;
  if (nlp.num_equalities() > 0) v = std::max(v, nlp.equalities(z).cwiseAbs().maxCoeff());
  if (nlp.num_inequalities() > 0) v = std::max(v, (-nlp.inequalities(z)).maxCoeff());
  v = std::max(v, (nlp.lower_bounds() - z).maxCoeff());
  v = std::max(v, (z - nlp.upper_bounds()).maxCoeff());
  return v;
}

namespace detail {

inline Eigen::VectorXd project(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

inline double projected_gradient_norm(const Eigen::VectorXd& z, const Eigen::VectorXd& grad,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (z.size() == 0) return 0.0;
  return (z - project(z - grad, lo, hi)).cwiseAbs().maxCoeff();
}

template <SmoothNlp P>
void check_dimension(const P& nlp, const Eigen::VectorXd& z) {
  if (z.size() != static_cast<Eigen::Index>(nlp.num_variables())) {
    throw DimensionMismatch("point has " + std::to_string(z.size()) + " entries, problem has " +
                            std::to_string(nlp.num_variables()) + " variables");
  }
}

/// Augmented Lagrangian value and gradient at fixed multipliers and penalty.
template <SmoothNlp P>
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const P& nlp, const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu,
                      double rho)
      : nlp_(nlp), lambda_(lambda), mu_(mu), rho_(rho) {}

  /// Value up to an additive constant: the multiplier-only terms are dropped
  /// to limit cancellation.
  double value(const Eigen::VectorXd& z) const {
    double v = nlp_.objective(z);
    if (lambda_.size() > 0) v += 0.5 * rho_ * (nlp_.equalities(z) - lambda_ / rho_).squaredNorm();
    if (mu_.size() > 0) v += (mu_ - rho_ * nlp_.inequalities(z)).cwiseMax(0.0).squaredNorm() / (2.0 * rho_);
    return v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    Eigen::VectorXd grad = nlp_.objective_gradient(z);
    if (lambda_.size() > 0) {
      const Eigen::VectorXd c = nlp_.equalities(z);
      grad -= nlp_.equality_vjp(z, lambda_ - rho_ * c);
    }
    if (mu_.size() > 0) {
      const Eigen::VectorXd g = nlp_.inequalities(z);
      grad -= nlp_.inequality_vjp(z, (mu_ - rho_ * g).cwiseMax(0.0));
    }
    return grad;
  }

  static constexpr bool kExactHessian = HasLagrangianHessian<P>;

  /// Model Hessian: rho J^T J over the equalities and the hinge terms that are
  /// switched on, plus the Lagrangian Hessian at the shifted multipliers when
  /// the problem provides it.
  Eigen::MatrixXd model_hessian(const Eigen::VectorXd& z) const {
    const Eigen::Index n = z.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd lambda_hat, mu_hat;
    if (lambda_.size() > 0) {
      const Eigen::MatrixXd jac = nlp_.equality_jacobian(z);
      h.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose(), rho_);
      if constexpr (kExactHessian) lambda_hat = lambda_ - rho_ * nlp_.equalities(z);
    }
    if (mu_.size() > 0) {
      const Eigen::VectorXd g = nlp_.inequalities(z);
      mu_hat = (mu_ - rho_ * g).cwiseMax(0.0);
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (mu_hat(i) > 0.0) rows.push_back(i);
      }
      if (!rows.empty()) {
        const Eigen::MatrixXd jac = nlp_.inequality_jacobian(z);
        Eigen::MatrixXd active(static_cast<Eigen::Index>(rows.size()), n);
        for (std::size_t k = 0; k < rows.size(); ++k) active.row(static_cast<Eigen::Index>(k)) = jac.row(rows[k]);
        h.selfadjointView<Eigen::Lower>().rankUpdate(active.transpose(), rho_);
      }
    }
    Eigen::MatrixXd full = h.selfadjointView<Eigen::Lower>();
    if constexpr (kExactHessian) full += nlp_.lagrangian_hessian(z, lambda_hat, mu_hat);
    return full;
  }

 private:
  const P& nlp_;
  const Eigen::VectorXd& lambda_;
  const Eigen::VectorXd& mu_;
  double rho_;
};

/// Projected line-search minimizer for the augmented Lagrangian.
///
/// The model Hessian is Q + H(z). H(z) comes from the merit (exact when the
/// problem supplies Lagrangian second derivatives, otherwise only the penalty
/// part rho J^T J); without exact second derivatives Q is a damped-BFGS
/// estimate of the missing Lagrangian curvature. Variables pinned at a bound
/// by the gradient are frozen for the step. `curvature` (Q) persists across
/// calls; an empty matrix means "start fresh".
template <class Merit>
int minimize_in_box(const Merit& merit, Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi, double tol, int max_iterations, double armijo,
                    Eigen::MatrixXd& curvature, LineSearchStats& stats) {
  const Eigen::Index n = z.size();
  if (n == 0) return 0;
  constexpr bool exact = Merit::kExactHessian;
  bool fresh = curvature.rows() != n;
  if (fresh) curvature = exact ? Eigen::MatrixXd::Zero(n, n).eval() : Eigen::MatrixXd::Identity(n, n).eval();

  double value = merit.value(z);
  Eigen::VectorXd grad = merit.gradient(z);
  Eigen::MatrixXd penalty = merit.model_hessian(z);
  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));
  int it = 0;
  for (; it < max_iterations; ++it) {
    const double pg_norm = projected_gradient_norm(z, grad, lo, hi);
    if (pg_norm <= tol) break;

    const double eps = std::min(1e-3, pg_norm);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    free_idx.clear();
    // A variable sitting on its bound also stays put while the pull into the
    // interior is small; otherwise degenerate bounds (zero gradient at the
    // optimum) flip in and out of the free set every iteration.
    const double weak = 0.1 * pg_norm;
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((z(i) <= lo(i) + eps && grad(i) > 0.0) || (z(i) == lo(i) && grad(i) > -weak)) {
        d(i) = lo(i) - z(i);
      } else if ((z(i) >= hi(i) - eps && grad(i) < 0.0) || (z(i) == hi(i) && grad(i) < weak)) {
        d(i) = hi(i) - z(i);
      } else {
        free_idx.push_back(i);
      }
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    if (nf > 0) {
      Eigen::MatrixXd model(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs(a) = -grad(free_idx[a]);
        for (Eigen::Index b = 0; b < nf; ++b) {
          model(a, b) = curvature(free_idx[a], free_idx[b]) + penalty(free_idx[a], free_idx[b]);
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(model);
      double shift = 1e-10 * std::max(1.0, model.diagonal().cwiseAbs().maxCoeff());
      while (llt.info() != Eigen::Success) {
        model.diagonal().array() += shift;
        shift *= 10.0;
        llt.compute(model);
      }
      const Eigen::VectorXd step = llt.solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) d(free_idx[a]) = step(a);
    }

    Eigen::VectorXd z_new;
    double value_new = 0.0;
    bool accepted = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 60; ++bt) {
      z_new = project(z + alpha * d, lo, hi);
      value_new = merit.value(z_new);
      const double predicted = grad.dot(z_new - z);
      if (std::isfinite(value_new) && predicted < 0.0 && value_new <= value + armijo * predicted) {
        accepted = true;
        ++stats.armijo_steps;
        stats.worst_armijo_increase = std::max(stats.worst_armijo_increase, value_new - value);
        break;
      }
      // Once the predicted decrease is lost in rounding, values can no longer
      // rank trial points. Fall back to a curvature test on the directional
      // derivative, which does not suffer the same cancellation.
      const double noise = 1024.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value));
      if (std::isfinite(value_new) && std::abs(predicted) <= noise && std::abs(value_new - value) <= noise) {
        const Eigen::VectorXd step = z_new - z;
        const double slope0 = grad.dot(step);
        const double slope1 = merit.gradient(z_new).dot(step);
        if (slope0 < 0.0 && std::abs(slope1) <= 0.9 * std::abs(slope0)) {
          accepted = true;
          ++stats.noise_steps;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd grad_new = merit.gradient(z_new);
    const Eigen::MatrixXd penalty_new = merit.model_hessian(z_new);
    const Eigen::VectorXd s = z_new - z;
    if (exact) {
      z = z_new;
      value = value_new;
      grad = grad_new;
      penalty = penalty_new;
      continue;
    }
    // Secant pair for the Lagrangian part only.
    const Eigen::VectorXd y = grad_new - grad - penalty_new * s;
    const double ss = s.squaredNorm();
    if (ss > 0.0) {
      if (fresh) {
        const double sy = s.dot(y);
        const double scale = sy > 0.0 ? sy / ss : 1.0;
        curvature = std::clamp(scale, 1e-6, 1e6) * Eigen::MatrixXd::Identity(n, n);
        fresh = false;
      }
      // Powell-damped BFGS keeps Q positive definite.
      const Eigen::VectorXd qs = curvature * s;
      const double sqs = s.dot(qs);
      const double sy = s.dot(y);
      Eigen::VectorXd r = y;
      if (sy < 0.2 * sqs) {
        const double theta = 0.8 * sqs / (sqs - sy);
        r = theta * y + (1.0 - theta) * qs;
      }
      const double sr = s.dot(r);
      if (sqs > 0.0 && sr > 0.0) {
        curvature.noalias() -= (qs * qs.transpose()) / sqs;
        curvature.noalias() += (r * r.transpose()) / sr;
      }
    }
    z = z_new;
    value = value_new;
    grad = grad_new;
    penalty = penalty_new;
  }
  if (fresh && !exact) curvature.resize(0, 0);
  return it;
}

}  // namespace detail

/// Stationarity of the Lagrangian projected onto the bounds, combined (max)
/// with complementarity |min(mu_i, g_i)| and dual feasibility of mu.
template <SmoothNlp P>
double kkt_residual(const P& nlp, const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers) {
  detail::check_dimension(nlp, z);
  const Eigen::Index m_eq = nlp.num_equalities();
  const Eigen::Index m_in = nlp.num_inequalities();
  if (multipliers.size() != m_eq + m_in) {
    throw DimensionMismatch("expected " + std::to_string(m_eq + m_in) + " multipliers, got " +
                            std::to_string(multipliers.size()));
  }
  Eigen::VectorXd grad = nlp.objective_gradient(z);
  if (m_eq > 0) grad -= nlp.equality_vjp(z, multipliers.head(m_eq));
  if (m_in > 0) grad -= nlp.inequality_vjp(z, multipliers.tail(m_in));
  double residual = detail::projected_gradient_norm(z, grad, nlp.lower_bounds(), nlp.upper_bounds());
  if (m_in > 0) {
    const Eigen::VectorXd g = nlp.inequalities(z);
    const Eigen::VectorXd mu = multipliers.tail(m_in);
    for (Eigen::Index i = 0; i < m_in; ++i) {
      residual = std::max(residual, std::abs(std::min(mu(i), g(i))));
      residual = std::max(residual, -mu(i));
    }
  }
  return residual;
}

template <SmoothNlp P>
SolveReport solve(const P& nlp, const Eigen::VectorXd& guess, const SolverOptions& opts = {}) {
  opts.validate();
  detail::check_dimension(nlp, guess);
  const Eigen::VectorXd lo = nlp.lower_bounds();
  const Eigen::VectorXd hi = nlp.upper_bounds();
  const Eigen::Index m_eq = nlp.num_equalities();
  const Eigen::Index m_in = nlp.num_inequalities();
  const bool constrained = m_eq + m_in > 0;

  SolveReport report;
  Eigen::VectorXd z = detail::project(guess, lo, hi);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m_eq);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m_in);
  double rho = opts.initial_penalty;
  double inner_tol = constrained ? std::max(0.5 * opts.stationarity_tol, 1e-2) : 0.5 * opts.stationarity_tol;
  double prev_violation = std::numeric_limits<double>::infinity();
  int stalled_at_max = 0;
  Eigen::MatrixXd curvature;

  auto multipliers = [&] {
    Eigen::VectorXd m(m_eq + m_in);
    m << lambda, mu;
    return m;
  };

  struct Best {
    Eigen::VectorXd z, multipliers;
    double violation = std::numeric_limits<double>::infinity();
    double kkt = std::numeric_limits<double>::infinity();
  } best;

  for (int outer = 1; outer <= opts.max_outer_iterations; ++outer) {
    report.outer_iterations = outer;
    const detail::AugmentedLagrangian<P> merit(nlp, lambda, mu, rho);
    report.inner_iterations += detail::minimize_in_box(merit, z, lo, hi, inner_tol, opts.max_inner_iterations,
                                                       opts.armijo, curvature, report.line_search);

    if (m_eq > 0) lambda -= rho * nlp.equalities(z);
    if (m_in > 0) mu = (mu - rho * nlp.inequalities(z)).cwiseMax(0.0);
    const double violation = constraint_violation(nlp, z);
    const double kkt = kkt_residual(nlp, z, multipliers());

    const bool feasible = violation <= opts.feasibility_tol;
    if (feasible && kkt <= opts.stationarity_tol) {
      best = {z, multipliers(), violation, kkt};
      report.status = SolveStatus::Converged;
      break;
    }
    const bool better = (violation <= opts.feasibility_tol && best.violation <= opts.feasibility_tol)
                            ? kkt < best.kkt
                            : violation < best.violation;
    if (better) best = {z, multipliers(), violation, kkt};

    if (!feasible) {
      if (violation > 0.25 * prev_violation) {
        if (rho >= opts.max_penalty) {
          if (++stalled_at_max >= 5) {
            report.status = SolveStatus::Infeasible;
            break;
          }
        } else {
          rho = std::min(rho * opts.penalty_growth, opts.max_penalty);
        }
      } else {
        stalled_at_max = 0;
      }
    }
    prev_violation = violation;
    inner_tol = std::max(0.5 * opts.stationarity_tol, 0.1 * inner_tol);
  }

  report.solution = best.z;
  report.multipliers = best.multipliers;
  report.objective = nlp.objective(best.z);
  report.constraint_violation = best.violation;
  report.kkt_residual = best.kkt;
  return report;
}

/// Dense Jacobian assembled from transposed products, for diagnostics.
template <class Vjp>
Eigen::MatrixXd dense_jacobian(const Vjp& vjp, const Eigen::VectorXd& z, Eigen::Index rows) {
  Eigen::MatrixXd jac(rows, z.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    jac.row(i) = vjp(z, Eigen::VectorXd::Unit(rows, i)).transpose();
  }
  return jac;
}

/// SmoothNlp built from callables; convenient for small problems and tests.
struct FunctionNlp {
  using Scalar = std::function<double(const Eigen::VectorXd&)>;
  using Vector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Product = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  Eigen::Index n = 0;
  Scalar f;
  Vector grad_f;
  Eigen::Index m_eq = 0;
  Vector c;
  Product c_vjp;
  Eigen::Index m_in = 0;
  Vector g;
  Product g_vjp;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return n; }
  Eigen::Index num_equalities() const { return m_eq; }
  Eigen::Index num_inequalities() const { return m_in; }
  Eigen::VectorXd lower_bounds() const {
    return lower.size() ? lower : Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  }
  Eigen::VectorXd upper_bounds() const {
    return upper.size() ? upper : Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  }
  double objective(const Eigen::VectorXd& z) const { return f(z); }
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const { return grad_f(z); }
  Eigen::VectorXd equalities(const Eigen::VectorXd& z) const { return m_eq ? c(z) : Eigen::VectorXd(); }
  Eigen::VectorXd equality_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    return m_eq ? c_vjp(z, v) : Eigen::VectorXd::Zero(n).eval();
  }
  Eigen::VectorXd inequalities(const Eigen::VectorXd& z) const { return m_in ? g(z) : Eigen::VectorXd(); }
  Eigen::VectorXd inequality_vjp(const Eigen::VectorXd& z, const Eigen::VectorXd& v) const {
    return m_in ? g_vjp(z, v) : Eigen::VectorXd::Zero(n).eval();
  }
  Eigen::MatrixXd equality_jacobian(const Eigen::VectorXd& z) const {
    return dense_jacobian([this](const Eigen::VectorXd& p, const Eigen::VectorXd& v) { return equality_vjp(p, v); }, z, m_eq);
  }
  Eigen::MatrixXd inequality_jacobian(const Eigen::VectorXd& z) const {
    return dense_jacobian([this](const Eigen::VectorXd& p, const Eigen::VectorXd& v) { return inequality_vjp(p, v); }, z, m_in);
  }
};

}  // namespace sweepopt
