#pragma once

// Closed-form optimum of the obstacle-free rest-to-rest slice.
//
// For a fixed duration T the minimum-energy rest-to-rest control of the
// double integrator over distance L is u(t) = (6L/T^2)(1 - 2t/T), with energy
// 12 L^2 / T^3. Minimizing (1-w) 12 L^2/T^3 + w T over T gives
// T* = (36 (1-w) L^2 / w)^(1/4). At T* the Hamiltonian vanishes, which is the
// free-final-time condition.

#include <cmath>
#include <string>

#include "sweepopt/errors.hpp"

namespace sweepopt {

struct AnalyticSolution {
  double distance = 0.0;
  double weight = 0.5;
  double t_f_star = 0.0;
  double energy_star = 0.0;
  double cost_star = 0.0;

  /// Control along the travel axis at time t in [0, t_f_star].
  double control(double t) const {
    if (t_f_star <= 0.0) return 0.0;
    return 6.0 * distance / (t_f_star * t_f_star) * (1.0 - 2.0 * t / t_f_star);
  }
  double velocity(double t) const {
    if (t_f_star <= 0.0) return 0.0;
    const double s = t / t_f_star;
    return 6.0 * distance / t_f_star * s * (1.0 - s);
  }
  double position(double t) const {
    if (t_f_star <= 0.0) return 0.0;
    const double s = t / t_f_star;
    return distance * s * s * (3.0 - 2.0 * s);
  }
};

/// Minimum energy of a rest-to-rest move over `distance` in time `duration`.
inline double rest_to_rest_energy(double distance, double duration) {
  return 12.0 * distance * distance / (duration * duration * duration);
}

/// Weighted cost of the best rest-to-rest move with the duration held fixed.
inline double rest_to_rest_cost(double distance, double weight, double duration) {
  return (1.0 - weight) * rest_to_rest_energy(distance, duration) + weight * duration;
}

inline AnalyticSolution analytic_rest_to_rest(double distance, double weight) {
  if (!(weight > 0.0 && weight < 1.0)) {
    throw InvalidWeight("weight must lie in (0, 1), got " + std::to_string(weight));
  }
  if (!(distance >= 0.0)) throw ValidationError("distance must be non-negative");
  AnalyticSolution s{distance, weight, 0.0, 0.0, 0.0};
  if (distance == 0.0) return s;
  s.t_f_star = std::pow(36.0 * (1.0 - weight) * distance * distance / weight, 0.25);
  s.energy_star = rest_to_rest_energy(distance, s.t_f_star);
  s.cost_star = (1.0 - weight) * s.energy_star + weight * s.t_f_star;
  return s;
}

}  // namespace sweepopt
