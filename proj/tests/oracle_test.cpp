#include "sweepopt/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace sweepopt {
namespace {

// Independent check on the closed form: golden-section search of
// C(T) = (1 - w) 12 L^2 / T^3 + w T, which is unimodal on T > 0.
double golden_section_argmin(double distance, double weight) {
  auto cost = [&](double t) { return (1.0 - weight) * 12.0 * distance * distance / (t * t * t) + weight * t; };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-3, b = 1e3;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = cost(c), fd = cost(d);
  while (b - a > 1e-11 * (1.0 + std::abs(a))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = cost(d);
    }
  }
  return 0.5 * (a + b);
}

TEST(AnalyticRestToRest, HalfWeightExample) {
  const double t_numeric = golden_section_argmin(10.0, 0.5);
  EXPECT_NEAR(t_numeric, 7.745967, 1e-6);
  const auto s = analytic_rest_to_rest(10.0, 0.5);
  EXPECT_NEAR(s.t_f_star, t_numeric, 1e-7);
  EXPECT_NEAR(s.t_f_star, std::sqrt(60.0), 1e-12);
  EXPECT_NEAR(s.energy_star, 2.581989, 1e-6);
  EXPECT_NEAR(s.energy_star, 1200.0 / std::pow(60.0, 1.5), 1e-12);
}

TEST(AnalyticRestToRest, HeavyTimeWeightExample) {
  const double t_numeric = golden_section_argmin(10.0, 0.9);
  EXPECT_NEAR(t_numeric, 4.472136, 1e-6);
  const auto s = analytic_rest_to_rest(10.0, 0.9);
  EXPECT_NEAR(s.t_f_star, t_numeric, 1e-7);
  EXPECT_NEAR(s.energy_star, 13.41641, 1e-5);
}

TEST(AnalyticRestToRest, ZeroDistanceIsDegenerate) {
  const auto s = analytic_rest_to_rest(0.0, 0.4);
  EXPECT_EQ(s.t_f_star, 0.0);
  EXPECT_EQ(s.energy_star, 0.0);
  EXPECT_EQ(s.cost_star, 0.0);
}

TEST(AnalyticRestToRest, RejectsWeightsOutsideOpenInterval) {
  EXPECT_THROW(analytic_rest_to_rest(10.0, 0.0), InvalidWeight);
  EXPECT_THROW(analytic_rest_to_rest(10.0, 1.0), InvalidWeight);
  EXPECT_THROW(analytic_rest_to_rest(10.0, 1.5), InvalidWeight);
  EXPECT_THROW(analytic_rest_to_rest(10.0, std::nan("")), InvalidWeight);
}

TEST(AnalyticRestToRest, CostMatchesGoldenSectionOnRandomPairs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> length(0.5, 20.0);
  std::uniform_real_distribution<double> weight(0.05, 0.95);
  for (int k = 0; k < 20; ++k) {
    const double l = length(rng);
    const double w = weight(rng);
    const double t = golden_section_argmin(l, w);
    const double numeric_cost = rest_to_rest_cost(l, w, t);
    const auto s = analytic_rest_to_rest(l, w);
    EXPECT_NEAR(s.cost_star, numeric_cost, 1e-8) << "L=" << l << " w=" << w;
    EXPECT_NEAR(s.cost_star, (1.0 - w) * s.energy_star + w * s.t_f_star, 1e-12);
  }
}

TEST(AnalyticRestToRest, MonotoneInWeight) {
  double prev_t = std::numeric_limits<double>::infinity();
  double prev_e = 0.0;
  for (int k = 1; k < 100; ++k) {
    const auto s = analytic_rest_to_rest(10.0, k / 100.0);
    EXPECT_LT(s.t_f_star, prev_t);
    EXPECT_GT(s.energy_star, prev_e);
    prev_t = s.t_f_star;
    prev_e = s.energy_star;
  }
}

TEST(AnalyticRestToRest, ProfileIsRestToRest) {
  const auto s = analytic_rest_to_rest(10.0, 0.3);
  // u is linear in t, so Simpson's rule is exact.
  const double t = s.t_f_star;
  const double integral = t / 6.0 * (s.control(0.0) + 4.0 * s.control(0.5 * t) + s.control(t));
  EXPECT_NEAR(integral, 0.0, 1e-12);
  EXPECT_NEAR(s.velocity(0.0), 0.0, 1e-15);
  EXPECT_NEAR(s.velocity(t), 0.0, 1e-12);
  EXPECT_NEAR(s.position(t), 10.0, 1e-12);
  // Energy of the profile: integrate u^2 (quadratic) with Simpson.
  const double energy = t / 6.0 * (std::pow(s.control(0.0), 2) + 4.0 * std::pow(s.control(0.5 * t), 2) +
                                   std::pow(s.control(t), 2));
  EXPECT_NEAR(energy, s.energy_star, 1e-10);
}

}  // namespace
}  // namespace sweepopt
