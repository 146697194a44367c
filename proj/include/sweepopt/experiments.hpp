#pragma once

// Seeded random scenes and the parameter studies over weight, obstacle count
// and obstacle radius.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sweepopt/errors.hpp"
#include "sweepopt/geometry.hpp"
#include "sweepopt/metrics.hpp"
#include "sweepopt/planner.hpp"

namespace sweepopt {

inline constexpr int kPlacementAttempts = 10000;

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw. Written
/// out because std::uniform_real_distribution is not portable bit-for-bit.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

/// splitmix64 finalizer; used to derive per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Obstacles drawn one at a time with mt19937_64(seed): radius uniform in
/// [r_min, r_max], then centers uniform over the bounding box until one lies
/// at least radius + r_bot inside the workspace and clear of earlier disks.
/// Earlier obstacles never depend on later ones, so for a fixed seed the
/// layout for n obstacles is a prefix of the layout for n + 1.
inline Scene random_scene(const Scene& base, int n_obs, std::pair<double, double> radius_range, std::uint64_t seed) {
  const auto [r_min, r_max] = radius_range;
  if (n_obs < 0) throw ValidationError("obstacle count must be non-negative");
  if (!(r_min > 0.0 && r_min <= r_max && std::isfinite(r_max))) throw ValidationError("need 0 < r_min <= r_max");
  if (auto d = polygon_defect(base.workspace)) throw ValidationError("workspace: " + *d);

  Point2 lo = base.workspace.vertices.front(), hi = lo;
  for (const auto& v : base.workspace.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  Scene scene = base;
  scene.obstacles.clear();
  scene.seed = seed;
  std::mt19937_64 rng(seed);
  const double margin = base.robot.coverage_radius;
  for (int i = 0; i < n_obs; ++i) {
    const double radius = uniform_in(rng, r_min, r_max);
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const Point2 c{uniform_in(rng, lo.x, hi.x), uniform_in(rng, lo.y, hi.y)};
      if (!contains(base.workspace, c) || inset_distance(base.workspace, c) < radius + margin) continue;
      placed = std::all_of(scene.obstacles.begin(), scene.obstacles.end(),
                           [&](const CircleObstacle& o) { return distance(c, o.center) >= radius + o.radius; });
      if (placed) scene.obstacles.push_back({c, radius});
    }
    if (!placed) {
      throw PlacementFailed("could not place obstacle " + std::to_string(i) + " after " +
                            std::to_string(kPlacementAttempts) + " attempts");
    }
  }
  return scene;
}

enum class Vary { Weight, ObstacleCount, ObstacleRadius };

inline const char* to_string(Vary v) {
  switch (v) {
    case Vary::Weight: return "weight";
    case Vary::ObstacleCount: return "n-obs";
    case Vary::ObstacleRadius: return "r-obs";
  }
  return "?";
}

struct ScenarioSpec {
  Scene base;
  Vary vary = Vary::Weight;
  std::vector<double> values;
  int trials_per_value = 5;
  std::uint64_t seed = 0;
  /// Radii for the count study.
  std::pair<double, double> radius_range{0.05, 0.3};
  /// Obstacles per scene in the radius study.
  int obstacle_count = 10;
};

inline std::optional<std::string> scenario_defect(const ScenarioSpec& s) {
  if (auto d = scene_defect(s.base)) return d;
  if (s.values.empty()) return "no values to sweep";
  if (s.trials_per_value < 1) return "trials per value must be positive";
  for (double v : s.values) {
    if (!std::isfinite(v)) return "values must be finite";
    switch (s.vary) {
      case Vary::Weight:
        if (v < 0.1 || v > 0.9) return "weight values must lie in [0.1, 0.9]";
        break;
      case Vary::ObstacleCount:
        if (v < 0.0 || v != std::floor(v)) return "obstacle counts must be non-negative integers";
        break;
      case Vary::ObstacleRadius:
        if (!(v > 0.0)) return "obstacle radii must be positive";
        break;
    }
  }
  if (s.vary == Vary::ObstacleCount && !(s.radius_range.first > 0.0 && s.radius_range.first <= s.radius_range.second)) {
    return "radius range must satisfy 0 < r_min <= r_max";
  }
  if (s.vary == Vary::ObstacleRadius && s.obstacle_count < 0) return "obstacle count must be non-negative";
  return std::nullopt;
}

struct TrendRow {
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double time = std::numeric_limits<double>::quiet_NaN();
  double area = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  int slices = 0;
  int expanded = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct TrendTable {
  Vary vary = Vary::Weight;
  std::vector<TrendRow> rows;
};

/// Seed of trial t. It does not depend on the swept value, so the count study
/// sees nested layouts across counts.
inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial)));
}

/// SWEEPOPT_THREADS if set to a positive integer, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SWEEPOPT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs job(i) for i in [0, n) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t n, unsigned workers, Job&& job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace detail {

struct PlanOutcome {
  std::optional<CoveragePlan> plan;
  std::string status = "ok";
};

inline PlanOutcome try_plan(const Scene& scene, const PlannerOptions& opts) {
  PlanOutcome out;
  try {
    out.plan = plan_coverage(scene, opts);
  } catch (const BlockedEndpoint&) {
    out.status = "BlockedEndpoint";
  } catch (const SliceInfeasible&) {
    out.status = "SliceInfeasible";
  } catch (const ValidationError&) {
    out.status = "ValidationError";
  }
  return out;
}

inline void fill_metrics(TrendRow& row, const PlanOutcome& with, const CoveragePlan& without, const Scene& scene) {
  row.status = with.status;
  if (!with.plan) return;
  const CoveragePlan& p = *with.plan;
  row.energy = total_energy(p);
  row.time = total_time(p);
  row.area = covered_area(p, scene);
  row.ratio = coverage_ratio(p, without);
  row.slices = static_cast<int>(p.slices.size());
  row.expanded = p.expanded_count();
}

}  // namespace detail

/// One row per (value, trial), ordered by value then trial. Failed trials keep
/// their row with the failure in `status`.
inline TrendTable parameter_sweep(const ScenarioSpec& spec, const PlannerOptions& opts = {},
                                  unsigned workers = worker_count()) {
  if (auto d = scenario_defect(spec)) throw ValidationError(*d);
  TrendTable table;
  table.vary = spec.vary;
  const std::size_t trials = static_cast<std::size_t>(spec.trials_per_value);
  table.rows.resize(spec.values.size() * trials);
  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    for (std::size_t t = 0; t < trials; ++t) {
      TrendRow& row = table.rows[v * trials + t];
      row.value = spec.values[v];
      row.trial = static_cast<int>(t);
      row.seed = trial_seed(spec.seed, static_cast<int>(t));
    }
  }

  // Obstacle-free reference plans, one per distinct weight.
  std::vector<double> weights;
  if (spec.vary == Vary::Weight) {
    weights = spec.values;
  } else {
    weights = {spec.base.weight};
  }
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  std::vector<CoveragePlan> free_plans(weights.size());
  parallel_for(weights.size(), workers, [&](std::size_t i) {
    Scene s = spec.base;
    s.obstacles.clear();
    s.weight = weights[i];
    free_plans[i] = plan_coverage(s, opts);
  });
  const auto free_plan = [&](double w) -> const CoveragePlan& {
    return free_plans[static_cast<std::size_t>(std::lower_bound(weights.begin(), weights.end(), w) - weights.begin())];
  };

  if (spec.vary == Vary::Weight) {
    // The obstacle layout is the base scene's for every weight and trial, so
    // each weight is planned once and shared by its trials.
    std::vector<detail::PlanOutcome> outcomes(weights.size());
    parallel_for(weights.size(), workers, [&](std::size_t i) {
      Scene s = spec.base;
      s.weight = weights[i];
      outcomes[i] = s.obstacles.empty() ? detail::PlanOutcome{free_plans[i], "ok"} : detail::try_plan(s, opts);
    });
    for (TrendRow& row : table.rows) {
      const std::size_t i =
          static_cast<std::size_t>(std::lower_bound(weights.begin(), weights.end(), row.value) - weights.begin());
      Scene s = spec.base;
      s.weight = row.value;
      detail::fill_metrics(row, outcomes[i], free_plans[i], s);
    }
    return table;
  }

  parallel_for(table.rows.size(), workers, [&](std::size_t i) {
    TrendRow& row = table.rows[i];
    Scene s;
    try {
      if (spec.vary == Vary::ObstacleCount) {
        s = random_scene(spec.base, static_cast<int>(row.value), spec.radius_range, row.seed);
      } else {
        s = random_scene(spec.base, spec.obstacle_count, {row.value, row.value}, row.seed);
      }
    } catch (const PlacementFailed&) {
      row.status = "PlacementFailed";
      return;
    }
    detail::fill_metrics(row, detail::try_plan(s, opts), free_plan(s.weight), s);
  });
  return table;
}

/// Shortest decimal that reads back to the same double; "nan" for NaN.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& out, const TrendTable& table) {
  out << "value,trial,seed,E,t_ftot,A_tot,A_rel,status\n";
  for (const TrendRow& r : table.rows) {
    out << format_number(r.value) << ',' << r.trial << ',' << r.seed << ',' << format_number(r.energy) << ','
        << format_number(r.time) << ',' << format_number(r.area) << ',' << format_number(r.ratio) << ',' << r.status
        << '\n';
  }
}

/// Per-value mean of a column over successful trials, in value order.
template <class Field>
std::vector<std::pair<double, double>> column_means(const TrendTable& table, Field field) {
  std::map<double, std::pair<double, int>> acc;
  for (const TrendRow& r : table.rows) {
    if (!r.ok()) continue;
    auto& a = acc[r.value];
    a.first += field(r);
    ++a.second;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [v, a] : acc) out.emplace_back(v, a.first / a.second);
  return out;
}

}  // namespace sweepopt
