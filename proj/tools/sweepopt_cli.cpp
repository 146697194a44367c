// sweepopt: command-line front end.
//
//   sweepopt direction <scene>
//   sweepopt plan <scene> [--out plan.json] [--svg field.svg] [--metrics metrics.csv]
//   sweepopt experiment <scene> --vary weight|n-obs|r-obs --values a,b,c [--trials k]
//                              [--seed s] --out table.csv [--json-out table.json]
//   sweepopt verify <scene>
//
// Exit codes: 0 success, 1 failed verify check, 2 infeasible plan, 3 input error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scene_io.hpp"
#include "sweepopt/experiments.hpp"
#include "sweepopt/metrics.hpp"
#include "sweepopt/oracle.hpp"
#include "sweepopt/planner.hpp"
#include "sweepopt/transversality.hpp"

namespace {

using namespace sweepopt;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInput = 3;

constexpr double kPi = 3.14159265358979323846;

struct Options {
  std::string scene;
  bool json_out = false;
  std::string out, svg, metrics, json_table;
  std::string vary;
  std::vector<double> values;
  int trials = 5;
  std::optional<std::uint64_t> seed;
  double r_min = 0.05, r_max = 0.3;
  int n_obs = 10;
};

int run_direction(const Options& o) {
  const Scene s = io::load_scene(o.scene);
  const SweepChoice c = optimal_sweep_direction(s.workspace, s.obstacles);
  const double deg = c.direction.theta() * 180.0 / kPi;
  if (o.json_out) {
    std::cout << json{{"theta", c.direction.theta()}, {"theta_deg", deg}, {"msa_cost", c.cost}}.dump(2) << "\n";
  } else {
    std::printf("theta* = %.6f rad (%.4f deg), S(theta*) = %.6f\n", c.direction.theta(), deg, c.cost);
  }
  return kExitOk;
}

int run_plan(const Options& o) {
  const Scene s = io::load_scene(o.scene);
  const CoveragePlan plan = plan_coverage(s);
  const json doc = io::plan_to_json(plan, s);
  if (!o.out.empty()) io::write_text(o.out, doc.dump(2) + "\n");
  if (!o.svg.empty()) io::render_svg(plan, s, o.svg);
  if (!o.metrics.empty()) io::write_text(o.metrics, io::plan_metrics_csv(plan, s));
  if (o.json_out) {
    json summary = doc;
    summary.erase("slices");
    std::cout << summary.dump(2) << "\n";
  } else {
    std::printf("slices %d (corridor expanded: %d), theta* %.6f rad\n", plan.n_turn, plan.expanded_count(),
                plan.sweep.theta());
    std::printf("E %.6f  t_ftot %.6f  C %.6f  L %.6f  A_tot %.4f\n", doc["total_energy"].get<double>(),
                doc["total_time"].get<double>(), plan.total_cost, doc["total_path_length"].get<double>(),
                doc["covered_area"].get<double>());
  }
  return kExitOk;
}

Vary parse_vary(const std::string& v) {
  if (v == "weight") return Vary::Weight;
  if (v == "n-obs") return Vary::ObstacleCount;
  if (v == "r-obs") return Vary::ObstacleRadius;
  throw ValidationError("--vary must be weight, n-obs or r-obs");
}

int run_experiment(const Options& o) {
  ScenarioSpec spec;
  spec.base = io::load_scene(o.scene);
  spec.vary = parse_vary(o.vary);
  spec.values = o.values;
  spec.trials_per_value = o.trials;
  spec.seed = o.seed.value_or(spec.base.seed.value_or(0));
  spec.radius_range = {o.r_min, o.r_max};
  spec.obstacle_count = o.n_obs;
  const TrendTable table = parameter_sweep(spec);

  std::ostringstream csv;
  write_csv(csv, table);
  io::write_text(o.out, csv.str());
  const json doc = io::table_to_json(table, spec);
  if (!o.json_table.empty()) io::write_text(o.json_table, doc.dump(2) + "\n");

  std::map<std::string, int> statuses;
  for (const auto& r : table.rows) ++statuses[r.status];
  if (o.json_out) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%zu rows written to %s\n", table.rows.size(), o.out.c_str());
    for (const auto& [status, n] : statuses) std::printf("  %s: %d\n", status.c_str(), n);
  }
  // The table is written either way; the exit code flags failed trials.
  if (statuses.count("PlacementFailed")) return kExitInput;
  if (statuses.size() > 1 || !statuses.count("ok")) return kExitInfeasible;
  return kExitOk;
}

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

int run_verify(const Options& o) {
  const Scene s = io::load_scene(o.scene);
  const CoveragePlan plan = plan_coverage(s);
  const LglGrid grid(s.nodes_per_slice);

  double node_clear = INFINITY, dense_clear = INFINITY, defect = 0.0, oracle_err = 0.0, transv = 0.0;
  int free_slices = 0;
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Trajectory& t = plan.slices[k];
    const Eigen::MatrixXd dense = dense_states(t, grid);
    for (const auto& ob : s.obstacles) {
      for (Eigen::Index j = 0; j < t.states.rows(); ++j) {
        node_clear = std::min(node_clear, distance({t.states(j, 0), t.states(j, 1)}, ob.center) - ob.radius);
      }
      for (Eigen::Index j = 0; j < dense.rows(); ++j) {
        dense_clear = std::min(dense_clear, distance({dense(j, 0), dense(j, 1)}, ob.center) - ob.radius);
      }
    }
    const SliceNlp nlp = transcribe(plan.problems[k], grid);
    defect = std::max(defect, constraint_violation(nlp, pack(plan.local_slices[k])));
    if (plan.problems[k].obstacles.empty() && plan.problems[k].chord_length() > 0.0) {
      ++free_slices;
      const auto opt = analytic_rest_to_rest(plan.problems[k].chord_length(), nlp.weight());
      oracle_err = std::max({oracle_err, std::abs(t.t_f / opt.t_f_star - 1.0), std::abs(t.energy / opt.energy_star - 1.0)});
    }
    transv = std::max(transv, transversality_check(s, static_cast<int>(k), t, 0.05));
  }
  if (s.obstacles.empty()) node_clear = dense_clear = 0.0;

  const std::vector<Check> checks{
      {"obstacle clearance at nodes", node_clear >= -1e-6, node_clear, -1e-6},
      {"obstacle clearance at dense samples", dense_clear >= -1e-3, dense_clear, -1e-3},
      {"defect and bound residuals", defect <= kExtractTolerance, defect, kExtractTolerance},
      {"oracle match on obstacle-free slices", oracle_err <= 1e-3, oracle_err, 1e-3},
      {"transversality residual", transv <= 1e-4, transv, 1e-4},
  };
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  if (o.json_out) {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
    std::cout << json{{"slices", plan.n_turn}, {"obstacle_free_slices", free_slices}, {"checks", arr}, {"pass", all}}.dump(2)
              << "\n";
  } else {
    for (const auto& c : checks) {
      std::printf("%s %-40s %.3e (limit %.0e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
    }
  }
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-time optimal sweep coverage planner"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json_out, "Write machine-readable JSON to stdout");

  auto* direction = app.add_subcommand("direction", "Print the sweep direction minimizing the sum of altitudes");
  direction->add_option("scene", o.scene, "Scene file")->required();

  auto* plan = app.add_subcommand("plan", "Plan a full coverage path");
  plan->add_option("scene", o.scene, "Scene file")->required();
  plan->add_option("--out", o.out, "Plan JSON");
  plan->add_option("--svg", o.svg, "SVG rendering");
  plan->add_option("--metrics", o.metrics, "Per-slice metrics CSV");

  auto* experiment = app.add_subcommand("experiment", "Run a parameter study");
  experiment->add_option("scene", o.scene, "Base scene file")->required();
  experiment->add_option("--vary", o.vary, "weight, n-obs or r-obs")->required();
  experiment->add_option("--values", o.values, "Comma-separated values")->required()->delimiter(',');
  experiment->add_option("--trials", o.trials, "Trials per value")->capture_default_str();
  experiment->add_option("--seed", o.seed, "Seed (default: the scene's, else 0)");
  experiment->add_option("--out", o.out, "Table CSV")->required();
  experiment->add_option("--json-out", o.json_table, "Table JSON");
  experiment->add_option("--r-min", o.r_min, "Smallest obstacle radius (n-obs)")->capture_default_str();
  experiment->add_option("--r-max", o.r_max, "Largest obstacle radius (n-obs)")->capture_default_str();
  experiment->add_option("--n-obs", o.n_obs, "Obstacles per scene (r-obs)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Plan and run the invariant checks");
  verify->add_option("scene", o.scene, "Scene file")->required();

  for (auto* sub : {direction, plan, experiment, verify}) sub->add_flag("--json", o.json_out, "JSON to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (direction->parsed()) return run_direction(o);
    if (plan->parsed()) return run_plan(o);
    if (experiment->parsed()) return run_experiment(o);
    return run_verify(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PlacementFailed& e) {
    std::cerr << "placement failed: " << e.what() << "\n";
    return kExitInput;
  } catch (const BlockedEndpoint& e) {
    std::cerr << "blocked endpoint: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const SliceInfeasible& e) {
    std::cerr << "slice infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
}
