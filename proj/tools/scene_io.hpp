#pragma once

// JSON scene files, plan/table emission and SVG rendering for the CLI.
//
// Scene file:
//   {"workspace": [[x, y], ...], "obstacles": [{"x": .., "y": .., "r": ..}],
//    "robot": {"radius": ..}, "weight": .., "nodes_per_slice": .., "seed": ..}
// Only "workspace" is required; the rest default to no obstacles, radius 0.1,
// weight 0.5, 20 nodes and no seed.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sweepopt/errors.hpp"
#include "sweepopt/experiments.hpp"
#include "sweepopt/metrics.hpp"
#include "sweepopt/planner.hpp"

namespace sweepopt::io {

using json = nlohmann::json;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path);
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown key \"" + key + "\" in " + where);
  }
}

inline double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ValidationError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
  return x;
}

inline json point(Point2 p) { return json::array({p.x, p.y}); }

}  // namespace detail

inline Scene scene_from_json(const json& doc) {
  detail::only_keys(doc, {"workspace", "obstacles", "robot", "weight", "nodes_per_slice", "seed"}, "scene");
  Scene s;
  if (!doc.contains("workspace") || !doc["workspace"].is_array()) {
    throw ValidationError("workspace must be an array of [x, y] points");
  }
  for (const auto& v : doc["workspace"]) {
    if (!v.is_array() || v.size() != 2) throw ValidationError("workspace vertices must be [x, y] pairs");
    s.workspace.vertices.push_back({detail::number(v[0], "workspace x"), detail::number(v[1], "workspace y")});
  }
  if (doc.contains("obstacles")) {
    if (!doc["obstacles"].is_array()) throw ValidationError("obstacles must be an array");
    for (const auto& o : doc["obstacles"]) {
      detail::only_keys(o, {"x", "y", "r"}, "obstacle");
      if (!o.contains("x") || !o.contains("y") || !o.contains("r")) throw ValidationError("obstacle needs x, y and r");
      s.obstacles.push_back(
          {{detail::number(o["x"], "obstacle x"), detail::number(o["y"], "obstacle y")}, detail::number(o["r"], "obstacle r")});
    }
  }
  if (doc.contains("robot")) {
    detail::only_keys(doc["robot"], {"radius"}, "robot");
    if (doc["robot"].contains("radius")) s.robot.coverage_radius = detail::number(doc["robot"]["radius"], "robot radius");
  }
  if (doc.contains("weight")) s.weight = detail::number(doc["weight"], "weight");
  if (doc.contains("nodes_per_slice")) {
    const json& n = doc["nodes_per_slice"];
    if (!n.is_number_integer()) throw ValidationError("nodes_per_slice must be an integer");
    s.nodes_per_slice = n.get<int>();
  }
  if (doc.contains("seed")) {
    const json& n = doc["seed"];
    if (!n.is_number_unsigned()) throw ValidationError("seed must be a non-negative integer");
    s.seed = n.get<std::uint64_t>();
  }
  validate_scene(s);
  return s;
}

inline Scene parse_scene(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  } catch (const json::out_of_range&) {
    throw ValidationError("numbers must be finite");  // e.g. 1e999
  }
  return scene_from_json(doc);
}

inline Scene load_scene(const std::string& path) { return parse_scene(detail::read_file(path)); }

inline json scene_to_json(const Scene& s) {
  json doc;
  doc["workspace"] = json::array();
  for (const auto& v : s.workspace.vertices) doc["workspace"].push_back(detail::point(v));
  doc["obstacles"] = json::array();
  for (const auto& o : s.obstacles) doc["obstacles"].push_back({{"x", o.center.x}, {"y", o.center.y}, {"r", o.radius}});
  doc["robot"] = {{"radius", s.robot.coverage_radius}};
  doc["weight"] = s.weight;
  doc["nodes_per_slice"] = s.nodes_per_slice;
  if (s.seed) doc["seed"] = *s.seed;
  return doc;
}

inline void save_scene(const Scene& s, const std::string& path) { detail::write_file(path, scene_to_json(s).dump(2) + "\n"); }

inline json trajectory_to_json(const Trajectory& t) {
  json states = json::array(), controls = json::array();
  for (Eigen::Index j = 0; j < t.states.rows(); ++j) {
    states.push_back({t.states(j, 0), t.states(j, 1), t.states(j, 2), t.states(j, 3)});
    controls.push_back({t.controls(j, 0), t.controls(j, 1)});
  }
  return {{"t_f", t.t_f},
          {"energy", t.energy},
          {"cost", t.cost()},
          {"times", std::vector<double>(t.times.data(), t.times.data() + t.times.size())},
          {"states", states},
          {"controls", controls}};
}

inline json plan_to_json(const CoveragePlan& plan, const Scene& scene) {
  json slices = json::array();
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    json s = trajectory_to_json(plan.slices[k]);
    s["index"] = k;
    s["flag"] = to_string(plan.flags[k]);
    s["status"] = to_string(plan.statuses[k]);
    s["length"] = path_length(plan.slices[k]);
    slices.push_back(std::move(s));
  }
  return {{"scene", scene_to_json(scene)},
          {"sweep_theta", plan.sweep.theta()},
          {"n_turn", plan.n_turn},
          {"total_energy", total_energy(plan)},
          {"total_time", total_time(plan)},
          {"total_cost", plan.total_cost},
          {"total_path_length", total_path_length(plan)},
          {"covered_area", covered_area(plan, scene)},
          {"corridor_expanded", plan.expanded_count()},
          {"slices", slices}};
}

/// Per-slice CSV with cumulative columns for the linear-growth plots.
inline std::string plan_metrics_csv(const CoveragePlan& plan, const Scene& scene) {
  std::ostringstream out;
  out << "slice,flag,t_f,E,L,E_cum,t_cum,A_cum\n";
  const auto area = cumulative_covered_area(plan, scene, default_cell(scene));
  double e_cum = 0.0, t_cum = 0.0;
  for (std::size_t k = 0; k < plan.slices.size(); ++k) {
    const Trajectory& t = plan.slices[k];
    const double e = slice_energy(t);
    e_cum += e;
    t_cum += t.t_f;
    out << k << ',' << to_string(plan.flags[k]) << ',' << format_number(t.t_f) << ',' << format_number(e) << ','
        << format_number(path_length(t)) << ',' << format_number(e_cum) << ',' << format_number(t_cum) << ','
        << format_number(area[k]) << '\n';
  }
  return out.str();
}

inline json table_to_json(const TrendTable& table, const ScenarioSpec& spec) {
  json rows = json::array();
  for (const TrendRow& r : table.rows) {
    const auto num = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
    rows.push_back({{"value", r.value},
                    {"trial", r.trial},
                    {"seed", r.seed},
                    {"E", num(r.energy)},
                    {"t_ftot", num(r.time)},
                    {"A_tot", num(r.area)},
                    {"A_rel", num(r.ratio)},
                    {"slices", r.slices},
                    {"corridor_expanded", r.expanded},
                    {"status", r.status}});
  }
  json header = {{"vary", to_string(spec.vary)},
                 {"values", spec.values},
                 {"trials_per_value", spec.trials_per_value},
                 {"seed", spec.seed}};
  if (spec.vary == Vary::ObstacleCount) header["radius_range"] = {spec.radius_range.first, spec.radius_range.second};
  if (spec.vary == Vary::ObstacleRadius) header["obstacle_count"] = spec.obstacle_count;
  return {{"spec", header}, {"rows", rows}};
}

// SVG palette: nominal slices blue, corridor-expanded slices red, obstacles
// grey, covered band light blue at opacity 0.3.
inline constexpr const char* kNominalStroke = "#1f77b4";
inline constexpr const char* kExpandedStroke = "#d62728";
inline constexpr const char* kObstacleFill = "#7f7f7f";
inline constexpr const char* kBandStroke = "#9ecae1";

inline std::string svg_string(const CoveragePlan& plan, const Scene& scene) {
  Point2 lo = scene.workspace.vertices.front(), hi = lo;
  for (const auto& v : scene.workspace.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  const double pad = 0.05 * std::max(hi.x - lo.x, hi.y - lo.y);
  const double scale = 800.0 / std::max(hi.x - lo.x + 2 * pad, hi.y - lo.y + 2 * pad);
  const double width = (hi.x - lo.x + 2 * pad) * scale, height = (hi.y - lo.y + 2 * pad) * scale;
  const auto fmt = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return std::string(buf);
  };
  // Field y points up, SVG y points down.
  const auto px = [&](Point2 p) { return fmt((p.x - lo.x + pad) * scale) + "," + fmt((hi.y - p.y + pad) * scale); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::vector<std::string> lines;
  for (const auto& t : plan.slices) {
    const Eigen::MatrixXd dense = dense_states(t);
    std::string pts;
    for (Eigen::Index j = 0; j < dense.rows(); ++j) {
      if (j) pts += ' ';
      pts += px({dense(j, 0), dense(j, 1)});
    }
    lines.push_back(pts);
  }
  out << "<g fill=\"none\" stroke=\"" << kBandStroke << "\" stroke-opacity=\"0.3\" stroke-width=\""
      << fmt(2 * scene.robot.coverage_radius * scale) << "\" stroke-linecap=\"round\">\n";
  for (const auto& pts : lines) out << "<polyline points=\"" << pts << "\"/>\n";
  out << "</g>\n";

  out << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < scene.workspace.size(); ++i) out << (i ? " " : "") << px(scene.workspace.vertices[i]);
  out << "\"/>\n";

  out << "<g fill=\"" << kObstacleFill << "\">\n";
  for (const auto& o : scene.obstacles) {
    const std::string c = px(o.center);
    const auto comma = c.find(',');
    out << "<circle cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1) << "\" r=\""
        << fmt(o.radius * scale) << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g fill=\"none\" stroke-width=\"1\">\n";
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const bool expanded = k < plan.flags.size() && plan.flags[k] == SliceFlag::CorridorExpanded;
    out << "<polyline stroke=\"" << (expanded ? kExpandedStroke : kNominalStroke) << "\" points=\"" << lines[k]
        << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

inline void render_svg(const CoveragePlan& plan, const Scene& scene, const std::string& path) {
  detail::write_file(path, svg_string(plan, scene));
}

inline void write_text(const std::string& path, const std::string& text) { detail::write_file(path, text); }

}  // namespace sweepopt::io
