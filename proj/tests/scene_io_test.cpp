#include "scene_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace sweepopt {
namespace {

const std::string kScenes = SWEEPOPT_SCENES_DIR;

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string message_of(const std::string& text) {
  try {
    io::parse_scene(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadScene, FixtureWithObstacles) {
  const Scene s = io::load_scene(kScenes + "/three_obstacles.json");
  EXPECT_EQ(s.obstacles.size(), 3u);
  EXPECT_EQ(s.workspace.size(), 4u);
  EXPECT_EQ(s.robot.coverage_radius, 0.1);
  EXPECT_FALSE(s.seed);
}

TEST(LoadScene, DefaultsForOptionalKeys) {
  const Scene s = io::parse_scene(R"({"workspace": [[0,0],[4,0],[4,4],[0,4]]})");
  EXPECT_TRUE(s.obstacles.empty());
  EXPECT_EQ(s.robot.coverage_radius, 0.1);
  EXPECT_EQ(s.weight, 0.5);
  EXPECT_EQ(s.nodes_per_slice, 20);
}

TEST(LoadScene, RoundTripIsExact) {
  Scene base;
  base.workspace = Polygon{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  base.weight = 0.37;
  base.nodes_per_slice = 17;
  const Scene s = random_scene(base, 10, {0.1, 0.3}, 42);
  const auto path = std::filesystem::temp_directory_path() / "sweepopt_round_trip.json";
  io::save_scene(s, path.string());
  const Scene back = io::load_scene(path.string());
  ASSERT_EQ(back.obstacles.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(back.obstacles[i].center.x, s.obstacles[i].center.x);
    EXPECT_EQ(back.obstacles[i].center.y, s.obstacles[i].center.y);
    EXPECT_EQ(back.obstacles[i].radius, s.obstacles[i].radius);
  }
  EXPECT_EQ(back.weight, s.weight);
  EXPECT_EQ(back.nodes_per_slice, 17);
  EXPECT_EQ(back.seed, std::optional<std::uint64_t>(42));
  EXPECT_EQ(io::scene_to_json(back), io::scene_to_json(s));
  std::filesystem::remove(path);
}

TEST(LoadScene, ValidationMessages) {
  EXPECT_THROW(io::load_scene(kScenes + "/bad_weight.json"), ValidationError);
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[10,0],[10,10],[0,10]], "weight": 1.5})"), "weight out of range");
  try {
    io::load_scene(kScenes + "/overlapping.json");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "obstacle 3 intersects obstacle 5");
  }
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[1,0],[1,1],[0,1]], "extra": 1})"), "unknown key \"extra\" in scene");
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[1,0],[1,1],[0,1]], "obstacles": [{"x": 0.5, "y": 0.5, "r": 0.1, "z": 0}]})"),
            "unknown key \"z\" in obstacle");
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[1,0],[1,1],[0,1]], "weight": 1e999})"), "numbers must be finite");
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[1,0],[1,1],[0,1]], "nodes_per_slice": 2.5})"),
            "nodes_per_slice must be an integer");
  EXPECT_EQ(message_of(R"({"workspace": [[0,0],[1,0],[1,1],[0,1]], "robot": {"radius": 0.6}})"),
            "robot coverage width exceeds the workspace extent");
  EXPECT_EQ(message_of(R"({"obstacles": []})"), "workspace must be an array of [x, y] points");
}

TEST(LoadScene, ParseErrorsCarryPosition) {
  try {
    io::load_scene(kScenes + "/malformed.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 4, column ", 0), 0u) << e.what();
  }
  EXPECT_EQ(message_of("{\n  \"workspace\": [[0,0],\n  ]\n}"), "line 3, column 3: malformed JSON");
  EXPECT_THROW(io::load_scene(kScenes + "/does_not_exist.json"), IoError);
}

TEST(RenderSvg, ObstacleFreePlanHasFiftyPaths) {
  Scene s;
  s.workspace = Polygon{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
  const CoveragePlan plan = plan_coverage(s);
  const std::string svg = io::svg_string(plan, s);
  EXPECT_EQ(count(svg, "<polyline stroke=\"#1f77b4\""), 50u);
  EXPECT_EQ(count(svg, "<polyline stroke=\"#d62728\""), 0u);
  EXPECT_EQ(count(svg, "stroke-opacity=\"0.3\""), 1u);
  EXPECT_EQ(svg, io::svg_string(plan, s));
}

TEST(RenderSvg, EmptyPlanShowsFieldAndObstacles) {
  const Scene s = io::load_scene(kScenes + "/three_obstacles.json");
  const std::string svg = io::svg_string(CoveragePlan{}, s);
  EXPECT_EQ(count(svg, "<polyline"), 0u);
  EXPECT_EQ(count(svg, "<circle"), 3u);
  EXPECT_EQ(count(svg, "<polygon"), 1u);
}

TEST(RenderSvg, ExpandedSlicesUseTheirOwnColor) {
  Scene s;
  s.workspace = Polygon{{{0, 0}, {3, 0}, {3, 3}, {0, 3}}};
  s.obstacles = {{{1.5, 1.5}, 0.2}};
  const CoveragePlan plan = plan_coverage(s);
  ASSERT_GT(plan.expanded_count(), 0);
  const std::string svg = io::svg_string(plan, s);
  EXPECT_EQ(count(svg, "<polyline stroke=\"#d62728\""), static_cast<std::size_t>(plan.expanded_count()));
  EXPECT_EQ(count(svg, "<polyline stroke=\"#1f77b4\""), plan.slices.size() - plan.expanded_count());
}

TEST(RenderSvg, UnwritablePath) {
  Scene s;
  s.workspace = Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  EXPECT_THROW(io::render_svg(CoveragePlan{}, s, "/nonexistent-dir/x.svg"), IoError);
}

TEST(TableJson, FailedRowsHaveNullMetrics) {
  ScenarioSpec spec;
  spec.vary = Vary::ObstacleCount;
  spec.values = {3};
  TrendTable t;
  TrendRow r;
  r.value = 3;
  r.status = "PlacementFailed";
  t.rows = {r};
  const auto doc = io::table_to_json(t, spec);
  EXPECT_TRUE(doc["rows"][0]["E"].is_null());
  EXPECT_EQ(doc["spec"]["vary"], "n-obs");
  EXPECT_EQ(doc["spec"]["radius_range"][1], 0.3);
}

}  // namespace
}  // namespace sweepopt
