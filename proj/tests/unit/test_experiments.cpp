#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughflow/circle_maps.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/experiments.hpp"

using namespace roughflow;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("roughflow_" + name);
}

}  // namespace

TEST(TwoSubsequence, SmallRunConvergesToEachTarget) {
  TwoSubsequenceConfig config;
  config.eps_list = {0.4, 0.2, 0.1};
  config.samples = 400;
  config.time_steps = 10;
  const auto report = run_two_subsequence(config);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].theta_target, kPi);
  EXPECT_EQ(report.rows[1].theta_target, kPi / 2);
  EXPECT_EQ(report.rows[2].theta_target, kPi);
  EXPECT_LT(report.rows[2].distance_to_target, report.rows[0].distance_to_target);
  for (const auto& row : report.rows) {
    EXPECT_GE(row.distance_to_target, 0.0);
    EXPECT_GT(row.distance_to_other, row.distance_to_target);
  }
  EXPECT_GT(report.limit_separation, 0.5);
  EXPECT_TRUE(report.limits_separated.has_value());
  const nlohmann::json j = report;
  EXPECT_EQ(j.at("rows").size(), 3u);
}

TEST(TwoSubsequence, SingleLimitDegenerateCase) {
  TwoSubsequenceConfig config;
  config.eps_list = {0.4, 0.2};
  config.theta = config.phi = kPi;
  config.samples = 300;
  config.time_steps = 10;
  const auto report = run_two_subsequence(config);
  EXPECT_FALSE(report.limits_separated.has_value());
  EXPECT_EQ(report.limit_separation, 0.0);
  EXPECT_LT(report.rows[1].distance_to_other, report.rows[0].distance_to_other);
}

TEST(TwoSubsequence, SingleRowHasNoMonotonicityClaim) {
  TwoSubsequenceConfig config;
  config.eps_list = {0.2};
  config.samples = 200;
  config.time_steps = 5;
  const auto report = run_two_subsequence(config);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_TRUE(report.even_decreasing);
  EXPECT_TRUE(report.odd_decreasing);
}

TEST(TwoSubsequence, RejectsBadConfig) {
  TwoSubsequenceConfig config;
  config.eps_list = {0.1, 0.2};
  EXPECT_ANY_THROW((void)run_two_subsequence(config));
  config.eps_list = {};
  EXPECT_ANY_THROW((void)run_two_subsequence(config));
}

TEST(TwoSubsequence, Reproducible) {
  TwoSubsequenceConfig config;
  config.eps_list = {0.4, 0.2};
  config.samples = 200;
  config.time_steps = 5;
  config.seed = 9;
  const nlohmann::json a = run_two_subsequence(config);
  const nlohmann::json b = run_two_subsequence(config);
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Gallery, Verdicts) {
  GalleryConfig config;
  config.samples = 200000;
  const auto report = run_psi_gallery(config);
  ASSERT_EQ(report.entries.size(), 3u);
  for (const auto& e : report.entries) {
    EXPECT_TRUE(e.measure_preserving) << e.map;
    EXPECT_FALSE(e.jacobians.empty());
  }
  EXPECT_LE(report.psi2_gap, 1e-10);
  EXPECT_EQ(report.rotation_coincidences, 0u);
  EXPECT_GT(report.rotation_pairs_tested, 0u);
  EXPECT_NEAR(report.rotation_det_t0_min, 1.0, 0.01);
  EXPECT_NEAR(report.rotation_det_t0_max, 1.0, 0.01);
  EXPECT_GT(report.rotation_det_min, 0.0);
  EXPECT_GT(report.psi1_det_min_lower_half, 0.0);
  EXPECT_LT(report.psi1_det_max_upper_half, 0.0);
}

TEST(Interpolant, MapPieces) {
  const InterpolantMap map(CircleMap::psi1(), 0.2);
  const Point3 p{0.3, -0.4, 0.8};
  EXPECT_NEAR(map.bridge_start(p), (0.64 - 0.04) / 4, 1e-15);
  EXPECT_NEAR(map.bridge_end(p), (0.64 + 0.04) / 4, 1e-15);
  const auto& limit = map.limit_flow();
  // Before the bridge the interpolant is the analytic flow itself.
  for (double t = 0.0; t < map.bridge_start(p); t += 0.01) EXPECT_EQ(map(t, p), flow_eval(limit, t, p));
  // The bridge target is the limit flow at the end of the window.
  EXPECT_LT(distance(map.bridge_target(p), flow_eval(limit, map.bridge_end(p), p)), 1e-14);
  EXPECT_NEAR(map.bridge_target(p).z, -0.2, 1e-15);
  // Continuous at both ends of the window.
  EXPECT_LT(distance(map(map.bridge_start(p), p), flow_eval(limit, map.bridge_start(p), p)), 1e-14);
  EXPECT_LT(distance(map(map.bridge_end(p), p), map.bridge_target(p)), 1e-14);
  EXPECT_ANY_THROW(InterpolantMap(CircleMap::psi1(), 0.0));
  EXPECT_ANY_THROW((void)map(0.1, Point3{0.0, 0.0, 0.1}));
}

TEST(Interpolant, DemoPasses) {
  InterpolantConfig config;
  config.samples = 2000;
  config.time_steps = 50;
  const auto report = run_interpolant_demo(config);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_TRUE(report.distances_decreasing);
  EXPECT_TRUE(report.segments_exact);
  EXPECT_TRUE(report.witnesses_found);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.pre_bridge_mismatch, 0.0);
    EXPECT_EQ(row.post_bridge_mismatch, 0.0);
    EXPECT_TRUE(row.witness.found);
    EXPECT_LE(row.witness.position_gap, 1e-12);
    EXPECT_GT(row.witness.velocity_gap, 1e-6);
  }
}

TEST(Figures, Fig1IsMonotoneInHeight) {
  const auto path = temp_path("fig1.csv");
  const auto report = emit_figure_data(Figure::Fig1, path, 500);
  EXPECT_EQ(report.rows, 500u);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,t,x,y,z");
  std::size_t rows = 0;
  double prev_z = 2.0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 5u);
    EXPECT_LT(v[4], prev_z);
    prev_z = v[4];
    ++rows;
  }
  EXPECT_EQ(rows, 500u);
  std::filesystem::remove(path);
}

TEST(Figures, Fig2ReportsWinding) {
  const auto path = temp_path("fig2.csv");
  const auto report = emit_figure_data(Figure::Fig2, path, 200);
  EXPECT_EQ(report.rows, 200u);
  ASSERT_TRUE(report.winding.has_value());
  // The helix turns by the target angle pi while crossing the core.
  EXPECT_NEAR(*report.winding, 0.5, 0.05);
  std::filesystem::remove(path);
}
