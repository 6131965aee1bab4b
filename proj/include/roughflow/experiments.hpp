#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/integrator.hpp"
#include "roughflow/measure.hpp"

namespace roughflow {

// ---------------------------------------------------------------------------
// Two-subsequence selection experiment
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  double eps = 0.0;
  double theta_target = 0.0;
  /// Sup-in-time L1 distance of the b_eps flow to the analytic X^target.
  double distance_to_target = 0.0;
  /// Same, against the analytic flow of the other subsequence.
  double distance_to_other = 0.0;
  std::size_t failures = 0;
};

struct TwoSubsequenceConfig {
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  double theta = kPi;
  double phi = kPi / 2.0;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  RegionSpec region = RegionSpec::reference();
  double horizon = 1.0;
  /// Distances are evaluated on time_steps + 1 evenly spaced times.
  std::size_t time_steps = 20;
  Rkf45 method{};
  double max_failure_rate = 0.01;
};

struct TwoSubsequenceReport {
  TwoSubsequenceConfig config;
  std::vector<ConvergenceRow> rows;
  /// L1 distance between the two analytic limits X^theta and X^phi.
  double limit_separation = 0.0;
  double worst_failure_rate = 0.0;
  /// Each subsequence's distance to its own target strictly decreases.
  bool even_decreasing = true;
  bool odd_decreasing = true;
  /// Finest distances are at most 0.1 * limit_separation; empty when
  /// theta == phi (a single limit).
  std::optional<bool> limits_separated;

  [[nodiscard]] bool passed() const {
    return even_decreasing && odd_decreasing && limits_separated.value_or(true);
  }
};

/// Row n uses b_eps with target theta for even n and phi for odd n.
/// Throws ExperimentError when a row's failure rate exceeds the limit.
[[nodiscard]] TwoSubsequenceReport run_two_subsequence(const TwoSubsequenceConfig& config);

void to_json(nlohmann::json& j, const TwoSubsequenceReport& r);

// ---------------------------------------------------------------------------
// Gallery of continuation maps
// ---------------------------------------------------------------------------

struct JacobianSample {
  double theta = 0.0;
  double t = 0.0;
  Point3 p{};
  double det = 0.0;
};

struct GalleryEntry {
  std::string map;
  bool measure_preserving = false;
  double histogram_deviation = 0.0;
  MeasureReport compression;
  std::vector<JacobianSample> jacobians;
};

struct GalleryReport {
  std::vector<GalleryEntry> entries;
  /// psi2 witness: theta and theta + pi reach the same point at t = 1/2.
  double psi2_theta = kPi / 4.0;
  double psi2_gap = 0.0;
  std::size_t psi2_pairs_tested = 0;
  std::size_t psi2_coincidences = 0;
  /// Injectivity search for X^theta at t = 1/2 and t = 1.
  std::size_t rotation_pairs_tested = 0;
  std::size_t rotation_coincidences = 0;
  double rotation_min_separation = 0.0;
  /// X^theta determinants: at t = 0 and at every tested (t, p).
  double rotation_det_t0_min = 0.0;
  double rotation_det_t0_max = 0.0;
  double rotation_det_min = 0.0;
  std::size_t rotation_det_samples = 0;
  /// psi1 determinants on theta in (0, pi) and in (pi, 2pi).
  double psi1_det_max_lower_half = 0.0;
  double psi1_det_min_upper_half = 0.0;
  double psi1_det_min_lower_half = 0.0;
  double psi1_det_max_upper_half = 0.0;
};

struct GalleryConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t histogram_bins = 32;
  double histogram_tol = 0.05;
  double compression_cell = 0.2;
  double compression_time = 0.5;
  std::size_t injectivity_pairs = 10000;
  double jacobian_step = 1e-5;
};

[[nodiscard]] GalleryReport run_psi_gallery(const GalleryConfig& config);

void to_json(nlohmann::json& j, const GalleryReport& r);

// ---------------------------------------------------------------------------
// Piecewise interpolant towards X_psi
// ---------------------------------------------------------------------------

/// Map that follows X_psi until the trajectory is at height eps, moves on a
/// straight segment to the mirrored point at height -eps with angle
/// psi(theta), and then follows the P- flow restarted from that point.
/// For t1 = (z^2 - eps^2)/4 and t2 = (z^2 + eps^2)/4 the segment is
/// traversed on [t1, t2]. It is a continuous map but not the flow of a
/// vector field when psi reverses orientation.
class InterpolantMap {
 public:
  InterpolantMap(CircleMap psi, double eps);

  /// Requires p in P+ with z^2 > eps^2; points outside P+ follow X_psi.
  [[nodiscard]] Point3 operator()(double t, const Point3& p) const;

  [[nodiscard]] double bridge_start(const Point3& p) const;
  [[nodiscard]] double bridge_end(const Point3& p) const;
  /// Bridge target at height -eps.
  [[nodiscard]] Point3 bridge_target(const Point3& p) const;
  [[nodiscard]] const FlowSpec& limit_flow() const { return limit_; }

 private:
  FlowSpec limit_;
  double eps_;
};

struct NonFlowWitness {
  bool found = false;
  Point3 first{};
  Point3 second{};
  double t = 0.0;
  Point3 meeting_point{};
  double position_gap = 0.0;
  double velocity_gap = 0.0;
};

struct InterpolantRow {
  double eps = 0.0;
  double distance_to_limit = 0.0;
  /// Largest |interpolant - X_psi| before t1 (0 means bitwise equal).
  double pre_bridge_mismatch = 0.0;
  /// Largest |interpolant - restarted P- flow| after t2.
  double post_bridge_mismatch = 0.0;
  /// Largest |interpolant - X_psi| after t2 (rounding only).
  double post_bridge_limit_gap = 0.0;
  NonFlowWitness witness;
};

struct InterpolantReport {
  std::vector<InterpolantRow> rows;
  bool distances_decreasing = true;
  bool segments_exact = true;
  bool witnesses_found = true;
  [[nodiscard]] bool passed() const {
    return distances_decreasing && segments_exact && witnesses_found;
  }
};

struct InterpolantConfig {
  std::vector<double> eps_list{0.4, 0.2, 0.1};
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  RegionSpec region = RegionSpec::reference();
  double horizon = 1.0;
  std::size_t time_steps = 200;
};

[[nodiscard]] InterpolantReport run_interpolant_demo(const InterpolantConfig& config);

void to_json(nlohmann::json& j, const InterpolantReport& r);

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

enum class Figure { Fig1, Fig2 };

struct FigureReport {
  std::filesystem::path path;
  std::size_t rows = 0;
  /// Net turns around the axis (fig2 only).
  std::optional<double> winding;
};

/// fig1: X^pi from (0.5, 0, 1) over [0, 1]. fig2: one b_eps trajectory
/// (eps = 0.1, target pi) from (0.3, 0, 0.5) over [0, 0.2]. One CSV row per
/// requested sample.
[[nodiscard]] FigureReport emit_figure_data(Figure which,
                                            const std::filesystem::path& out_path,
                                            std::size_t samples = 1000);

}  // namespace roughflow
