#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/analytic_flows.hpp"

namespace roughflow {

/// A slice {x^2 + y^2 <= |z|, z in [z_lo, z_hi]} of P+ (sign = +1) or
/// P- (sign = -1). z_lo < z_hi are signed coordinates.
struct RegionSpec {
  int sign = +1;
  double z_lo = 0.5;
  double z_hi = 1.0;

  /// Default reference region: P+ slice z in [0.5, 1].
  [[nodiscard]] static RegionSpec reference() { return {}; }
  void validate() const;
  [[nodiscard]] double volume() const;
};

void to_json(nlohmann::json& j, const RegionSpec& r);

/// n points, uniform for Lebesgue measure on the slice; every point
/// satisfies x^2 + y^2 <= |z| exactly. Deterministic in seed.
[[nodiscard]] std::vector<Point3> sample_paraboloid(const RegionSpec& region,
                                                    std::size_t n,
                                                    std::uint64_t seed);

/// Outcome of a push-forward density check. Counts are modelled as Poisson,
/// so a measure-preserving flow gives compression_L within
/// 1 +- tolerance (5 sigma) up to partially covered cells.
struct MeasureReport {
  double compression_L = 0.0;
  double cell_size = 0.0;
  std::uint64_t sample_count = 0;
  double max_cell_ratio = 0.0;
  double time = 0.0;
  std::uint64_t occupied_cells = 0;
  double expected_per_cell = 0.0;
  /// 1 / sqrt(expected_per_cell).
  double relative_sigma = 0.0;
  /// 5 * relative_sigma.
  double tolerance = 0.0;
};

void to_json(nlohmann::json& j, const MeasureReport& r);

/// Pushes uniform samples of region through flow(t, .), bins the images into
/// cubes of side grid_cell and returns the largest ratio of observed to
/// expected uniform count. Throws InsufficientResolutionError when fewer
/// than 10 cells are occupied.
[[nodiscard]] MeasureReport compression_constant(const FlowMap& flow,
                                                 const RegionSpec& region,
                                                 double t, double grid_cell,
                                                 std::size_t samples,
                                                 std::uint64_t seed);

/// Mean |A(t, p) - B(t, p)| over the given points, for each time.
[[nodiscard]] std::vector<double> l1_distance_profile(
    const FlowMap& a, const FlowMap& b, std::span<const Point3> points,
    std::span<const double> times);

/// Sup over times of the Monte-Carlo L1 distance of two flow maps on region.
[[nodiscard]] double l1_flow_distance(const FlowMap& a, const FlowMap& b,
                                      const RegionSpec& region,
                                      std::span<const double> times,
                                      std::size_t samples, std::uint64_t seed);

/// Appends `experiment,eps,theta,t_max,distance` (with header on a new file).
void append_experiment_log(const std::filesystem::path& path,
                           const std::string& experiment, double eps,
                           double theta, double t_max, double distance);

}  // namespace roughflow
