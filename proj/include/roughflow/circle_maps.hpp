#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/circle_map.hpp"

namespace roughflow {

enum class BuiltinMap { Rotation, Psi1, Psi2, Constant, Identity };

/// The exact-formula maps. `angle` is the rotation angle or the constant.
[[nodiscard]] CircleMap builtin(BuiltinMap kind, double angle = 0.0);
[[nodiscard]] BuiltinMap parse_builtin_map(std::string_view name);

/// I+(theta) = (cos theta, sin theta, 1), I-(theta) = (cos theta, sin theta, -1).
[[nodiscard]] Point3 lift_upper(double theta);
[[nodiscard]] Point3 lift_lower(double theta);

struct Histogram {
  std::size_t bin_count = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

/// Empirical push-forward of Lebesgue measure on [0, 2pi]: one jittered
/// point per stratum of width 2pi / samples. Deterministic in seed.
/// Requires bins >= 2 and samples >= bins.
[[nodiscard]] Histogram pushforward_histogram(const CircleMap& map,
                                              std::size_t bins,
                                              std::size_t samples,
                                              std::uint64_t seed);

/// Largest |count / expected - 1| over bins.
[[nodiscard]] double max_relative_deviation(const Histogram& h);

[[nodiscard]] bool is_measure_preserving(const CircleMap& map, std::size_t bins,
                                         std::size_t samples,
                                         std::uint64_t seed, double tol);

/// Recovers psi(theta) = I-^{-1}(X(1/2, I+(theta))) on the uniform grid.
/// Throws InconsistentFlowError when an image leaves the lower unit circle
/// by more than 1e-8.
[[nodiscard]] CircleMap extract_psi(const FlowMap& flow,
                                    std::size_t grid = CircleMap::kDefaultGridSize);

/// The flow X_psi whose continuation angle is psi(theta).
[[nodiscard]] FlowSpec build_flow_from_psi(const CircleMap& map);

struct AngleInterval {
  double lo;
  double hi;
};

struct ConeMeasure {
  /// 4 times the Monte-Carlo volume of the cone set over [-1, 0].
  double four_volume = 0.0;
  /// Total length of the angle set.
  double arc_length = 0.0;
  /// One standard error of four_volume.
  double std_error = 0.0;
};

/// Compares 4 L^3(E_cone) with L^1(E), where
/// E_cone = {(rho, theta, z): theta in E, rho in [0, sqrt|z|], z in [-1, 0]}.
/// Intervals must lie in [0, 2pi] and be pairwise disjoint.
[[nodiscard]] ConeMeasure cone_set_measure_check(
    const std::vector<AngleInterval>& angle_set, std::size_t samples,
    std::uint64_t seed);

/// Sampled-map CSV with header `theta,psi_theta`, one row per grid angle.
void write_circle_map_csv(std::ostream& out, const CircleMap& map,
                          std::size_t grid = CircleMap::kDefaultGridSize);
/// Reads a uniform-grid table; rows must be in grid order.
[[nodiscard]] CircleMap read_circle_map_csv(std::istream& in);

}  // namespace roughflow
