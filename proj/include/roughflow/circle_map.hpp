#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "roughflow/geometry.hpp"

namespace roughflow {

/// A measurable map [0, 2pi] -> [0, 2pi), the circle identified with
/// R / 2piZ. Values are always reduced mod 2pi.
class CircleMap {
 public:
  struct Rotation {
    double theta;
  };
  /// Identity on [0, pi), theta -> 3pi - theta on [pi, 2pi].
  struct Psi1 {};
  /// theta -> 2 theta on [0, pi), 2 (theta - pi) on [pi, 2pi].
  struct Psi2 {};
  struct Constant {
    double alpha;
  };
  /// Values on the uniform grid theta_k = 2pi k / n, linearly interpolated
  /// along the shorter arc between neighbouring values, with circular wrap.
  struct Sampled {
    std::shared_ptr<const std::vector<double>> table;
  };
  using Kind = std::variant<Rotation, Psi1, Psi2, Constant, Sampled>;

  static constexpr std::size_t kDefaultGridSize = 4096;

  static CircleMap rotation(double theta);
  static CircleMap identity() { return rotation(0.0); }
  static CircleMap psi1();
  static CircleMap psi2();
  static CircleMap constant(double alpha);
  static CircleMap sampled(std::vector<double> table);

  /// Input in [0, 2pi] is used as is (so 2pi is distinct from 0 for maps
  /// that are discontinuous there); other inputs are reduced mod 2pi first.
  [[nodiscard]] double operator()(double theta) const;

  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] std::string name() const;

  /// Known to be a bijection (up to null sets).
  [[nodiscard]] bool invertible() const;
  /// Present exactly when invertible().
  [[nodiscard]] std::optional<CircleMap> inverse() const;

  /// Angles where the map fails to be smooth as a circle map. Finite
  /// difference stencils must not straddle any of them.
  [[nodiscard]] std::vector<double> breakpoints() const;

  /// Grid angle theta_k = 2pi k / n.
  [[nodiscard]] static double grid_angle(std::size_t k, std::size_t n);

 private:
  explicit CircleMap(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Tabulates any map on the uniform n-point grid.
[[nodiscard]] CircleMap tabulate(const CircleMap& map,
                                 std::size_t n = CircleMap::kDefaultGridSize);

}  // namespace roughflow
