#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

namespace roughflow {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

/// A point of R^3 in Cartesian coordinates.
using Point3 = Vec3;
using Vector3 = Vec3;

[[nodiscard]] inline double norm(const Vec3& v) {
  return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
}
[[nodiscard]] inline double distance(const Vec3& a, const Vec3& b) {
  return norm(a - b);
}
[[nodiscard]] inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Cylindrical coordinates with r >= 0 and theta in [0, 2pi).
struct Cylindrical {
  double r = 0.0;
  double theta = 0.0;
  double z = 0.0;
};

/// Reduces an angle to [0, 2pi).
[[nodiscard]] double wrap_angle(double theta);

/// Distance on R / 2piZ, in [0, pi].
[[nodiscard]] double circular_distance(double a, double b);

/// theta is 0 on the axis, where it is otherwise undefined.
[[nodiscard]] Cylindrical to_cylindrical(const Point3& p);
[[nodiscard]] Point3 from_cylindrical(const Cylindrical& c);

/// Position of a point relative to P = P+ U P-, with
/// P+ = {x^2+y^2 <= z} and P- = {x^2+y^2 <= -z}.
enum class Region {
  PPlusInterior,
  PPlusBoundary,
  PMinusInterior,
  PMinusBoundary,
  Exterior,
  Origin,
};

[[nodiscard]] Region classify(const Point3& p);
[[nodiscard]] std::string_view to_string(Region region);

[[nodiscard]] inline bool in_p_plus(Region r) {
  return r == Region::PPlusInterior || r == Region::PPlusBoundary;
}
[[nodiscard]] inline bool in_p_minus(Region r) {
  return r == Region::PMinusInterior || r == Region::PMinusBoundary;
}

}  // namespace roughflow
