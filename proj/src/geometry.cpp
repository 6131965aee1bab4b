#include "roughflow/geometry.hpp"

#include <algorithm>

namespace roughflow {

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2pi.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double circular_distance(double a, double b) {
  const double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

Cylindrical to_cylindrical(const Point3& p) {
  const double r = std::hypot(p.x, p.y);
  const double theta = r > 0.0 ? wrap_angle(std::atan2(p.y, p.x)) : 0.0;
  return {r, theta, p.z};
}

Point3 from_cylindrical(const Cylindrical& c) {
  return {c.r * std::cos(c.theta), c.r * std::sin(c.theta), c.z};
}

Region classify(const Point3& p) {
  if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) return Region::Origin;
  const double r2 = p.x * p.x + p.y * p.y;
  const double az = std::fabs(p.z);
  // z == 0 off the origin means r2 > 0 = |z|: always exterior.
  if (r2 > az) return Region::Exterior;
  const bool boundary = (r2 == az);
  if (p.z > 0.0) {
    return boundary ? Region::PPlusBoundary : Region::PPlusInterior;
  }
  return boundary ? Region::PMinusBoundary : Region::PMinusInterior;
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::PPlusInterior: return "PPlusInterior";
    case Region::PPlusBoundary: return "PPlusBoundary";
    case Region::PMinusInterior: return "PMinusInterior";
    case Region::PMinusBoundary: return "PMinusBoundary";
    case Region::Exterior: return "Exterior";
    case Region::Origin: return "Origin";
  }
  return "?";
}

}  // namespace roughflow
