#include "roughflow/field.hpp"

#include <cmath>
#include <string>

#include "roughflow/errors.hpp"

namespace roughflow {

Vector3 eval_b(const Point3& p) {
  const Region region = classify(p);
  if (region == Region::Origin) {
    throw SingularityError("b is undefined at the origin");
  }
  if (region == Region::Exterior) return {0.0, 0.0, 0.0};
  const double sgn = p.z > 0.0 ? 1.0 : -1.0;
  const double z2 = p.z * p.z;
  return {-sgn * p.x / z2, -sgn * p.y / z2, -2.0 / std::fabs(p.z)};
}

SmoothFieldParams SmoothFieldParams::make(double eps, double theta_target,
                                          std::optional<double> mollify_width) {
  SmoothFieldParams p{eps, theta_target, mollify_width.value_or(eps / 4.0)};
  p.validate();
  return p;
}

void SmoothFieldParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw DomainError("eps must be positive and finite");
  }
  if (!(theta_target > 0.0 && theta_target <= kTwoPi)) {
    throw DomainError("theta_target must lie in (0, 2pi]");
  }
  if (!(mollify_width > 0.0 && mollify_width < eps)) {
    throw DomainError("mollify_width must lie in (0, eps)");
  }
}

void to_json(nlohmann::json& j, const SmoothFieldParams& p) {
  j = nlohmann::json{{"eps", p.eps},
                     {"theta_target", p.theta_target},
                     {"mollify_width", p.mollify_width}};
}

void from_json(const nlohmann::json& j, SmoothFieldParams& p) {
  if (!j.is_object()) throw ConfigError("field params must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "eps" && key != "theta_target" && key != "mollify_width") {
      throw ConfigError("unknown field parameter: " + key);
    }
  }
  const double eps = j.at("eps").get<double>();
  const double theta = j.at("theta_target").get<double>();
  std::optional<double> width;
  if (j.contains("mollify_width")) width = j.at("mollify_width").get<double>();
  p = SmoothFieldParams::make(eps, theta, width);
}

namespace {

double bump_kernel(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

double bump_kernel_derivative(double s) {
  return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0;
}

// Composite Simpson on [a, b]; the integrands here are C-infinity.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  const double step = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    sum += f(a + i * step) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * step / 3.0;
}

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double f = bump_kernel(s);
  return f / (f + bump_kernel(1.0 - s));
}

double smooth_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double f = bump_kernel(s);
  const double g = bump_kernel(1.0 - s);
  const double df = bump_kernel_derivative(s);
  const double dg = bump_kernel_derivative(1.0 - s);
  const double denom = f + g;
  return (df * g + f * dg) / (denom * denom);
}

SmoothField::SmoothField(const SmoothFieldParams& params) : params_(params) {
  params_.validate();
  plateau_ = params_.eps - params_.mollify_width;
  // Crossing the slab takes dt = h(z)/2 |dz|, so the accumulated angle is
  // rate * integral of B h over [0, eps] (the profile is even).
  const auto bh = [this](double z) { return swirl_bump(z) * profile(z); };
  const auto h = [this](double z) { return profile(z); };
  const double weighted =
      plateau_ * plateau_ + simpson(bh, plateau_, params_.eps, 4096);
  swirl_rate_ = params_.theta_target / weighted;
  transit_time_ = plateau_ * plateau_ + simpson(h, plateau_, params_.eps, 4096);
}

double SmoothField::profile(double z) const {
  const double u = std::fabs(z);
  if (u <= plateau_) return plateau_;
  if (u >= params_.eps) return u;
  const double lambda = smooth_step((u - plateau_) / params_.mollify_width);
  return plateau_ + lambda * (u - plateau_);
}

double SmoothField::profile_derivative(double z) const {
  const double u = std::fabs(z);
  const double sgn = z > 0.0 ? 1.0 : -1.0;
  if (u <= plateau_) return 0.0;
  if (u >= params_.eps) return sgn;
  const double s = (u - plateau_) / params_.mollify_width;
  return sgn * (smooth_step_derivative(s) * s + smooth_step(s));
}

double SmoothField::swirl_bump(double z) const {
  const double u = std::fabs(z);
  return 1.0 - smooth_step((u - plateau_) / params_.mollify_width);
}

bool SmoothField::in_core(const Point3& p) const {
  return std::fabs(p.z) < params_.eps && p.x * p.x + p.y * p.y < params_.eps;
}

Vector3 SmoothField::operator()(const Point3& p) const {
  if (std::fabs(p.z) >= params_.eps) return eval_b(p);
  const double h = profile(p.z);
  if (p.x * p.x + p.y * p.y > h) return {0.0, 0.0, 0.0};
  const double dh = profile_derivative(p.z);
  const double radial = -dh / (h * h);
  const double omega = swirl_rate_ * swirl_bump(p.z);
  return {radial * p.x - omega * p.y, radial * p.y + omega * p.x, -2.0 / h};
}

Vector3 eval_b_smooth(const SmoothFieldParams& params, const Point3& p) {
  return SmoothField(params)(p);
}

double divergence_fd(const FieldFn& field, const Point3& p, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const double inv = 1.0 / (2.0 * h);
  const double dx = (field({p.x + h, p.y, p.z}).x - field({p.x - h, p.y, p.z}).x);
  const double dy = (field({p.x, p.y + h, p.z}).y - field({p.x, p.y - h, p.z}).y);
  const double dz = (field({p.x, p.y, p.z + h}).z - field({p.x, p.y, p.z - h}).z);
  return (dx + dy + dz) * inv;
}

}  // namespace roughflow
