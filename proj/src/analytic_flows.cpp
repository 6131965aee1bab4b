#include "roughflow/analytic_flows.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "roughflow/errors.hpp"

namespace roughflow {

FlowSpec FlowSpec::rotation(double theta, std::string label) {
  if (!std::isfinite(theta)) throw DomainError("rotation angle must be finite");
  if (label.empty()) label = "rotation";
  return FlowSpec(Rotation{theta}, std::move(label));
}

FlowSpec FlowSpec::general(CircleMap psi, std::string label) {
  if (label.empty()) label = psi.name();
  return FlowSpec(GeneralMap{std::move(psi)}, std::move(label));
}

double FlowSpec::exit_angle(double theta) const {
  if (const auto* r = std::get_if<Rotation>(&continuation_)) {
    return theta + r->theta;
  }
  return std::get<GeneralMap>(continuation_).psi(theta);
}

double singular_time(const Point3& p) {
  if (!in_p_plus(classify(p))) {
    throw DomainError("singular time is only defined for starts in P+");
  }
  return p.z * p.z / 4.0;
}

namespace {

double quarter_root(double s) { return std::sqrt(std::sqrt(s)); }

Point3 p_minus_flow(double t, const Point3& p) {
  const double s = p.z * p.z + 4.0 * t;
  const double scale = quarter_root(s) / std::sqrt(-p.z);
  return {p.x * scale, p.y * scale, -std::sqrt(s)};
}

Point3 p_plus_flow(double t, const Point3& p) {
  const double s = std::max(0.0, p.z * p.z - 4.0 * t);
  const double scale = quarter_root(s) / std::sqrt(p.z);
  return {p.x * scale, p.y * scale, std::sqrt(s)};
}

Point3 continuation_flow(const FlowSpec& spec, double t, const Point3& p) {
  const double s = 4.0 * t - p.z * p.z;
  const Cylindrical c = to_cylindrical(p);
  const double radius = c.r / std::sqrt(p.z) * quarter_root(s);
  const double angle = spec.exit_angle(c.theta);
  return {radius * std::cos(angle), radius * std::sin(angle), -std::sqrt(s)};
}

// The inverse of the continuation angle, when it exists.
double inverse_exit_angle(const FlowSpec& spec, double phi) {
  if (const auto* r = std::get_if<FlowSpec::Rotation>(&spec.continuation())) {
    return wrap_angle(phi - r->theta);
  }
  const auto& psi = std::get<FlowSpec::GeneralMap>(spec.continuation()).psi;
  const auto inv = psi.inverse();
  if (!inv) throw NotInvertibleError("continuation map " + psi.name() +
                                     " has no inverse");
  return (*inv)(phi);
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("flow time must be finite and non-negative");
  }
}

}  // namespace

Point3 flow_eval(const FlowSpec& spec, double t, const Point3& p) {
  check_time(t);
  const Region region = classify(p);
  switch (region) {
    case Region::Origin:
      throw DomainError("the flow is not defined at the origin");
    case Region::Exterior:
      return p;
    case Region::PMinusInterior:
    case Region::PMinusBoundary:
      return p_minus_flow(t, p);
    case Region::PPlusInterior:
    case Region::PPlusBoundary:
      if (t <= p.z * p.z / 4.0) return p_plus_flow(t, p);
      return continuation_flow(spec, t, p);
  }
  return p;
}

FlowMap as_flow_map(FlowSpec spec) {
  return [spec = std::move(spec)](double t, const Point3& p) {
    return flow_eval(spec, t, p);
  };
}

FlowMap identity_flow() {
  return [](double, const Point3& p) { return p; };
}

double flow_residual(const FlowSpec& spec, double t, const Point3& p,
                     double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  check_time(t);
  if (t - h < 0.0) {
    throw DomainError("residual stencil reaches negative time");
  }
  if (in_p_plus(classify(p))) {
    const double t_star = singular_time(p);
    if (std::fabs(t - t_star) < 10.0 * h) {
      throw DomainError("residual requested inside the singular-time guard band");
    }
  }
  const Point3 forward = flow_eval(spec, t + h, p);
  const Point3 backward = flow_eval(spec, t - h, p);
  const Vector3 derivative = (forward - backward) * (0.5 / h);
  return norm(derivative - eval_b(flow_eval(spec, t, p)));
}

Point3 flow_inverse(const FlowSpec& spec, double t, const Point3& q) {
  check_time(t);
  const Region region = classify(q);
  if (region == Region::Origin) {
    throw DomainError("the origin has no well-defined preimage");
  }
  // Validate invertibility even when the answer is trivial.
  if (const auto* g = std::get_if<FlowSpec::GeneralMap>(&spec.continuation())) {
    if (!g->psi.invertible()) {
      throw NotInvertibleError("continuation map " + g->psi.name() +
                               " is not invertible");
    }
  }
  if (t == 0.0 || region == Region::Exterior) return q;

  const double z2 = q.z * q.z;
  if (in_p_plus(region)) {
    // Pre-singular image of a higher point of P+.
    const double z0 = std::sqrt(z2 + 4.0 * t);
    const double scale = std::sqrt(z0) / std::sqrt(q.z);
    return {q.x * scale, q.y * scale, z0};
  }
  if (z2 > 4.0 * t) {
    // Image of a point of P- under the P- formula.
    const double z0 = -std::sqrt(z2 - 4.0 * t);
    const double scale = std::sqrt(-z0) / std::sqrt(-q.z);
    return {q.x * scale, q.y * scale, z0};
  }
  if (z2 < 4.0 * t) {
    // Continuation image of a point of P+ that already crossed the origin.
    const double z0 = std::sqrt(4.0 * t - z2);
    const Cylindrical c = to_cylindrical(q);
    const double r0 = c.r * std::sqrt(z0) / std::sqrt(-q.z);
    return from_cylindrical({r0, inverse_exit_angle(spec, c.theta), z0});
  }
  throw DomainError("preimage of this point is the origin");
}

double transport_eval(const ScalarField& u0, const FlowSpec& spec, double t,
                      const Point3& q) {
  return u0(flow_inverse(spec, t, q));
}

namespace {

// Identifies the smooth piece of the flow map containing (t, p), apart from
// the angle breakpoints of the continuation, which are checked separately.
struct BranchKey {
  int region = 0;
  int time_branch = 0;
  friend bool operator==(const BranchKey&, const BranchKey&) = default;
};

BranchKey branch_of(double t, const Point3& p) {
  switch (classify(p)) {
    case Region::Exterior:
      return {0, 0};
    case Region::PMinusInterior:
      return {1, 0};
    case Region::PPlusInterior:
      break;
    default:
      throw StencilError("stencil touches the boundary of P or the origin");
  }
  const double t_star = p.z * p.z / 4.0;
  if (t == t_star) throw StencilError("stencil point sits at its singular time");
  return {2, t < t_star ? 0 : 1};
}

double signed_arc(double from, double to) {
  double d = std::fmod(to - from, kTwoPi);
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

// Throws when the stencil angles lie on both sides of (or on) a breakpoint.
void check_angle_pieces(const CircleMap& psi, std::span<const Point3> stencil) {
  for (double cut : psi.breakpoints()) {
    bool below = false;
    bool above = false;
    for (const Point3& q : stencil) {
      const double d = signed_arc(cut, to_cylindrical(q).theta);
      if (std::fabs(d) > kPi / 2.0) continue;
      (d < 0.0 ? below : above) = true;
      if (d == 0.0) below = true;
    }
    if (below && above) {
      throw StencilError("stencil straddles a breakpoint of the continuation map");
    }
  }
}

}  // namespace

double jacobian_fd(const FlowSpec& spec, double t, const Point3& p, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  check_time(t);
  const BranchKey center = branch_of(t, p);

  const std::array<Vector3, 3> axes{{{h, 0, 0}, {0, h, 0}, {0, 0, h}}};
  std::array<Point3, 7> stencil{p};
  for (std::size_t i = 0; i < 3; ++i) {
    stencil[1 + 2 * i] = p + axes[i];
    stencil[2 + 2 * i] = p - axes[i];
  }
  for (const Point3& q : stencil) {
    if (!(branch_of(t, q) == center)) {
      throw StencilError("stencil crosses a branch boundary of the flow");
    }
  }
  const auto* general = std::get_if<FlowSpec::GeneralMap>(&spec.continuation());
  if (center.time_branch == 1 && general != nullptr) {
    if (std::hypot(p.x, p.y) < 2.0 * h) {
      throw StencilError("stencil surrounds the axis, where psi is not smooth");
    }
    check_angle_pieces(general->psi, stencil);
  }

  std::array<Vector3, 3> columns{};
  for (std::size_t i = 0; i < 3; ++i) {
    columns[i] = (flow_eval(spec, t, stencil[1 + 2 * i]) -
                  flow_eval(spec, t, stencil[2 + 2 * i])) *
                 (0.5 / h);
  }
  const auto& [a, b, c] = columns;
  return a.x * (b.y * c.z - b.z * c.y) - b.x * (a.y * c.z - a.z * c.y) +
         c.x * (a.y * b.z - a.z * b.y);
}

Trajectory sample_trajectory(const FlowSpec& spec, const Point3& p,
                             std::span<const double> times) {
  Trajectory traj;
  if (times.empty() || times.front() != 0.0) {
    traj.times.push_back(0.0);
    traj.points.push_back(p);
  }
  for (double t : times) {
    if (!traj.times.empty() && !(t > traj.times.back())) {
      throw DomainError("trajectory times must be strictly increasing");
    }
    traj.times.push_back(t);
    traj.points.push_back(flow_eval(spec, t, p));
  }
  if (in_p_plus(classify(p))) traj.origin_hit_time = singular_time(p);
  return traj;
}

}  // namespace roughflow
