#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "roughflow/circle_map.hpp"
#include "roughflow/field.hpp"
#include "roughflow/geometry.hpp"

namespace roughflow {

/// Selects one of the closed-form flows of eval_b. All flows agree before
/// the singular time; they differ in how trajectories of P+ leave the
/// origin.
class FlowSpec {
 public:
  /// Post-singular angle theta + Theta.
  struct Rotation {
    double theta;
  };
  /// Post-singular angle psi(theta).
  struct GeneralMap {
    CircleMap psi;
  };
  using Continuation = std::variant<Rotation, GeneralMap>;

  static FlowSpec rotation(double theta, std::string label = {});
  static FlowSpec general(CircleMap psi, std::string label = {});

  [[nodiscard]] const Continuation& continuation() const { return continuation_; }
  [[nodiscard]] const std::string& label() const { return label_; }

  /// Outgoing angle for a trajectory that entered the origin at angle theta.
  [[nodiscard]] double exit_angle(double theta) const;

 private:
  FlowSpec(Continuation c, std::string label)
      : continuation_(std::move(c)), label_(std::move(label)) {}
  Continuation continuation_;
  std::string label_;
};

/// A flow map (t, x) -> X(t, x). Must be safe to call concurrently.
using FlowMap = std::function<Point3(double, const Point3&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Point3> points;
  /// z^2/4 for starts in P+.
  std::optional<double> origin_hit_time;
};

/// Time z^2/4 at which a trajectory from P+ reaches the origin.
/// Throws DomainError outside P+.
[[nodiscard]] double singular_time(const Point3& p);

/// Closed-form flow: identity off P, the P- formula for all t on P-, the
/// pre-singular formula on P+ up to z^2/4 and the continuation afterwards.
/// Throws DomainError for the origin or negative t.
[[nodiscard]] Point3 flow_eval(const FlowSpec& spec, double t, const Point3& p);

[[nodiscard]] FlowMap as_flow_map(FlowSpec spec);

/// Identity flow; a reference for measure checks.
[[nodiscard]] FlowMap identity_flow();

/// |dX/dt - b(X)| with a central difference of step h. Rejects evaluation
/// within 10h of t = 0 or of the singular time with DomainError.
[[nodiscard]] double flow_residual(const FlowSpec& spec, double t,
                                   const Point3& p, double h);

/// Preimage of q under X(t, .). Requires an invertible continuation
/// (rotations, or maps with a known inverse); otherwise NotInvertibleError.
[[nodiscard]] Point3 flow_inverse(const FlowSpec& spec, double t,
                                  const Point3& q);

using ScalarField = std::function<double(const Point3&)>;

/// Solution u(t, q) = u0(X(t, .)^{-1}(q)) of the transport equation.
[[nodiscard]] double transport_eval(const ScalarField& u0, const FlowSpec& spec,
                                    double t, const Point3& q);

/// Determinant of the central-difference spatial Jacobian of X(t, .) at p.
/// Throws StencilError if the stencil touches more than one smooth branch
/// (region, time branch or angle branch of the continuation).
[[nodiscard]] double jacobian_fd(const FlowSpec& spec, double t,
                                 const Point3& p, double h);

/// Samples flow_eval at the given increasing times (t = 0 is prepended when
/// absent).
[[nodiscard]] Trajectory sample_trajectory(const FlowSpec& spec,
                                           const Point3& p,
                                           std::span<const double> times);

}  // namespace roughflow
