#pragma once

#include <functional>
#include <optional>

#include "roughflow/geometry.hpp"
#include <json.hpp>

namespace roughflow {

/// A vector field on R^3. Evaluators must be safe to call concurrently.
using FieldFn = std::function<Vector3(const Point3&)>;

/// The singular divergence-free field
///   b = (-sgn(z) x / z^2, -sgn(z) y / z^2, -2 / |z|)  on P,   0 otherwise.
/// Boundary points of P take the P branch. P meets {z = 0} only at the
/// origin, so sgn(0) never arises off the singularity.
/// Throws SingularityError at the origin.
[[nodiscard]] Vector3 eval_b(const Point3& p);

/// Parameters of one member b_eps of the smooth approximating family.
struct SmoothFieldParams {
  double eps = 0.1;
  /// Rotation imposed on every trajectory crossing the core, in (0, 2pi].
  double theta_target = kPi;
  /// Width of the transition layer; 0 < mollify_width < eps.
  double mollify_width = 0.025;

  /// mollify_width defaults to eps / 4.
  [[nodiscard]] static SmoothFieldParams make(
      double eps, double theta_target,
      std::optional<double> mollify_width = std::nullopt);

  /// Throws DomainError when an invariant is violated.
  void validate() const;

  friend bool operator==(const SmoothFieldParams&,
                         const SmoothFieldParams&) = default;
};

void to_json(nlohmann::json& j, const SmoothFieldParams& p);
/// Rejects unknown keys. Missing mollify_width defaults to eps / 4.
void from_json(const nlohmann::json& j, SmoothFieldParams& p);

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, with all derivatives
/// vanishing at both ends.
[[nodiscard]] double smooth_step(double s);
[[nodiscard]] double smooth_step_derivative(double s);

/// Smooth approximation b_eps of eval_b.
///
/// The meridional part of b is the curl of the axisymmetric stream function
/// -r^2/|z| restricted to P. Inside the slab |z| < eps the profile |z| is
/// replaced by a smooth positive profile h(z) (constant on the plateau
/// |z| <= eps - mollify_width), giving
///   (b_r, b_z) = (-r h'(z) / h^2, -2 / h)      on {r^2 <= h(z)},
/// which is exactly divergence-free and keeps every streamline level
/// r^2 / h(z) fixed. A swirl kappa * B(z) * (-y, x, 0), with B a smooth bump
/// supported in the slab, turns each trajectory by exactly theta_target
/// while it crosses the slab; azimuthal fields of this form are
/// divergence-free for any profile.
///
/// Outside the slab the field coincides with eval_b. Near the origin the
/// trajectories follow a helix, which is the selection mechanism.
class SmoothField {
 public:
  explicit SmoothField(const SmoothFieldParams& params);

  [[nodiscard]] Vector3 operator()(const Point3& p) const;

  [[nodiscard]] const SmoothFieldParams& params() const { return params_; }

  /// Smoothed vertical profile replacing |z|.
  [[nodiscard]] double profile(double z) const;
  [[nodiscard]] double profile_derivative(double z) const;
  /// Swirl bump, 1 on the plateau and 0 for |z| >= eps.
  [[nodiscard]] double swirl_bump(double z) const;
  /// Peak angular velocity of the swirl.
  [[nodiscard]] double swirl_rate() const { return swirl_rate_; }
  /// Time a trajectory spends crossing the slab, independent of its level.
  [[nodiscard]] double core_transit_time() const { return transit_time_; }

  /// True on the set where the field may differ from eval_b:
  /// {|z| < eps, x^2 + y^2 < eps}.
  [[nodiscard]] bool in_core(const Point3& p) const;

 private:
  SmoothFieldParams params_;
  double plateau_;
  double swirl_rate_;
  double transit_time_;
};

/// Convenience wrapper: SmoothField(params)(p).
[[nodiscard]] Vector3 eval_b_smooth(const SmoothFieldParams& params,
                                    const Point3& p);

/// Central-difference divergence with step h. Errors raised by the field on
/// any stencil point (e.g. the singularity) propagate.
[[nodiscard]] double divergence_fd(const FieldFn& field, const Point3& p,
                                   double h);

}  // namespace roughflow
