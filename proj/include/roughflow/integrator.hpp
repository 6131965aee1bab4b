#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/field.hpp"

namespace roughflow {

struct Rk4Fixed {
  double dt = 1e-3;
};

/// Fehlberg 4(5) pair; the 4th-order solution is propagated.
struct Rkf45 {
  double atol = 1e-9;
  double rtol = 1e-9;
  double dt_min = 1e-12;
  double dt_max = 1e-2;
};

struct IntegratorOpts {
  std::variant<Rk4Fixed, Rkf45> method = Rkf45{};
  double t_end = 1.0;
  /// Sorted, within [0, t_end].
  std::vector<double> sample_times;

  /// sample_times = n + 1 evenly spaced points over [0, t_end].
  [[nodiscard]] static IntegratorOpts uniform(double t_end, std::size_t n,
                                              std::variant<Rk4Fixed, Rkf45> method = Rkf45{});
  void validate() const;
};

void to_json(nlohmann::json& j, const IntegratorOpts& opts);

/// Integrates dX/dt = field(X) from p0, recording the state at every sample
/// time (t = 0 always comes first). An adaptive step below dt_min raises
/// StiffnessError carrying the last accepted (t, p).
[[nodiscard]] Trajectory integrate_trajectory(const FieldFn& field,
                                              const Point3& p0,
                                              const IntegratorOpts& opts);

struct ParticleFailure {
  std::int64_t id = 0;
  double t = 0.0;
  Point3 last_good{};
  std::string message;
};

struct Ensemble {
  std::vector<std::int64_t> ids;
  std::vector<double> times;
  /// positions[k][i]: particle i at times[k]. A failed particle keeps its
  /// last good state from the failure time on.
  std::vector<std::vector<Point3>> positions;
  std::vector<ParticleFailure> failures;
  SmoothFieldParams params;
  IntegratorOpts opts;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const { return ids.size(); }
  /// Per-particle flag, true when the particle failed.
  [[nodiscard]] std::vector<bool> failed_mask() const;
  [[nodiscard]] Trajectory trajectory(std::size_t i) const;
};

/// Integrates every point under b_eps independently (data-parallel). Each
/// particle's result is bitwise identical to integrate_trajectory. Ids are
/// the input indices. Stiffness failures are collected, not thrown.
[[nodiscard]] Ensemble integrate_ensemble(const SmoothFieldParams& params,
                                          const std::vector<Point3>& points,
                                          const IntegratorOpts& opts,
                                          std::uint64_t seed = 0);

/// Trajectory CSV of every particle.
void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble);
/// Sidecar: params, opts, seed and failure count.
[[nodiscard]] nlohmann::json ensemble_sidecar(const Ensemble& ensemble);

}  // namespace roughflow
