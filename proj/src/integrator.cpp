#include "roughflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "roughflow/csv_io.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow {

IntegratorOpts IntegratorOpts::uniform(double t_end, std::size_t n,
                                       std::variant<Rk4Fixed, Rkf45> method) {
  IntegratorOpts opts;
  opts.method = method;
  opts.t_end = t_end;
  opts.sample_times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    opts.sample_times[k] = k == n ? t_end : t_end * static_cast<double>(k) / static_cast<double>(n);
  }
  return opts;
}

void IntegratorOpts::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw DomainError("t_end must be positive and finite");
  }
  if (const auto* rk4 = std::get_if<Rk4Fixed>(&method)) {
    if (!(rk4->dt > 0.0)) throw DomainError("RK4 step must be positive");
  } else {
    const auto& a = std::get<Rkf45>(method);
    if (!(a.atol > 0.0 && a.rtol > 0.0)) throw DomainError("tolerances must be positive");
    if (!(a.dt_min > 0.0 && a.dt_min <= a.dt_max)) {
      throw DomainError("need 0 < dt_min <= dt_max");
    }
  }
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double t = sample_times[i];
    if (!(t >= 0.0 && t <= t_end)) throw DomainError("sample time outside [0, t_end]");
    if (i > 0 && !(t > sample_times[i - 1])) {
      throw DomainError("sample times must be strictly increasing");
    }
  }
}

void to_json(nlohmann::json& j, const IntegratorOpts& opts) {
  if (const auto* rk4 = std::get_if<Rk4Fixed>(&opts.method)) {
    j["method"] = {{"name", "rk4_fixed"}, {"dt", rk4->dt}};
  } else {
    const auto& a = std::get<Rkf45>(opts.method);
    j["method"] = {{"name", "rkf45"},
                   {"atol", a.atol},
                   {"rtol", a.rtol},
                   {"dt_min", a.dt_min},
                   {"dt_max", a.dt_max}};
  }
  j["t_end"] = opts.t_end;
  j["sample_times"] = opts.sample_times;
}

namespace {

struct Rk4Stepper {
  const FieldFn& f;
  Point3 step(const Point3& y, double dt) const {
    const Vector3 k1 = f(y);
    const Vector3 k2 = f(y + k1 * (0.5 * dt));
    const Vector3 k3 = f(y + k2 * (0.5 * dt));
    const Vector3 k4 = f(y + k3 * dt);
    return y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
  }
};

struct Rkf45Result {
  Point3 y;
  double error_ratio;
};

// One Fehlberg step; error_ratio <= 1 means the step meets atol + rtol|y|.
Rkf45Result rkf45_step(const FieldFn& f, const Point3& y, double dt,
                       const Rkf45& tol) {
  const Vector3 k1 = f(y);
  const Vector3 k2 = f(y + k1 * (dt / 4.0));
  const Vector3 k3 = f(y + (k1 * (3.0 / 32.0) + k2 * (9.0 / 32.0)) * dt);
  const Vector3 k4 = f(y + (k1 * (1932.0 / 2197.0) - k2 * (7200.0 / 2197.0) +
                            k3 * (7296.0 / 2197.0)) * dt);
  const Vector3 k5 = f(y + (k1 * (439.0 / 216.0) - k2 * 8.0 + k3 * (3680.0 / 513.0) -
                            k4 * (845.0 / 4104.0)) * dt);
  const Vector3 k6 = f(y + (-1.0 * k1 * (8.0 / 27.0) + k2 * 2.0 -
                            k3 * (3544.0 / 2565.0) + k4 * (1859.0 / 4104.0) -
                            k5 * (11.0 / 40.0)) * dt);
  const Point3 y4 = y + (k1 * (25.0 / 216.0) + k3 * (1408.0 / 2565.0) +
                         k4 * (2197.0 / 4104.0) - k5 * (1.0 / 5.0)) * dt;
  const Vector3 err = (k1 * (1.0 / 360.0) - k3 * (128.0 / 4275.0) -
                       k4 * (2197.0 / 75240.0) + k5 * (1.0 / 50.0) +
                       k6 * (2.0 / 55.0)) * dt;
  const auto ratio = [&](double e, double a, double b) {
    return std::fabs(e) / (tol.atol + tol.rtol * std::max(std::fabs(a), std::fabs(b)));
  };
  const double worst = std::max({ratio(err.x, y.x, y4.x), ratio(err.y, y.y, y4.y),
                                 ratio(err.z, y.z, y4.z)});
  return {y4, worst};
}

// StiffnessError carrying the last accepted state.
class StiffnessAt : public StiffnessError {
 public:
  StiffnessAt(const std::string& what, double t, const Point3& p)
      : StiffnessError(what), t_(t), p_(p) {}
  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] const Point3& p() const { return p_; }

 private:
  double t_;
  Point3 p_;
};

[[noreturn]] void throw_stiff(double t, const Point3& p, double dt) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "step size " << dt << " fell below dt_min at t = " << t << ", p = ("
      << p.x << ", " << p.y << ", " << p.z << ")";
  throw StiffnessAt(msg.str(), t, p);
}

template <class OnSample>
void integrate(const FieldFn& field, const Point3& p0, const IntegratorOpts& opts,
               OnSample&& on_sample) {
  double t = 0.0;
  Point3 y = p0;
  std::size_t next = 0;
  while (next < opts.sample_times.size() && opts.sample_times[next] == 0.0) {
    on_sample(next++, y);
  }

  if (const auto* rk4 = std::get_if<Rk4Fixed>(&opts.method)) {
    const Rk4Stepper stepper{field};
    for (; next < opts.sample_times.size(); ++next) {
      const double target = opts.sample_times[next];
      while (t < target) {
        const double dt = std::min(rk4->dt, target - t);
        y = stepper.step(y, dt);
        t = (dt == target - t) ? target : t + dt;
      }
      on_sample(next, y);
    }
    return;
  }

  const Rkf45& tol = std::get<Rkf45>(opts.method);
  double dt = tol.dt_max;
  for (; next < opts.sample_times.size(); ++next) {
    const double target = opts.sample_times[next];
    while (t < target) {
      const double remaining = target - t;
      const bool clipped = dt >= remaining;
      const double trial = clipped ? remaining : dt;
      const auto [y_new, err] = rkf45_step(field, y, trial, tol);
      if (err <= 1.0 && is_finite(y_new)) {
        y = y_new;
        t = clipped ? target : t + trial;
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        const double proposed = trial * std::clamp(grow, 0.2, 5.0);
        // A clipped step says nothing about the admissible size.
        dt = std::min(tol.dt_max, clipped ? std::max(dt, proposed) : proposed);
      } else {
        const double shrink = std::isfinite(err) ? 0.9 * std::pow(err, -0.25) : 0.1;
        dt = trial * std::clamp(shrink, 0.1, 0.5);
        if (dt < tol.dt_min) throw_stiff(t, y, dt);
      }
    }
    on_sample(next, y);
  }
}

}  // namespace

Trajectory integrate_trajectory(const FieldFn& field, const Point3& p0,
                                const IntegratorOpts& opts) {
  opts.validate();
  Trajectory traj;
  const bool has_zero = !opts.sample_times.empty() && opts.sample_times.front() == 0.0;
  if (!has_zero) {
    traj.times.push_back(0.0);
    traj.points.push_back(p0);
  }
  integrate(field, p0, opts, [&](std::size_t k, const Point3& y) {
    traj.times.push_back(opts.sample_times[k]);
    traj.points.push_back(y);
  });
  if (in_p_plus(classify(p0))) traj.origin_hit_time = singular_time(p0);
  return traj;
}

std::vector<bool> Ensemble::failed_mask() const {
  std::vector<bool> mask(ids.size(), false);
  for (const auto& f : failures) mask[static_cast<std::size_t>(f.id)] = true;
  return mask;
}

Trajectory Ensemble::trajectory(std::size_t i) const {
  Trajectory traj;
  traj.times = times;
  for (const auto& slice : positions) traj.points.push_back(slice[i]);
  if (!positions.empty() && in_p_plus(classify(positions.front()[i]))) {
    traj.origin_hit_time = singular_time(positions.front()[i]);
  }
  return traj;
}

Ensemble integrate_ensemble(const SmoothFieldParams& params,
                            const std::vector<Point3>& points,
                            const IntegratorOpts& opts, std::uint64_t seed) {
  opts.validate();
  Ensemble ens;
  ens.params = params;
  ens.opts = opts;
  ens.seed = seed;
  ens.ids.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) ens.ids[i] = static_cast<std::int64_t>(i);

  // Recorded times: t = 0 followed by the sample times.
  const bool has_zero = !opts.sample_times.empty() && opts.sample_times.front() == 0.0;
  const std::size_t offset = has_zero ? 0 : 1;
  if (!has_zero) ens.times.push_back(0.0);
  ens.times.insert(ens.times.end(), opts.sample_times.begin(), opts.sample_times.end());
  ens.positions.assign(ens.times.size(), std::vector<Point3>(points.size()));

  const SmoothField field(params);
  const FieldFn fn = [&field](const Point3& p) { return field(p); };
  std::vector<std::optional<ParticleFailure>> failures(points.size());

  parallel_for(points.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ens.positions[0][i] = points[i];
      std::size_t filled = offset;
      try {
        integrate(fn, points[i], opts, [&](std::size_t k, const Point3& y) {
          ens.positions[k + offset][i] = y;
          filled = k + offset + 1;
        });
      } catch (const StiffnessAt& e) {
        for (std::size_t k = filled; k < ens.times.size(); ++k) ens.positions[k][i] = e.p();
        failures[i] = ParticleFailure{static_cast<std::int64_t>(i), e.t(), e.p(), e.what()};
      }
    }
  });

  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (failures[i]) ens.failures.push_back(*failures[i]);
  }
  return ens;
}

void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble) {
  std::vector<std::pair<std::int64_t, Trajectory>> rows;
  rows.reserve(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    rows.emplace_back(ensemble.ids[i], ensemble.trajectory(i));
  }
  write_trajectory_csv(out, rows);
}

nlohmann::json ensemble_sidecar(const Ensemble& ensemble) {
  nlohmann::json j;
  j["params"] = ensemble.params;
  j["opts"] = ensemble.opts;
  j["seed"] = ensemble.seed;
  j["particles"] = ensemble.size();
  j["failure_count"] = ensemble.failures.size();
  return j;
}

}  // namespace roughflow
