#include "roughflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "roughflow/circle_maps.hpp"
#include "roughflow/csv_io.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/random.hpp"

namespace roughflow {
namespace {

void check_angle(double a, const char* what) {
  if (!(a > 0.0 && a <= kTwoPi)) {
    throw DomainError(std::string(what) + " must lie in (0, 2pi]");
  }
}

// Sup over recorded times of the mean distance between the ensemble and an
// analytic flow, skipping failed particles.
double ensemble_distance(const Ensemble& ens, const FlowSpec& spec,
                         const std::vector<Point3>& starts,
                         const std::vector<bool>& failed) {
  std::size_t used = 0;
  for (bool f : failed) used += f ? 0 : 1;
  if (used == 0) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < ens.times.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      if (failed[i]) continue;
      sum += distance(ens.positions[k][i], flow_eval(spec, ens.times[k], starts[i]));
    }
    worst = std::max(worst, sum / static_cast<double>(used));
  }
  return worst;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::vector<double> uniform_times(double horizon, std::size_t steps) {
  return IntegratorOpts::uniform(horizon, steps).sample_times;
}

}  // namespace

TwoSubsequenceReport run_two_subsequence(const TwoSubsequenceConfig& config) {
  if (config.eps_list.empty()) throw DomainError("eps_list is empty");
  for (std::size_t i = 0; i < config.eps_list.size(); ++i) {
    if (!(config.eps_list[i] > 0.0)) throw DomainError("eps values must be positive");
    if (i > 0 && !(config.eps_list[i] < config.eps_list[i - 1])) {
      throw DomainError("eps_list must be strictly decreasing");
    }
  }
  check_angle(config.theta, "theta");
  check_angle(config.phi, "phi");
  config.region.validate();

  TwoSubsequenceReport report;
  report.config = config;
  const auto starts = sample_paraboloid(config.region, config.samples, config.seed);
  IntegratorOpts opts = IntegratorOpts::uniform(config.horizon, config.time_steps, config.method);
  const FlowSpec flow_theta = FlowSpec::rotation(config.theta, "X^theta");
  const FlowSpec flow_phi = FlowSpec::rotation(config.phi, "X^phi");

  for (std::size_t n = 0; n < config.eps_list.size(); ++n) {
    const bool even = n % 2 == 0;
    const double target = even ? config.theta : config.phi;
    const auto params = SmoothFieldParams::make(config.eps_list[n], target);
    const Ensemble ens = integrate_ensemble(params, starts, opts, config.seed);
    const double rate =
        static_cast<double>(ens.failures.size()) / static_cast<double>(starts.size());
    report.worst_failure_rate = std::max(report.worst_failure_rate, rate);
    if (rate > config.max_failure_rate) {
      throw ExperimentError("integration failure rate " + format_double(rate) +
                            " exceeds the limit at eps = " +
                            format_double(config.eps_list[n]));
    }
    const auto failed = ens.failed_mask();
    report.rows.push_back(ConvergenceRow{
        config.eps_list[n], target,
        ensemble_distance(ens, even ? flow_theta : flow_phi, starts, failed),
        ensemble_distance(ens, even ? flow_phi : flow_theta, starts, failed),
        ens.failures.size()});
  }

  const auto profile = l1_distance_profile(as_flow_map(flow_theta), as_flow_map(flow_phi),
                                           starts, opts.sample_times);
  report.limit_separation = *std::max_element(profile.begin(), profile.end());

  std::vector<double> even_d;
  std::vector<double> odd_d;
  for (std::size_t n = 0; n < report.rows.size(); ++n) {
    (n % 2 == 0 ? even_d : odd_d).push_back(report.rows[n].distance_to_target);
  }
  report.even_decreasing = strictly_decreasing(even_d);
  report.odd_decreasing = strictly_decreasing(odd_d);
  if (config.theta != config.phi) {
    const double bound = 0.1 * report.limit_separation;
    bool ok = even_d.back() <= bound;
    if (!odd_d.empty()) ok = ok && odd_d.back() <= bound;
    report.limits_separated = ok;
  }
  return report;
}

void to_json(nlohmann::json& j, const TwoSubsequenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps},
                    {"theta_target", row.theta_target},
                    {"distance_to_target", row.distance_to_target},
                    {"distance_to_other", row.distance_to_other},
                    {"failures", row.failures}});
  }
  nlohmann::json method = {{"atol", r.config.method.atol},
                           {"rtol", r.config.method.rtol},
                           {"dt_min", r.config.method.dt_min},
                           {"dt_max", r.config.method.dt_max}};
  j = nlohmann::json{
      {"config",
       {{"eps_list", r.config.eps_list},
        {"theta", r.config.theta},
        {"phi", r.config.phi},
        {"samples", r.config.samples},
        {"seed", r.config.seed},
        {"region", r.config.region},
        {"horizon", r.config.horizon},
        {"time_steps", r.config.time_steps},
        {"method", method}}},
      {"tolerances",
       {{"max_failure_rate", r.config.max_failure_rate},
        {"finest_over_separation", 0.1},
        {"monotonicity", "strict decrease within each subsequence"}}},
      {"rows", rows},
      {"limit_separation", r.limit_separation},
      {"worst_failure_rate", r.worst_failure_rate},
      {"even_decreasing", r.even_decreasing},
      {"odd_decreasing", r.odd_decreasing},
      {"limits_separated", r.limits_separated ? nlohmann::json(*r.limits_separated)
                                              : nlohmann::json(nullptr)},
      {"passed", r.passed()}};
}

// ---------------------------------------------------------------------------

GalleryReport run_psi_gallery(const GalleryConfig& config) {
  GalleryReport report;
  const double h = config.jacobian_step;

  std::vector<JacobianSample> half_circle;
  for (double base : {kPi / 6.0, kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0, 5.0 * kPi / 6.0}) {
    for (double shift : {0.0, kPi}) {
      const double theta = base + shift;
      for (double t : {0.6, 1.0}) {
        half_circle.push_back({theta, t, {0.5 * std::cos(theta), 0.5 * std::sin(theta), 1.0}, 0.0});
      }
    }
  }

  const std::vector<std::pair<std::string, CircleMap>> maps{
      {"rotation(pi)", CircleMap::rotation(kPi)},
      {"psi1", CircleMap::psi1()},
      {"psi2", CircleMap::psi2()}};
  for (const auto& [name, map] : maps) {
    GalleryEntry entry;
    entry.map = name;
    const Histogram hist =
        pushforward_histogram(map, config.histogram_bins, config.samples, config.seed);
    entry.histogram_deviation = max_relative_deviation(hist);
    entry.measure_preserving = entry.histogram_deviation <= config.histogram_tol;
    const FlowSpec spec = build_flow_from_psi(map);
    entry.compression = compression_constant(as_flow_map(spec), RegionSpec::reference(),
                                             config.compression_time,
                                             config.compression_cell, config.samples,
                                             config.seed);
    for (auto sample : half_circle) {
      sample.det = jacobian_fd(spec, sample.t, sample.p, h);
      entry.jacobians.push_back(sample);
    }
    report.entries.push_back(std::move(entry));
  }

  const auto& psi1 = report.entries[1].jacobians;
  report.psi1_det_max_lower_half = -std::numeric_limits<double>::infinity();
  report.psi1_det_min_lower_half = std::numeric_limits<double>::infinity();
  report.psi1_det_max_upper_half = -std::numeric_limits<double>::infinity();
  report.psi1_det_min_upper_half = std::numeric_limits<double>::infinity();
  for (const auto& s : psi1) {
    if (s.theta < kPi) {
      report.psi1_det_max_lower_half = std::max(report.psi1_det_max_lower_half, s.det);
      report.psi1_det_min_lower_half = std::min(report.psi1_det_min_lower_half, s.det);
    } else {
      report.psi1_det_max_upper_half = std::max(report.psi1_det_max_upper_half, s.det);
      report.psi1_det_min_upper_half = std::min(report.psi1_det_min_upper_half, s.det);
    }
  }

  // psi2 is two-to-one: theta and theta + pi share their image.
  const FlowSpec psi2_flow = build_flow_from_psi(CircleMap::psi2());
  const auto psi2_gap = [&](double theta) {
    return distance(flow_eval(psi2_flow, 0.5, lift_upper(theta)),
                    flow_eval(psi2_flow, 0.5, lift_upper(theta + kPi)));
  };
  report.psi2_gap = psi2_gap(report.psi2_theta);
  constexpr std::size_t kSweep = 1000;
  for (std::size_t k = 0; k < kSweep; ++k) {
    const double theta = kPi * (static_cast<double>(k) + 0.5) / kSweep;
    ++report.psi2_pairs_tested;
    if (psi2_gap(theta) <= 1e-10) ++report.psi2_coincidences;
  }

  // X^theta is injective off the origin.
  const FlowSpec rotation = FlowSpec::rotation(kPi);
  const auto first = sample_paraboloid(RegionSpec::reference(), config.injectivity_pairs,
                                       mix_seed(config.seed, 1));
  const auto second = sample_paraboloid(RegionSpec::reference(), config.injectivity_pairs,
                                        mix_seed(config.seed, 2));
  report.rotation_min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] == second[i]) continue;
    for (double t : {0.5, 1.0}) {
      const double gap = distance(flow_eval(rotation, t, first[i]),
                                  flow_eval(rotation, t, second[i]));
      report.rotation_min_separation = std::min(report.rotation_min_separation, gap);
      if (gap <= 1e-10) ++report.rotation_coincidences;
    }
    ++report.rotation_pairs_tested;
  }

  // Determinant of X^theta: identity at t = 0, positive afterwards.
  report.rotation_det_t0_min = std::numeric_limits<double>::infinity();
  report.rotation_det_t0_max = -std::numeric_limits<double>::infinity();
  report.rotation_det_min = std::numeric_limits<double>::infinity();
  const auto probes = sample_paraboloid(RegionSpec::reference(), 200, mix_seed(config.seed, 3));
  for (const auto& p : probes) {
    for (double t : {0.0, 0.1, 0.3, 0.6, 1.0}) {
      double det = 0.0;
      try {
        det = jacobian_fd(rotation, t, p, h);
      } catch (const StencilError&) {
        continue;
      }
      ++report.rotation_det_samples;
      report.rotation_det_min = std::min(report.rotation_det_min, det);
      if (t == 0.0) {
        report.rotation_det_t0_min = std::min(report.rotation_det_t0_min, det);
        report.rotation_det_t0_max = std::max(report.rotation_det_t0_max, det);
      }
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const GalleryReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json jac = nlohmann::json::array();
    for (const auto& s : e.jacobians) {
      jac.push_back({{"theta", s.theta}, {"t", s.t}, {"det", s.det}});
    }
    entries.push_back({{"map", e.map},
                       {"measure_preserving", e.measure_preserving},
                       {"histogram_deviation", e.histogram_deviation},
                       {"compression", e.compression},
                       {"jacobians", jac}});
  }
  j = nlohmann::json{
      {"entries", entries},
      {"psi2_witness",
       {{"theta", r.psi2_theta},
        {"gap", r.psi2_gap},
        {"pairs_tested", r.psi2_pairs_tested},
        {"coincidences", r.psi2_coincidences}}},
      {"rotation_injectivity",
       {{"pairs_tested", r.rotation_pairs_tested},
        {"coincidences", r.rotation_coincidences},
        {"min_separation", r.rotation_min_separation}}},
      {"rotation_jacobian",
       {{"t0_min", r.rotation_det_t0_min},
        {"t0_max", r.rotation_det_t0_max},
        {"min", r.rotation_det_min},
        {"samples", r.rotation_det_samples}}},
      {"psi1_jacobian",
       {{"lower_half_min", r.psi1_det_min_lower_half},
        {"lower_half_max", r.psi1_det_max_lower_half},
        {"upper_half_min", r.psi1_det_min_upper_half},
        {"upper_half_max", r.psi1_det_max_upper_half}}}};
}

// ---------------------------------------------------------------------------

InterpolantMap::InterpolantMap(CircleMap psi, double eps)
    : limit_(FlowSpec::general(std::move(psi))), eps_(eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
}

double InterpolantMap::bridge_start(const Point3& p) const {
  return (p.z * p.z - eps_ * eps_) / 4.0;
}

double InterpolantMap::bridge_end(const Point3& p) const {
  return (p.z * p.z + eps_ * eps_) / 4.0;
}

Point3 InterpolantMap::bridge_target(const Point3& p) const {
  const Cylindrical c = to_cylindrical(p);
  const double radius = c.r / std::sqrt(p.z) * std::sqrt(eps_);
  const double angle = limit_.exit_angle(c.theta);
  return {radius * std::cos(angle), radius * std::sin(angle), -eps_};
}

Point3 InterpolantMap::operator()(double t, const Point3& p) const {
  if (!in_p_plus(classify(p))) return flow_eval(limit_, t, p);
  if (!(p.z * p.z > eps_ * eps_)) {
    throw DomainError("interpolant needs z^2 > eps^2");
  }
  const double t1 = bridge_start(p);
  const double t2 = bridge_end(p);
  if (t <= t1) return flow_eval(limit_, t, p);
  if (t >= t2) return flow_eval(limit_, t - t2, bridge_target(p));
  const double span = t2 - t1;
  return bridge_target(p) * ((t - t1) / span) + flow_eval(limit_, t1, p) * ((t2 - t) / span);
}

namespace {

// On the flipped half of psi1 the particles at angles theta and 3pi - theta
// swap places, so their bridges meet at the midpoint with different
// velocities.
NonFlowWitness find_witness(const InterpolantMap& map) {
  NonFlowWitness best;
  constexpr double kZ = 0.8;
  const double rho = 0.5 * std::sqrt(kZ);
  for (int k = 1; k < 16; ++k) {
    const double theta = kPi + kPi * k / 16.0;
    const double partner = 3.0 * kPi - theta;
    if (std::fabs(theta - partner) < 1e-9) continue;
    const Point3 a{rho * std::cos(theta), rho * std::sin(theta), kZ};
    const Point3 b{rho * std::cos(partner), rho * std::sin(partner), kZ};
    const double t1 = map.bridge_start(a);
    const double t2 = map.bridge_end(a);
    const double t = 0.5 * (t1 + t2);
    const double dt = 1e-3 * (t2 - t1);
    const Point3 pa = map(t, a);
    const Point3 pb = map(t, b);
    const Vector3 va = (map(t + dt, a) - map(t - dt, a)) * (0.5 / dt);
    const Vector3 vb = (map(t + dt, b) - map(t - dt, b)) * (0.5 / dt);
    NonFlowWitness w{false, a, b, t, pa, distance(pa, pb), distance(va, vb)};
    w.found = w.position_gap <= 1e-12 && w.velocity_gap > 1e-6;
    if (w.found) return w;
    if (!best.found && w.velocity_gap > best.velocity_gap) best = w;
  }
  return best;
}

}  // namespace

InterpolantReport run_interpolant_demo(const InterpolantConfig& config) {
  config.region.validate();
  InterpolantReport report;
  const auto starts = sample_paraboloid(config.region, config.samples, config.seed);
  const auto times = uniform_times(config.horizon, config.time_steps);
  std::vector<double> distances;
  for (double eps : config.eps_list) {
    const InterpolantMap map(CircleMap::psi1(), eps);
    const FlowSpec& limit = map.limit_flow();
    InterpolantRow row;
    row.eps = eps;
    const auto profile = l1_distance_profile(
        [&map](double t, const Point3& p) { return map(t, p); }, as_flow_map(limit),
        starts, times);
    row.distance_to_limit = *std::max_element(profile.begin(), profile.end());

    for (const auto& p : starts) {
      const double t1 = map.bridge_start(p);
      const double t2 = map.bridge_end(p);
      const Point3 target = map.bridge_target(p);
      for (double t : times) {
        const Point3 value = map(t, p);
        if (t <= t1) {
          row.pre_bridge_mismatch =
              std::max(row.pre_bridge_mismatch, distance(value, flow_eval(limit, t, p)));
        } else if (t >= t2) {
          row.post_bridge_mismatch = std::max(
              row.post_bridge_mismatch, distance(value, flow_eval(limit, t - t2, target)));
          row.post_bridge_limit_gap =
              std::max(row.post_bridge_limit_gap, distance(value, flow_eval(limit, t, p)));
        }
      }
    }
    row.witness = find_witness(map);
    report.segments_exact = report.segments_exact && row.pre_bridge_mismatch == 0.0 &&
                            row.post_bridge_mismatch == 0.0;
    report.witnesses_found = report.witnesses_found && row.witness.found;
    distances.push_back(row.distance_to_limit);
    report.rows.push_back(row);
  }
  report.distances_decreasing = strictly_decreasing(distances);
  return report;
}

void to_json(nlohmann::json& j, const InterpolantReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps},
                    {"distance_to_limit", row.distance_to_limit},
                    {"pre_bridge_mismatch", row.pre_bridge_mismatch},
                    {"post_bridge_mismatch", row.post_bridge_mismatch},
                    {"post_bridge_limit_gap", row.post_bridge_limit_gap},
                    {"witness",
                     {{"found", row.witness.found},
                      {"t", row.witness.t},
                      {"first", {row.witness.first.x, row.witness.first.y, row.witness.first.z}},
                      {"second", {row.witness.second.x, row.witness.second.y, row.witness.second.z}},
                      {"position_gap", row.witness.position_gap},
                      {"velocity_gap", row.witness.velocity_gap}}}});
  }
  j = nlohmann::json{{"rows", rows},
                     {"distances_decreasing", r.distances_decreasing},
                     {"segments_exact", r.segments_exact},
                     {"witnesses_found", r.witnesses_found},
                     {"passed", r.passed()}};
}

// ---------------------------------------------------------------------------

FigureReport emit_figure_data(Figure which, const std::filesystem::path& out_path,
                              std::size_t samples) {
  if (samples < 2) throw DomainError("a figure needs at least 2 samples");
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path.string());

  FigureReport report;
  report.path = out_path;
  Trajectory traj;
  if (which == Figure::Fig1) {
    const auto times = uniform_times(1.0, samples - 1);
    traj = sample_trajectory(FlowSpec::rotation(kPi), {0.5, 0.0, 1.0}, times);
  } else {
    const SmoothField field(SmoothFieldParams::make(0.1, kPi));
    const IntegratorOpts opts = IntegratorOpts::uniform(0.2, samples - 1);
    traj = integrate_trajectory([&field](const Point3& p) { return field(p); },
                                {0.3, 0.0, 0.5}, opts);
    double turned = 0.0;
    double previous = std::atan2(traj.points.front().y, traj.points.front().x);
    for (const auto& p : traj.points) {
      const double angle = std::atan2(p.y, p.x);
      double step = angle - previous;
      if (step > kPi) step -= kTwoPi;
      if (step < -kPi) step += kTwoPi;
      turned += step;
      previous = angle;
    }
    report.winding = turned / kTwoPi;
  }
  write_trajectory_csv(out, {{0, traj}});
  if (!out) throw Error("failed while writing " + out_path.string());
  report.rows = traj.times.size();
  return report;
}

}  // namespace roughflow
