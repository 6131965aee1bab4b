#include "roughflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "roughflow/csv_io.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/random.hpp"

namespace roughflow {
namespace {

constexpr std::size_t kChunk = 4096;

}  // namespace

void RegionSpec::validate() const {
  if (sign != 1 && sign != -1) throw DomainError("region sign must be +1 or -1");
  if (!(z_lo < z_hi)) throw DomainError("empty z range");
  if (sign > 0 && !(z_lo > 0.0)) throw DomainError("P+ slice needs z_lo > 0");
  if (sign < 0 && !(z_hi < 0.0)) throw DomainError("P- slice needs z_hi < 0");
}

double RegionSpec::volume() const {
  return kPi / 2.0 * std::fabs(z_hi * z_hi - z_lo * z_lo);
}

void to_json(nlohmann::json& j, const RegionSpec& r) {
  j = nlohmann::json{{"sign", r.sign}, {"z_lo", r.z_lo}, {"z_hi", r.z_hi}};
}

std::vector<Point3> sample_paraboloid(const RegionSpec& region, std::size_t n,
                                      std::uint64_t seed) {
  region.validate();
  if (n == 0) throw DomainError("need at least one sample");
  const double a = std::min(std::fabs(region.z_lo), std::fabs(region.z_hi));
  const double b = std::max(std::fabs(region.z_lo), std::fabs(region.z_hi));
  std::vector<Point3> points(n);
  parallel_for(chunk_count(n, kChunk), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng(seed, c);
      const std::size_t last = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < last; ++i) {
        // Slice area pi|z| gives |z| density proportional to |z|.
        const double az = std::sqrt(a * a + rng.uniform() * (b * b - a * a));
        const double rho = std::sqrt(rng.uniform() * az);
        const double theta = kTwoPi * rng.uniform();
        Point3 p{rho * std::cos(theta), rho * std::sin(theta), region.sign * az};
        while (p.x * p.x + p.y * p.y > az) {
          p.x *= 1.0 - 0x1.0p-52;
          p.y *= 1.0 - 0x1.0p-52;
        }
        points[i] = p;
      }
    }
  });
  return points;
}

void to_json(nlohmann::json& j, const MeasureReport& r) {
  j = nlohmann::json{{"compression_L", r.compression_L},
                     {"cell_size", r.cell_size},
                     {"sample_count", r.sample_count},
                     {"max_cell_ratio", r.max_cell_ratio},
                     {"time", r.time},
                     {"occupied_cells", r.occupied_cells},
                     {"expected_per_cell", r.expected_per_cell},
                     {"relative_sigma", r.relative_sigma},
                     {"tolerance", r.tolerance}};
}

namespace {

std::uint64_t cell_key(const Point3& p, double cell) {
  constexpr std::int64_t kOffset = std::int64_t{1} << 20;
  constexpr std::uint64_t kMask = (std::uint64_t{1} << 21) - 1;
  const auto index = [&](double v) {
    const auto i = static_cast<std::int64_t>(std::floor(v / cell)) + kOffset;
    if (i < 0 || i > static_cast<std::int64_t>(kMask)) {
      throw InsufficientResolutionError("flow image outside the binning range");
    }
    return static_cast<std::uint64_t>(i);
  };
  return (index(p.x) << 42) | (index(p.y) << 21) | index(p.z);
}

}  // namespace

MeasureReport compression_constant(const FlowMap& flow, const RegionSpec& region,
                                   double t, double grid_cell, std::size_t samples,
                                   std::uint64_t seed) {
  if (!(grid_cell > 0.0)) throw DomainError("grid_cell must be positive");
  const auto points = sample_paraboloid(region, samples, seed);
  std::vector<std::uint64_t> keys(samples);
  parallel_for(samples, kChunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      keys[i] = cell_key(flow(t, points[i]), grid_cell);
    }
  });
  std::sort(keys.begin(), keys.end());

  std::uint64_t occupied = 0;
  std::uint64_t max_count = 0;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    ++occupied;
    max_count = std::max<std::uint64_t>(max_count, j - i);
    i = j;
  }
  if (occupied < 10) {
    throw InsufficientResolutionError("fewer than 10 occupied cells; refine grid_cell");
  }

  MeasureReport report;
  report.cell_size = grid_cell;
  report.sample_count = samples;
  report.time = t;
  report.occupied_cells = occupied;
  report.expected_per_cell =
      static_cast<double>(samples) * std::pow(grid_cell, 3) / region.volume();
  report.max_cell_ratio = static_cast<double>(max_count) / report.expected_per_cell;
  report.compression_L = report.max_cell_ratio;
  report.relative_sigma = 1.0 / std::sqrt(report.expected_per_cell);
  report.tolerance = 5.0 * report.relative_sigma;
  return report;
}

std::vector<double> l1_distance_profile(const FlowMap& a, const FlowMap& b,
                                        std::span<const Point3> points,
                                        std::span<const double> times) {
  if (points.empty()) throw DomainError("need at least one point");
  const std::size_t chunks = chunk_count(points.size(), kChunk);
  // partial[k * chunks + c]: chunk c's sum at time k; summed in chunk order.
  std::vector<double> partial(times.size() * chunks, 0.0);
  parallel_for(chunks, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const std::size_t last = std::min(points.size(), (c + 1) * kChunk);
      for (std::size_t k = 0; k < times.size(); ++k) {
        double sum = 0.0;
        for (std::size_t i = c * kChunk; i < last; ++i) {
          sum += distance(a(times[k], points[i]), b(times[k], points[i]));
        }
        partial[k * chunks + c] = sum;
      }
    }
  });
  std::vector<double> profile(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) sum += partial[k * chunks + c];
    profile[k] = sum / static_cast<double>(points.size());
  }
  return profile;
}

double l1_flow_distance(const FlowMap& a, const FlowMap& b, const RegionSpec& region,
                        std::span<const double> times, std::size_t samples,
                        std::uint64_t seed) {
  const auto points = sample_paraboloid(region, samples, seed);
  const auto profile = l1_distance_profile(a, b, points, times);
  return profile.empty() ? 0.0 : *std::max_element(profile.begin(), profile.end());
}

void append_experiment_log(const std::filesystem::path& path,
                           const std::string& experiment, double eps, double theta,
                           double t_max, double distance) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open experiment log " + path.string());
  if (fresh) out << "experiment,eps,theta,t_max,distance\n";
  out << experiment << ',' << format_double(eps) << ',' << format_double(theta) << ','
      << format_double(t_max) << ',' << format_double(distance) << '\n';
}

}  // namespace roughflow
