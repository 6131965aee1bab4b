#include "roughflow/circle_maps.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "roughflow/csv_io.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/random.hpp"

namespace roughflow {
namespace {

constexpr std::size_t kChunk = 1 << 16;

// Pulls (cos, sin) back inside the closed unit disc when rounding puts
// cos^2 + sin^2 just above 1, so the lifted point stays on P.
Point3 lift(double theta, double z) {
  Point3 p{std::cos(theta), std::sin(theta), z};
  while (p.x * p.x + p.y * p.y > 1.0) {
    p.x *= 1.0 - 0x1.0p-52;
    p.y *= 1.0 - 0x1.0p-52;
  }
  return p;
}

}  // namespace

CircleMap builtin(BuiltinMap kind, double angle) {
  switch (kind) {
    case BuiltinMap::Rotation: return CircleMap::rotation(angle);
    case BuiltinMap::Psi1: return CircleMap::psi1();
    case BuiltinMap::Psi2: return CircleMap::psi2();
    case BuiltinMap::Constant: return CircleMap::constant(angle);
    case BuiltinMap::Identity: return CircleMap::identity();
  }
  throw DomainError("unknown builtin map");
}

BuiltinMap parse_builtin_map(std::string_view name) {
  if (name == "rotation") return BuiltinMap::Rotation;
  if (name == "psi1") return BuiltinMap::Psi1;
  if (name == "psi2") return BuiltinMap::Psi2;
  if (name == "constant") return BuiltinMap::Constant;
  if (name == "identity") return BuiltinMap::Identity;
  throw ConfigError("unknown circle map '" + std::string(name) + "'");
}

Point3 lift_upper(double theta) { return lift(theta, 1.0); }
Point3 lift_lower(double theta) { return lift(theta, -1.0); }

Histogram pushforward_histogram(const CircleMap& map, std::size_t bins,
                                std::size_t samples, std::uint64_t seed) {
  if (bins < 2) throw DomainError("histogram needs at least 2 bins");
  if (samples < bins) throw DomainError("need at least one sample per bin");

  const std::size_t chunks = chunk_count(samples, kChunk);
  std::vector<std::vector<std::uint64_t>> partial(chunks);
  const double stratum = kTwoPi / static_cast<double>(samples);
  parallel_for(chunks, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng(seed, c);
      auto& counts = partial[c];
      counts.assign(bins, 0);
      const std::size_t last = std::min(samples, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < last; ++i) {
        const double theta = (static_cast<double>(i) + rng.uniform()) * stratum;
        const double value = map(std::min(theta, kTwoPi));
        auto bin = static_cast<std::size_t>(value / kTwoPi * static_cast<double>(bins));
        counts[std::min(bin, bins - 1)] += 1;
      }
    }
  });

  Histogram h{bins, std::vector<std::uint64_t>(bins, 0), samples};
  for (const auto& counts : partial) {
    for (std::size_t b = 0; b < bins; ++b) h.counts[b] += counts[b];
  }
  return h;
}

double max_relative_deviation(const Histogram& h) {
  const double expected =
      static_cast<double>(h.total) / static_cast<double>(h.bin_count);
  double worst = 0.0;
  for (auto c : h.counts) {
    worst = std::max(worst, std::fabs(static_cast<double>(c) / expected - 1.0));
  }
  return worst;
}

bool is_measure_preserving(const CircleMap& map, std::size_t bins,
                           std::size_t samples, std::uint64_t seed, double tol) {
  return max_relative_deviation(pushforward_histogram(map, bins, samples, seed)) <= tol;
}

CircleMap extract_psi(const FlowMap& flow, std::size_t grid) {
  std::vector<double> table(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    const double theta = CircleMap::grid_angle(k, grid);
    const Point3 image = flow(0.5, lift_upper(theta));
    const double radius = std::hypot(image.x, image.y);
    if (std::fabs(radius - 1.0) > 1e-8 || std::fabs(image.z + 1.0) > 1e-8) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "X(1/2, I+(" << theta << ")) = (" << image.x << ", " << image.y
          << ", " << image.z << ") is not on the lower unit circle";
      throw InconsistentFlowError(msg.str());
    }
    table[k] = wrap_angle(std::atan2(image.y, image.x));
  }
  return CircleMap::sampled(std::move(table));
}

FlowSpec build_flow_from_psi(const CircleMap& map) {
  return FlowSpec::general(map);
}

ConeMeasure cone_set_measure_check(const std::vector<AngleInterval>& angle_set,
                                   std::size_t samples, std::uint64_t seed) {
  std::vector<AngleInterval> sorted = angle_set;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.lo < b.lo; });
  double arc = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& iv = sorted[i];
    if (!(iv.lo >= 0.0 && iv.lo <= iv.hi && iv.hi <= kTwoPi)) {
      throw DomainError("angle intervals must satisfy 0 <= lo <= hi <= 2pi");
    }
    if (i > 0 && iv.lo < sorted[i - 1].hi) {
      throw DomainError("angle intervals must be pairwise disjoint");
    }
    arc += iv.hi - iv.lo;
  }
  if (sorted.empty() || arc == 0.0) return {0.0, arc, 0.0};
  if (samples == 0) throw DomainError("need at least one sample");

  const auto in_set = [&](double theta) {
    return std::any_of(sorted.begin(), sorted.end(), [&](const auto& iv) {
      return theta >= iv.lo && theta <= iv.hi;
    });
  };

  // Uniform samples of the box [-1, 1]^2 x [-1, 0], volume 4.
  const std::size_t chunks = chunk_count(samples, kChunk);
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_for(chunks, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng(seed, c);
      const std::size_t last = std::min(samples, (c + 1) * kChunk);
      std::uint64_t local = 0;
      for (std::size_t i = c * kChunk; i < last; ++i) {
        const Point3 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), -rng.uniform()};
        if (p.x * p.x + p.y * p.y > -p.z) continue;
        if (in_set(to_cylindrical(p).theta)) ++local;
      }
      hits[c] = local;
    }
  });
  std::uint64_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  const double n = static_cast<double>(samples);
  const double fraction = static_cast<double>(total_hits) / n;
  constexpr double kBoxVolume = 4.0;
  return {4.0 * kBoxVolume * fraction, arc,
          4.0 * kBoxVolume * std::sqrt(fraction * (1.0 - fraction) / n)};
}

void write_circle_map_csv(std::ostream& out, const CircleMap& map,
                          std::size_t grid) {
  out << "theta,psi_theta\n";
  for (std::size_t k = 0; k < grid; ++k) {
    const double theta = CircleMap::grid_angle(k, grid);
    out << format_double(theta) << ',' << format_double(map(theta)) << '\n';
  }
}

CircleMap read_circle_map_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "theta,psi_theta") {
    throw ConfigError("circle map CSV must start with header 'theta,psi_theta'");
  }
  std::vector<double> thetas;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = parse_number_list(line);
    if (row.size() != 2) throw ConfigError("circle map CSV rows need 2 columns");
    thetas.push_back(row[0]);
    values.push_back(row[1]);
  }
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (std::fabs(thetas[k] - CircleMap::grid_angle(k, thetas.size())) > 1e-12) {
      throw ConfigError("circle map CSV is not on a uniform grid");
    }
  }
  return CircleMap::sampled(std::move(values));
}

}  // namespace roughflow
