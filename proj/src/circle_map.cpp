#include "roughflow/circle_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roughflow/errors.hpp"

namespace roughflow {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Signed difference b - a reduced to (-pi, pi].
double shortest_arc(double a, double b) {
  double d = std::fmod(b - a, kTwoPi);
  if (d > kPi) d -= kTwoPi;
  if (d <= -kPi) d += kTwoPi;
  return d;
}

}  // namespace

CircleMap CircleMap::rotation(double theta) { return CircleMap(Rotation{theta}); }
CircleMap CircleMap::psi1() { return CircleMap(Psi1{}); }
CircleMap CircleMap::psi2() { return CircleMap(Psi2{}); }
CircleMap CircleMap::constant(double alpha) { return CircleMap(Constant{alpha}); }

CircleMap CircleMap::sampled(std::vector<double> table) {
  if (table.size() < 2) throw DomainError("sampled map needs at least 2 values");
  for (double& v : table) {
    if (!std::isfinite(v)) throw DomainError("sampled map value is not finite");
    v = wrap_angle(v);
  }
  return CircleMap(
      Sampled{std::make_shared<const std::vector<double>>(std::move(table))});
}

double CircleMap::grid_angle(std::size_t k, std::size_t n) {
  return kTwoPi * static_cast<double>(k) / static_cast<double>(n);
}

double CircleMap::operator()(double theta) const {
  if (!(theta >= 0.0 && theta <= kTwoPi)) theta = wrap_angle(theta);
  return std::visit(
      Overloaded{
          [&](const Rotation& r) { return wrap_angle(theta + r.theta); },
          [&](const Psi1&) {
            return theta < kPi ? theta : wrap_angle(3.0 * kPi - theta);
          },
          [&](const Psi2&) {
            return theta < kPi ? wrap_angle(2.0 * theta)
                               : wrap_angle(2.0 * (theta - kPi));
          },
          [&](const Constant& c) { return wrap_angle(c.alpha); },
          [&](const Sampled& s) {
            const auto& t = *s.table;
            const std::size_t n = t.size();
            const double pos = theta / kTwoPi * static_cast<double>(n);
            // Grid angles do not divide back to integers exactly.
            const double nearest = std::round(pos);
            if (std::fabs(pos - nearest) <= 1e-12 * static_cast<double>(n)) {
              return t[static_cast<std::size_t>(nearest) % n];
            }
            auto k = static_cast<std::size_t>(pos);
            if (k >= n) k = 0;  // theta == 2pi lands on grid point 0
            const double frac = std::clamp(pos - std::floor(pos), 0.0, 1.0);
            if (frac == 0.0) return t[k];
            const double a = t[k];
            const double b = t[(k + 1) % n];
            return wrap_angle(a + frac * shortest_arc(a, b));
          },
      },
      kind_);
}

std::string CircleMap::name() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const Rotation& r) { out << "rotation(" << r.theta << ")"; },
                 [&](const Psi1&) { out << "psi1"; },
                 [&](const Psi2&) { out << "psi2"; },
                 [&](const Constant& c) { out << "constant(" << c.alpha << ")"; },
                 [&](const Sampled& s) { out << "sampled(" << s.table->size() << ")"; },
             },
             kind_);
  return out.str();
}

bool CircleMap::invertible() const {
  return std::holds_alternative<Rotation>(kind_) ||
         std::holds_alternative<Psi1>(kind_);
}

std::optional<CircleMap> CircleMap::inverse() const {
  if (const auto* r = std::get_if<Rotation>(&kind_)) return rotation(-r->theta);
  if (std::holds_alternative<Psi1>(kind_)) return psi1();  // involution
  return std::nullopt;
}

std::vector<double> CircleMap::breakpoints() const {
  return std::visit(Overloaded{
                        [](const Rotation&) { return std::vector<double>{}; },
                        [](const Psi1&) { return std::vector<double>{0.0, kPi}; },
                        [](const Psi2&) { return std::vector<double>{}; },
                        [](const Constant&) { return std::vector<double>{}; },
                        [](const Sampled&) { return std::vector<double>{0.0}; },
                    },
                    kind_);
}

CircleMap tabulate(const CircleMap& map, std::size_t n) {
  std::vector<double> table(n);
  for (std::size_t k = 0; k < n; ++k) table[k] = map(CircleMap::grid_angle(k, n));
  return CircleMap::sampled(std::move(table));
}

}  // namespace roughflow
