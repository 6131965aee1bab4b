#include "roughflow/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "roughflow/errors.hpp"

namespace roughflow {

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void write_trajectory_csv(
    std::ostream& out,
    const std::vector<std::pair<std::int64_t, Trajectory>>& trajectories) {
  std::vector<const std::pair<std::int64_t, Trajectory>*> order;
  order.reserve(trajectories.size());
  for (const auto& entry : trajectories) order.push_back(&entry);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->first < b->first; });

  out << "id,t,x,y,z\n";
  for (const auto* entry : order) {
    const Trajectory& traj = entry->second;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const Point3& p = traj.points[i];
      out << entry->first << ',' << format_double(traj.times[i]) << ','
          << format_double(p.x) << ',' << format_double(p.y) << ','
          << format_double(p.z) << '\n';
    }
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ConfigError("empty entry in number list '" + text + "'");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw ConfigError("not a number: '" + item + "'");
    }
    values.push_back(v);
    start = end + 1;
  }
  return values;
}

}  // namespace roughflow
