#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "roughflow/analytic_flows.hpp"

namespace roughflow {

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Trajectory CSV: header `id,t,x,y,z`, rows ordered by (id, t).
void write_trajectory_csv(
    std::ostream& out,
    const std::vector<std::pair<std::int64_t, Trajectory>>& trajectories);

/// Splits "a,b,c" into numbers; throws ConfigError on malformed input.
[[nodiscard]] std::vector<double> parse_number_list(const std::string& text);

}  // namespace roughflow
