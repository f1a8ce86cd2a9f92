#pragma once

// Command-line front end: JSON run configuration, result formats and the
// run / mfd / inspect commands.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tropic/network.hpp"
#include "tropic/sim.hpp"

namespace tropic {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitDivergence = 3, kExitUnknownElement = 4 };

/// Schema violation; the message starts with the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  CityConfig city;
  std::int64_t steps = 2000;
  std::vector<double> densities;  // sweep grid; defaults to 0:1:0.05
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<PolicyKind> policies;  // sweep policies; defaults to city.policy
  double state_weight = 1.0;
  double control_weight = 1.0;
  double nominal_flow = -1.0;
  double magnitude_cap = kDefaultMagnitudeCap;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// "a:b:step", inclusive of b up to rounding.
std::vector<double> parse_density_range(const std::string& spec);

/// Shortest round-trip decimal; "inf" and "nan" for the special values.
std::string format_double(double v);

/// Header policy,density,seed,avg_flow,converged; rows sorted by policy
/// name, density, seed. Failed points carry avg_flow nan, converged false.
std::string mfd_csv(const std::vector<MfdPoint>& points);
/// Line plot of the per-policy mean flow against density.
std::string mfd_svg(const std::vector<MfdPoint>& points);
/// t,cell_id,occupancy for every recorded snapshot.
std::string states_csv(const RunResult& r);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& content);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tropic
