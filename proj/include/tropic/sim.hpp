#pragma once

// Time loop, asymptotic average-flow estimation and MFD sweeps.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tropic/network.hpp"
#include "tropic/tuc.hpp"

namespace tropic {

/// Centralized controller: problem and solved gain.
struct TucController {
  LqrProblem problem;
  LqrGain gain;
};

TucController make_tuc(const Network& net, const NetworkState& state, double state_weight = 1.0,
                       double control_weight = 1.0, double nominal_flow = -1.0);

/// Called after every step with the states before and after it and the
/// controls applied (empty unless Tuc).
using StepHook =
    std::function<void(const NetworkState& before, const NetworkState& after, std::span<const double> controls)>;

struct RunOptions {
  std::int64_t steps = 2000;
  std::int64_t dump_stride = 0;  // 0: no occupancy snapshots
  double state_weight = 1.0;
  double control_weight = 1.0;
  double nominal_flow = -1.0;  // negative: default nominal outflow
  /// Reused instead of solving a fresh gain (the gain depends only on the
  /// wiring and the weights).
  std::shared_ptr<const LqrGain> tuc_gain;
  StepHook hook;
  double magnitude_cap = kDefaultMagnitudeCap;
};

struct Snapshot {
  std::int64_t t = 0;
  Vector occupancy;  // cell order
};

struct RunResult {
  std::int64_t steps = 0;
  Vector mean_flow;  // mean cumulated flow over all ports, t = 0..steps
  std::vector<Snapshot> snapshots;
  double avg_flow = 0.0;
  bool converged = false;
  double initial_total = 0.0;
  double final_total = 0.0;
  double max_conservation_error = 0.0;
  NetworkState final_state;
};

struct FlowEstimate {
  double avg_flow = 0.0;
  bool converged = false;
  double slope_q3 = 0.0;  // third-quarter window
  double slope_q4 = 0.0;  // last quarter
};

/// Least-squares slope over the last half; converged when the two quarter
/// slopes differ by less than 1e-3. Needs at least 200 steps.
FlowEstimate average_flow(std::span<const double> mean_flow);
FlowEstimate average_flow(const RunResult& r);

/// Throws DivergenceError when a cumulated flow leaves the magnitude cap.
RunResult run(const Network& net, NetworkState state, const RunOptions& opt = {});

struct MfdPoint {
  PolicyKind policy = PolicyKind::Priority;
  double density = 0.0;
  std::uint64_t seed = 0;
  double avg_flow = 0.0;
  bool converged = false;
  bool ok = true;
  std::string error;
};

struct SweepOptions {
  std::vector<PolicyKind> policies;  // empty: the config's policy
  std::vector<double> densities;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::int64_t steps = 2000;
  unsigned jobs = 0;  // 0: hardware concurrency
  double state_weight = 1.0;
  double control_weight = 1.0;
  double nominal_flow = -1.0;
  double magnitude_cap = kDefaultMagnitudeCap;
};

/// Points in input order (policy, density, seed). A failing point is kept
/// with ok = false and a NaN flow; the others are unaffected.
std::vector<MfdPoint> mfd_sweep(const CityConfig& cfg, const SweepOptions& opt);

}  // namespace tropic
