#pragma once

// One-way road of m unit sections under the normalized triangular
// fundamental diagram, in cumulated-flow (Moskowitz) variables.

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tropic/minplus.hpp"

namespace tropic {

/// q = min(v rho, w (rho_jam - rho)); only the normalized diagram exists.
struct FundamentalDiagram {
  double v = 1.0;
  double w = 1.0;
  double rho_jam = 1.0;

  double q_max() const { return rho_jam / (1.0 / v + 1.0 / w); }
  double flow(double rho) const;

  static FundamentalDiagram normalized() { return {}; }
};

inline constexpr double kCapacity = 0.5;

/// Cumulated boundary profiles: upstream demand and downstream supply,
/// both nondecreasing and expressed in pelotons.
struct BoundaryProfile {
  std::function<double(std::int64_t)> delta0;
  std::function<double(std::int64_t)> sigma_out;

  static BoundaryProfile unconstrained();
  static BoundaryProfile constant_rate(double inflow_rate, double outflow_rate);
  /// Tabulated values; the last entry is held for later times.
  static BoundaryProfile tabulated(std::vector<double> delta0, std::vector<double> sigma_out);
};

/// Effectively infinite cumulated boundary value.
inline constexpr double kUnconstrained = 1e9;

struct LinkSpec {
  std::size_t m = 1;
  std::vector<double> n0;  // binary initial occupancies, one per section
  std::optional<BoundaryProfile> boundary;
  bool closed = false;
};

/// Throws std::invalid_argument when the spec breaks an invariant.
void validate(const LinkSpec& spec);

struct LinkState {
  std::int64_t t = 0;
  Vector Q;  // open: Q_0..Q_m; closed: Q_0..Q_{m-1}, Q_i leaving section i
  Vector n;  // current occupancies
};

LinkState initial_state(const LinkSpec& spec);

struct LinkMatrices {
  MinPlusMatrix A;
  BoundaryProfile boundary;

  Vector b(std::int64_t t) const;
};

LinkMatrices build_link_matrices(const LinkSpec& spec);
MinPlusMatrix build_ring_matrix(const LinkSpec& spec);

LinkState step_link(const LinkState& state, const LinkSpec& spec);

/// n_i(t) = n_i(0) + Q_{i-1}(t) - Q_i(t)
Vector occupancies(const LinkSpec& spec, std::span<const double> q);

/// (delta, sigma) = (min(rho, 1/2), min(1/2, 1 - rho))
std::pair<double, double> demand_supply(double rho);

}  // namespace tropic
