#pragma once

// Regular grid city of one-way avenues with alternating directions,
// optionally wrapped on a torus, and the single-ring degenerate city.
//
// Junction (r, c) owns its two inbound roads: road 2k is the vertical one
// (road 1 of the intersection, with priority), road 2k+1 the horizontal one
// (road 2), where k = r * cols + c. Its outbound roads 3 and 4 are the
// inbound roads of the next junctions along the column and the row.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tropic/compose.hpp"
#include "tropic/junction.hpp"
#include "tropic/link.hpp"

namespace tropic {

enum class Topology { Grid, Ring };
enum class PolicyKind { Priority, FixedLights, ProportionalLights, Tuc };
enum class Placement { UniformSpacing, SeededRandom, Clustered };

std::string to_string(PolicyKind p);
std::string to_string(Placement p);
std::optional<PolicyKind> parse_policy(const std::string& s);
std::optional<Placement> parse_placement(const std::string& s);

struct CityConfig {
  Topology topology = Topology::Grid;
  int rows = 4;
  int cols = 4;
  std::size_t sections_per_road = 5;  // ring length for the ring topology
  bool torus = true;
  PolicyKind policy = PolicyKind::Priority;
  SignalPlan signal = equal_green_plan();
  double density = 0.5;
  std::uint64_t seed = 1;
  Placement placement = Placement::UniformSpacing;
  double inflow_rate = 0.25;  // open grids: Delta0(t) = rate * t on entering roads
};

/// Throws std::invalid_argument naming the offending field.
void validate(const CityConfig& cfg);

enum class Orientation { Vertical, Horizontal };

struct Road {
  std::size_t id = 0;
  Orientation orientation = Orientation::Vertical;
  int heading = 1;                 // +1 south/east, -1 north/west
  std::optional<std::size_t> from;  // upstream junction; empty at an open boundary
  std::optional<std::size_t> to;    // downstream junction; empty for the ring
};

struct Node {
  std::size_t id = 0;
  int row = 0;
  int col = 0;
  std::size_t in1 = 0;  // vertical inbound
  std::size_t in2 = 0;  // horizontal inbound
  std::optional<std::size_t> out3;  // vertical outbound; empty at an open boundary
  std::optional<std::size_t> out4;  // horizontal outbound
};

struct Network {
  CityConfig cfg;
  std::size_t m = 1;
  std::vector<Road> roads;
  std::vector<Node> nodes;

  bool closed() const { return cfg.topology == Topology::Ring || cfg.torus; }
  bool is_ring() const { return cfg.topology == Topology::Ring; }
  /// Road sections plus junction node cells.
  std::size_t cell_count() const { return roads.size() * m + nodes.size(); }
  /// Cumulated-flow ports, each counted once.
  std::size_t port_count() const { return is_ring() ? m : roads.size() * (m + 1); }
};

Network build_city(const CityConfig& cfg);

/// Resolution of the city's cumulated counters. Node outflow splits, Tuc
/// quanta and boundary inflows are rounded to it, so every other sum and
/// difference is exact in doubles while counters stay below 2^22.
inline constexpr double kFlowGrid = 0x1p-30;

/// Initial occupancies: the constants of the dynamics.
struct InitialData {
  std::vector<Vector> road_n0;  // per road, m binary entries
  Vector node_n0;               // per junction
  std::size_t occupied = 0;
  double density = 0.0;  // achieved
};

struct NetworkState {
  std::int64_t t = 0;
  std::vector<LinkState> roads;  // open-link layout Q_0..Q_m (ring: Q_0..Q_{m-1})
  std::vector<JunctionState> junctions;
  std::vector<SignalPlan> plans;  // current plan per junction (light policies)
  std::shared_ptr<const InitialData> init;
};

/// Places round(d * cells) vehicles. Cells are ordered junction by junction:
/// the sections of its vertical inbound road, then its horizontal inbound road,
/// then its node cell. UniformSpacing spreads vehicles evenly over junctions
/// and within each; SeededRandom samples cells without replacement;
/// Clustered fills the first cells in that order.
NetworkState seed_density(const Network& net, double d, Placement placement, std::uint64_t seed);

/// State built from explicit initial occupancies.
NetworkState make_state(const Network& net, InitialData init);

/// One synchronous step from time-t values. Under Tuc, controls holds one
/// outflow quantum per road gating its downstream junction entry.
NetworkState step_network(const Network& net, const NetworkState& state,
                          std::span<const double> controls = {});

/// Occupancies in cell order.
Vector cell_occupancies(const Network& net, const NetworkState& state);
double total_vehicles(const Network& net, const NetworkState& state);
/// Sum of all cumulated-flow ports.
double total_cumulated_flow(const Network& net, const NetworkState& state);

/// Mean occupancy of the last min(5, m) sections of a road.
double stop_line_density(const Network& net, const NetworkState& state, std::size_t road);

/// Link spec of a road with its initial occupancies (open roads carry the
/// upstream boundary or an unconstrained placeholder).
LinkSpec road_spec(const Network& net, const InitialData& init, std::size_t road);
JunctionSpec junction_spec(const Network& net, const InitialData& init, std::size_t node);

/// Topology as JSON text: counts, nodes, directed roads, wiring.
std::string topology_text(const Network& net);

/// The whole priority city on a torus assembled by connect over elementary
/// systems (sections, intersection entries and exits).
struct ComposedCity {
  SystemBlock system;
  SystemState state;
  std::vector<std::size_t> split_floor, split_ceil;  // node outflows rounded to the grid
};

ComposedCity compose_city(const Network& net, const InitialData& init);
ComposedCity step_composed(const ComposedCity& c);
/// Reads the flat state back from the composed one.
NetworkState read_composed(const Network& net, const ComposedCity& c,
                           const std::shared_ptr<const InitialData>& init);

}  // namespace tropic
