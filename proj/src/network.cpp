#include "tropic/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace tropic {

namespace {

std::size_t wrap(int v, int n) { return static_cast<std::size_t>(((v % n) + n) % n); }

// Bresenham distribution: slot s of n receives floor((s+1)k/n) - floor(sk/n).
std::size_t share(std::size_t s, std::size_t n, std::size_t k) {
  return (s + 1) * k / n - s * k / n;
}

// Uniform integer in [0, n) from raw 64-bit draws, rejection-sampled so the
// result does not depend on the standard library's distributions.
std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

double grid_floor(double v) { return std::floor(v / kFlowGrid) * kFlowGrid; }
double grid_ceil(double v) { return std::ceil(v / kFlowGrid) * kFlowGrid; }

double boundary_inflow(const CityConfig& cfg, std::int64_t t) {
  return grid_floor(cfg.inflow_rate * static_cast<double>(t));
}

std::string exit_name(std::size_t k, Orientation o) {
  return "j" + std::to_string(k) + (o == Orientation::Vertical ? ".x3" : ".x4");
}
std::string entry_name(std::size_t k, Orientation o) {
  return "j" + std::to_string(k) + (o == Orientation::Vertical ? ".e1" : ".e2");
}
std::string section_name(std::size_t road, std::size_t i) {
  return "r" + std::to_string(road) + ".s" + std::to_string(i);
}

}  // namespace

std::string to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Priority: return "priority";
    case PolicyKind::FixedLights: return "fixed";
    case PolicyKind::ProportionalLights: return "proportional";
    case PolicyKind::Tuc: return "tuc";
  }
  return "?";
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::UniformSpacing: return "uniform";
    case Placement::SeededRandom: return "random";
    case Placement::Clustered: return "clustered";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(const std::string& s) {
  for (auto p : {PolicyKind::Priority, PolicyKind::FixedLights, PolicyKind::ProportionalLights,
                 PolicyKind::Tuc})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::optional<Placement> parse_placement(const std::string& s) {
  for (auto p : {Placement::UniformSpacing, Placement::SeededRandom, Placement::Clustered})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

void validate(const CityConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
  };
  if (cfg.topology == Topology::Grid) {
    if (cfg.rows < 2) fail("rows", "must be >= 2");
    if (cfg.cols < 2) fail("cols", "must be >= 2");
    if (cfg.sections_per_road < 1) fail("sections_per_road", "must be >= 1");
  } else if (cfg.sections_per_road < 2) {
    fail("sections_per_road", "a ring needs at least 2 sections");
  }
  if (!(cfg.density >= 0.0 && cfg.density <= 1.0)) fail("density", "must lie in [0, 1]");
  if (!(cfg.inflow_rate >= 0.0)) fail("inflow_rate", "must be >= 0");
  try {
    validate(cfg.signal);
  } catch (const std::invalid_argument& e) {
    fail("signal", e.what());
  }
}

Network build_city(const CityConfig& cfg) {
  validate(cfg);
  Network net;
  net.cfg = cfg;
  net.m = cfg.sections_per_road;
  if (cfg.topology == Topology::Ring) {
    net.roads.push_back(Road{0, Orientation::Horizontal, 1, std::nullopt, std::nullopt});
    return net;
  }
  const int R = cfg.rows, C = cfg.cols;
  auto id = [C](int r, int c) { return static_cast<std::size_t>(r * C + c); };
  auto inside = [&](int r, int c) { return cfg.torus || (r >= 0 && r < R && c >= 0 && c < C); };

  net.nodes.resize(static_cast<std::size_t>(R * C));
  net.roads.resize(2 * net.nodes.size());
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      const std::size_t k = id(r, c);
      const int vh = (c % 2 == 0) ? 1 : -1;  // column heading, +1 southbound
      const int hh = (r % 2 == 0) ? 1 : -1;  // row heading, +1 eastbound
      Node& nd = net.nodes[k];
      nd.id = k;
      nd.row = r;
      nd.col = c;
      nd.in1 = 2 * k;
      nd.in2 = 2 * k + 1;
      if (inside(r + vh, c)) nd.out3 = 2 * id(static_cast<int>(wrap(r + vh, R)), c);
      if (inside(r, c + hh)) nd.out4 = 2 * id(r, static_cast<int>(wrap(c + hh, C))) + 1;

      Road& v = net.roads[nd.in1];
      v.id = nd.in1;
      v.orientation = Orientation::Vertical;
      v.heading = vh;
      v.to = k;
      if (inside(r - vh, c)) v.from = id(static_cast<int>(wrap(r - vh, R)), c);

      Road& h = net.roads[nd.in2];
      h.id = nd.in2;
      h.orientation = Orientation::Horizontal;
      h.heading = hh;
      h.to = k;
      if (inside(r, c - hh)) h.from = id(r, static_cast<int>(wrap(c - hh, C)));
    }
  }
  return net;
}

NetworkState make_state(const Network& net, InitialData init) {
  if (init.road_n0.size() != net.roads.size() || init.node_n0.size() != net.nodes.size())
    throw DimensionError("initial data does not match the network");
  for (const auto& n0 : init.road_n0)
    if (n0.size() != net.m) throw DimensionError("initial data: wrong road length");
  NetworkState s;
  const auto cells = net.cell_count();
  double occ = 0;
  for (const auto& n0 : init.road_n0) occ += std::accumulate(n0.begin(), n0.end(), 0.0);
  occ += std::accumulate(init.node_n0.begin(), init.node_n0.end(), 0.0);
  init.occupied = static_cast<std::size_t>(occ);
  init.density = cells ? occ / static_cast<double>(cells) : 0.0;

  s.roads.resize(net.roads.size());
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    s.roads[r].Q.assign(net.is_ring() ? net.m : net.m + 1, 0.0);
    s.roads[r].n = init.road_n0[r];
  }
  s.junctions.resize(net.nodes.size());
  for (std::size_t k = 0; k < net.nodes.size(); ++k) s.junctions[k].n0 = init.node_n0[k];
  s.plans.assign(net.nodes.size(), net.cfg.signal);
  s.init = std::make_shared<const InitialData>(std::move(init));
  return s;
}

NetworkState seed_density(const Network& net, double d, Placement placement, std::uint64_t seed) {
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("density: must lie in [0, 1]");
  const std::size_t n_cells = net.cell_count();
  const auto k = static_cast<std::size_t>(std::llround(d * static_cast<double>(n_cells)));
  std::vector<char> occ(n_cells, 0);

  switch (placement) {
    case Placement::Clustered:
      std::fill_n(occ.begin(), k, 1);
      break;
    case Placement::SeededRandom: {
      std::vector<std::size_t> idx(n_cells);
      std::iota(idx.begin(), idx.end(), 0);
      std::mt19937_64 gen(seed);
      for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(gen, n_cells - i));
        std::swap(idx[i], idx[j]);
        occ[idx[i]] = 1;
      }
      break;
    }
    case Placement::UniformSpacing: {
      const std::size_t units = net.is_ring() ? 1 : net.nodes.size();
      const std::size_t unit_size = n_cells / units;
      for (std::size_t u = 0; u < units; ++u) {
        const std::size_t ku = share(u, units, k);
        for (std::size_t c = 0; c < unit_size; ++c)
          if (share(c, unit_size, ku)) occ[u * unit_size + c] = 1;
      }
      break;
    }
  }

  InitialData init;
  const std::size_t m = net.m;
  if (net.is_ring()) {
    init.road_n0.push_back(Vector(occ.begin(), occ.end()));
  } else {
    init.road_n0.assign(net.roads.size(), Vector(m, 0.0));
    init.node_n0.assign(net.nodes.size(), 0.0);
    const std::size_t unit = 2 * m + 1;
    for (std::size_t j = 0; j < net.nodes.size(); ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        init.road_n0[net.nodes[j].in1][i] = occ[j * unit + i];
        init.road_n0[net.nodes[j].in2][i] = occ[j * unit + m + i];
      }
      init.node_n0[j] = occ[j * unit + 2 * m];
    }
  }
  return make_state(net, std::move(init));
}

LinkSpec road_spec(const Network& net, const InitialData& init, std::size_t road) {
  LinkSpec spec;
  spec.m = net.m;
  spec.n0 = init.road_n0.at(road);
  if (net.is_ring()) {
    spec.closed = true;
    return spec;
  }
  const CityConfig cfg = net.cfg;
  if (net.roads[road].from) {
    spec.boundary = BoundaryProfile::unconstrained();
  } else {
    spec.boundary = BoundaryProfile{[cfg](std::int64_t t) { return boundary_inflow(cfg, t); },
                                    [](std::int64_t) { return kUnconstrained; }};
  }
  return spec;
}

JunctionSpec junction_spec(const Network& net, const InitialData& init, std::size_t node) {
  JunctionSpec spec;
  spec.n0_init = init.node_n0.at(node);
  switch (net.cfg.policy) {
    case PolicyKind::FixedLights: spec.policy = FixedLights{net.cfg.signal}; break;
    case PolicyKind::ProportionalLights: spec.policy = ProportionalLights{net.cfg.signal}; break;
    default: spec.policy = PriorityRule{};
  }
  return spec;
}

double stop_line_density(const Network& net, const NetworkState& state, std::size_t road) {
  const std::size_t m = net.m;
  const std::size_t w = std::min<std::size_t>(5, m);
  const auto& n0 = state.init->road_n0[road];
  const auto& q = state.roads[road].Q;
  double sum = 0;
  for (std::size_t i = m - w; i < m; ++i) sum += n0[i] + q[i] - q[i + 1];
  return sum / static_cast<double>(w);
}

NetworkState step_network(const Network& net, const NetworkState& state,
                          std::span<const double> controls) {
  const InitialData& init = *state.init;
  const std::size_t m = net.m;
  const std::int64_t t = state.t;
  NetworkState next;
  next.t = t + 1;
  next.init = state.init;
  next.plans = state.plans;

  if (net.is_ring()) {
    LinkSpec spec{m, init.road_n0[0], std::nullopt, true};
    next.roads = {step_link(state.roads[0], spec)};
    return next;
  }

  const CityConfig& cfg = net.cfg;
  if (cfg.policy == PolicyKind::Tuc && controls.size() != net.roads.size())
    throw DimensionError("step_network: Tuc needs one control per road");

  next.roads.resize(net.roads.size());
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    const auto& q = state.roads[r].Q;
    const auto& n0 = init.road_n0[r];
    Vector nq = q;
    for (std::size_t i = 1; i < m; ++i)
      nq[i] = std::min(q[i - 1] + n0[i - 1], q[i + 1] + (1.0 - n0[i]));
    if (!net.roads[r].from) nq[0] = std::min(boundary_inflow(cfg, t), q[1] + (1.0 - n0[0]));
    next.roads[r].Q = std::move(nq);
    next.roads[r].t = t + 1;
  }

  if (cfg.policy == PolicyKind::ProportionalLights && t % cfg.signal.c == 0) {
    for (std::size_t k = 0; k < net.nodes.size(); ++k)
      next.plans[k] = proportional_green(cfg.signal, stop_line_density(net, state, net.nodes[k].in1),
                                         stop_line_density(net, state, net.nodes[k].in2));
  }

  next.junctions.resize(net.nodes.size());
  for (std::size_t k = 0; k < net.nodes.size(); ++k) {
    const Node& nd = net.nodes[k];
    JunctionSpec spec;
    spec.n0_init = init.node_n0[k];
    const auto& q1 = state.roads[nd.in1].Q;
    const auto& q2 = state.roads[nd.in2].Q;
    const Upstream up{q1[m - 1], init.road_n0[nd.in1][m - 1], q2[m - 1],
                      init.road_n0[nd.in2][m - 1]};
    Downstream down{kUnconstrained, 0.0, kUnconstrained, 0.0};
    if (nd.out3) {
      down.q32 = state.roads[*nd.out3].Q[1];
      down.nbar31 = 1.0 - init.road_n0[*nd.out3][0];
    }
    if (nd.out4) {
      down.q42 = state.roads[*nd.out4].Q[1];
      down.nbar41 = 1.0 - init.road_n0[*nd.out4][0];
    }
    const JunctionState& s = state.junctions[k];
    JunctionState js;
    switch (cfg.policy) {
      case PolicyKind::Priority: js = step_priority(s, spec, up, down); break;
      case PolicyKind::FixedLights: js = step_signalized(s, spec, up, down, cfg.signal, t); break;
      case PolicyKind::ProportionalLights:
        js = step_signalized(s, spec, up, down, next.plans[k], t);
        break;
      case PolicyKind::Tuc: {
        // The controller allocates the node: when the requested outflows
        // exceed the free space, it is split in their proportion.
        double g1 = std::clamp(controls[nd.in1], 0.0, kCapacity);
        double g2 = std::clamp(controls[nd.in2], 0.0, kCapacity);
        const double room = std::max(0.0, 1.0 - s.n0);
        if (g1 + g2 > room) {
          const double f = room / (g1 + g2);
          g1 *= f;
          g2 *= f;
        }
        g1 = grid_floor(g1);
        g2 = grid_floor(g2);
        js = step_gated(s, spec, up, down, g1, g2, true);
        break;
      }
    }
    // Road 3 gets the routed share rounded down to the grid and road 4 the
    // rest, so the node never emits more than it holds.
    js.Q31 = grid_floor(js.Q31);
    js.Q41 = grid_ceil(js.Q41);
    next.junctions[k] = js;
    next.roads[nd.in1].Q[m] = js.Q1m;
    next.roads[nd.in2].Q[m] = js.Q2m;
    if (nd.out3) next.roads[*nd.out3].Q[0] = js.Q31;
    if (nd.out4) next.roads[*nd.out4].Q[0] = js.Q41;
  }

  // Exact trajectories never decrease. On the grid this is the identity; it
  // only acts once counters outgrow the range where grid values are exact.
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    auto& q = next.roads[r].Q;
    const auto& prev = state.roads[r].Q;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::max(q[i], prev[i]);
  }
  for (std::size_t k = 0; k < net.nodes.size(); ++k) {
    const Node& nd = net.nodes[k];
    JunctionState& js = next.junctions[k];
    const JunctionState& s = state.junctions[k];
    js.Q1m = next.roads[nd.in1].Q[m];
    js.Q2m = next.roads[nd.in2].Q[m];
    js.Q31 = nd.out3 ? next.roads[*nd.out3].Q[0] : std::max(js.Q31, s.Q31);
    js.Q41 = nd.out4 ? next.roads[*nd.out4].Q[0] : std::max(js.Q41, s.Q41);
    js.n0 = init.node_n0[k] + js.Q1m + js.Q2m - js.Q31 - js.Q41;
  }

  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    const auto& q = next.roads[r].Q;
    const auto& n0 = init.road_n0[r];
    Vector n(m);
    for (std::size_t i = 0; i < m; ++i) n[i] = n0[i] + q[i] - q[i + 1];
    next.roads[r].n = std::move(n);
  }
  return next;
}

Vector cell_occupancies(const Network& net, const NetworkState& state) {
  if (net.is_ring()) return state.roads[0].n;
  Vector out;
  out.reserve(net.cell_count());
  for (std::size_t k = 0; k < net.nodes.size(); ++k) {
    const auto& a = state.roads[net.nodes[k].in1].n;
    const auto& b = state.roads[net.nodes[k].in2].n;
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    out.push_back(state.junctions[k].n0);
  }
  return out;
}

double total_vehicles(const Network& net, const NetworkState& state) {
  const Vector n = cell_occupancies(net, state);
  return std::accumulate(n.begin(), n.end(), 0.0);
}

double total_cumulated_flow(const Network&, const NetworkState& state) {
  double sum = 0;
  for (const auto& r : state.roads) sum = std::accumulate(r.Q.begin(), r.Q.end(), sum);
  return sum;
}

std::string topology_text(const Network& net) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["topology"] = net.is_ring() ? "ring" : (net.cfg.torus ? "torus" : "grid");
  doc["roads"] = net.roads.size();
  doc["junctions"] = net.nodes.size();
  doc["sections_per_road"] = net.m;
  doc["sections"] = net.roads.size() * net.m;
  doc["cells"] = net.cell_count();
  ordered_json nodes = ordered_json::array();
  for (const auto& nd : net.nodes) {
    ordered_json j{{"id", nd.id}, {"row", nd.row}, {"col", nd.col}, {"in1", nd.in1}, {"in2", nd.in2}};
    j["out3"] = nd.out3 ? ordered_json(*nd.out3) : ordered_json("boundary");
    j["out4"] = nd.out4 ? ordered_json(*nd.out4) : ordered_json("boundary");
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json roads = ordered_json::array();
  for (const auto& r : net.roads) {
    ordered_json j;
    j["id"] = r.id;
    if (net.is_ring()) {
      j["direction"] = "ring";
    } else if (r.orientation == Orientation::Vertical) {
      j["direction"] = r.heading > 0 ? "south" : "north";
    } else {
      j["direction"] = r.heading > 0 ? "east" : "west";
    }
    j["from"] = r.from ? ordered_json(*r.from) : ordered_json("boundary");
    j["to"] = r.to ? ordered_json(*r.to) : ordered_json("self");
    roads.push_back(std::move(j));
  }
  doc["directed_roads"] = std::move(roads);
  return doc.dump(2) + "\n";
}

ComposedCity compose_city(const Network& net, const InitialData& init) {
  if (net.is_ring() || !net.cfg.torus)
    throw std::invalid_argument("compose_city: needs a torus grid");
  const std::size_t m = net.m;
  std::vector<SystemBlock> blocks;
  ConnectionSpec wires;

  for (std::size_t k = 0; k < net.nodes.size(); ++k) {
    const double n0 = init.node_n0[k];
    const Node& nd = net.nodes[k];
    const std::string j = "j" + std::to_string(k);
    const JunctionSpec spec = junction_spec(net, init, k);
    blocks.push_back(make_priority_entry1(init.road_n0[nd.in1][m - 1], n0, j + ".e1"));
    blocks.push_back(make_priority_entry2(init.road_n0[nd.in2][m - 1], j + ".e2"));
    blocks.push_back(make_priority_exit(spec.alpha13, spec.alpha23, n0, j + ".x3"));
    blocks.push_back(make_priority_exit(spec.alpha14, spec.alpha24, kUnity, j + ".x4"));
    const std::string e1 = j + ".e1", e2 = j + ".e2", x3 = j + ".x3", x4 = j + ".x4";
    wires.insert(wires.end(), {{e1 + ".Z2", e2 + ".X"},   {e2 + ".Y1", e1 + ".Q2m"},
                               {e1 + ".Y3", x3 + ".Q1m"}, {e2 + ".Y3", x3 + ".Q2m"},
                               {x3 + ".Y1", e1 + ".Q31"}, {e1 + ".Y4", x4 + ".Q1m"},
                               {e2 + ".Y4", x4 + ".Q2m"}, {x4 + ".Y1", e1 + ".Q41"}});
  }

  for (const Road& road : net.roads) {
    const auto& n0 = init.road_n0[road.id];
    for (std::size_t i = 1; i < m; ++i) blocks.push_back(make_section(n0[i - 1], section_name(road.id, i)));
    // Element i carries Q_i: the upstream exit, the plain sections, the entry.
    auto element = [&](std::size_t i) {
      if (i == 0) return exit_name(*road.from, road.orientation);
      if (i == m) return entry_name(*road.to, road.orientation);
      return section_name(road.id, i);
    };
    for (std::size_t i = 1; i <= m; ++i) {
      const std::string up = element(i - 1), cur = element(i);
      const std::string y = i - 1 == 0 ? up + ".Y2" : up + ".Y";
      const std::string u = i - 1 == 0 ? up + ".S" : up + ".U";
      const std::string z = i == m ? cur + ".Z1" : cur + ".Z";
      wires.push_back({y, cur + ".V"});
      wires.push_back({z, u});
    }
  }

  ComposedCity out;
  out.system = connect_all(blocks, wires);
  const SystemBlock& s = out.system;
  if (!s.u_ports.empty() || !s.v_ports.empty())
    throw std::logic_error("compose_city: torus city left inputs unwired");
  out.state = initial_state(s);
  for (const Node& nd : net.nodes) {
    out.split_floor.push_back(index_of(s.q_names, exit_name(nd.id, Orientation::Vertical) + ".Q"));
    out.split_ceil.push_back(index_of(s.q_names, exit_name(nd.id, Orientation::Horizontal) + ".Q"));
  }
  return out;
}

ComposedCity step_composed(const ComposedCity& c) {
  ComposedCity next;
  next.system = c.system;
  next.state = step_system(c.system, c.state, {}, {}).state;
  next.split_floor = c.split_floor;
  next.split_ceil = c.split_ceil;
  for (std::size_t i : next.split_floor) next.state.Q[i] = grid_floor(next.state.Q[i]);
  for (std::size_t i : next.split_ceil) next.state.Q[i] = grid_ceil(next.state.Q[i]);
  return next;
}

NetworkState read_composed(const Network& net, const ComposedCity& c,
                           const std::shared_ptr<const InitialData>& init) {
  const std::size_t m = net.m;
  NetworkState s;
  s.t = c.state.t;
  s.init = init;
  s.plans.assign(net.nodes.size(), net.cfg.signal);
  s.junctions.resize(net.nodes.size());
  for (std::size_t k = 0; k < net.nodes.size(); ++k)
    s.junctions[k] = read_junction(c.system, c.state, junction_spec(net, *init, k), "j" + std::to_string(k));
  s.roads.resize(net.roads.size());
  for (const Road& road : net.roads) {
    Vector q(m + 1);
    const auto& from = s.junctions[*road.from];
    const auto& to = s.junctions[*road.to];
    const bool vertical = road.orientation == Orientation::Vertical;
    q[0] = vertical ? from.Q31 : from.Q41;
    for (std::size_t i = 1; i < m; ++i)
      q[i] = c.state.Q[index_of(c.system.q_names, section_name(road.id, i) + ".Q")];
    q[m] = vertical ? to.Q1m : to.Q2m;
    const auto& n0 = init->road_n0[road.id];
    Vector n(m);
    for (std::size_t i = 0; i < m; ++i) n[i] = n0[i] + q[i] - q[i + 1];
    s.roads[road.id] = LinkState{s.t, std::move(q), std::move(n)};
  }
  return s;
}

}  // namespace tropic
