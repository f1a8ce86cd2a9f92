#include "tropic/compose.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace tropic {

namespace {

enum class Kind { U, V, Y, Z };

struct PortRef {
  int system;  // 0 or 1
  Kind kind;
  std::size_t index;
};

std::vector<std::string> labels(const std::string& name, std::initializer_list<const char*> suffixes) {
  std::vector<std::string> out;
  for (const char* s : suffixes) out.push_back(name + "." + s);
  return out;
}

std::optional<PortRef> find_port(const SystemBlock& s, int system, const std::string& label) {
  auto look = [&](const std::vector<std::string>& v, Kind k) -> std::optional<PortRef> {
    auto it = std::find(v.begin(), v.end(), label);
    if (it == v.end()) return std::nullopt;
    return PortRef{system, k, static_cast<std::size_t>(it - v.begin())};
  };
  if (auto r = look(s.u_ports, Kind::U)) return r;
  if (auto r = look(s.v_ports, Kind::V)) return r;
  if (auto r = look(s.y_ports, Kind::Y)) return r;
  if (auto r = look(s.z_ports, Kind::Z)) return r;
  return std::nullopt;
}

std::optional<PortRef> locate(const SystemBlock& s1, const SystemBlock& s2, const std::string& label) {
  auto a = find_port(s1, 0, label);
  auto b = find_port(s2, 1, label);
  if (a && b) throw DimensionError("connect: port label '" + label + "' exists in both systems");
  return a ? a : b;
}

}  // namespace

std::size_t index_of(const std::vector<std::string>& v, const std::string& label) {
  auto it = std::find(v.begin(), v.end(), label);
  if (it == v.end()) throw std::out_of_range("unknown label '" + label + "'");
  return static_cast<std::size_t>(it - v.begin());
}

void validate(const SystemBlock& s) {
  const std::size_t np = s.p_size(), nq = s.q_size();
  const std::size_t nu = s.u_ports.size(), nv = s.v_ports.size();
  const std::size_t ny = s.y_ports.size(), nz = s.z_ports.size();
  auto check = [](bool ok, const char* what) {
    if (!ok) throw DimensionError(std::string("system block: ") + what);
  };
  check(s.A.rows() == np && s.A.cols() == nq, "A must be |P| x |Q|");
  check(s.B.rows() == np && s.B.cols() == nv, "B must be |P| x |V|");
  check(s.C.rows() == nq && s.C.cols() == np, "C must be |Q| x |P|");
  check(s.D.rows() == nq && s.D.cols() == nu, "D must be |Q| x |U|");
  check(s.E.rows() == ny && s.E.cols() == nq, "E must be |Y| x |Q|");
  check(s.F.rows() == nz && s.F.cols() == np, "F must be |Z| x |P|");
  std::set<std::string> seen;
  for (const auto* group : {&s.u_ports, &s.v_ports, &s.y_ports, &s.z_ports})
    for (const auto& l : *group)
      if (!seen.insert(l).second) throw DimensionError("system block: duplicate port label '" + l + "'");
}

SystemState initial_state(const SystemBlock& s) {
  return {Vector(s.p_size(), 0.0), Vector(s.q_size(), 0.0), 0};
}

StepResult step_system(const SystemBlock& s, const SystemState& st, std::span<const double> u_next,
                       std::span<const double> v) {
  if (st.P.size() != s.p_size() || st.Q.size() != s.q_size())
    throw DimensionError("step_system: state does not match the system");
  if (u_next.size() != s.u_ports.size() || v.size() != s.v_ports.size())
    throw DimensionError("step_system: input sizes do not match the system");

  StepResult r;
  r.Y = mat_vec_standard(s.E, st.Q);
  r.Z = mat_vec_otimes(s.F, st.P);

  Vector p = mat_vec_standard(s.A, st.Q);
  const Vector bv = mat_vec_standard(s.B, v);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += bv[i];

  Vector q = mat_vec_otimes(s.C, p);
  const Vector du = mat_vec_otimes(s.D, u_next);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = oplus(q[i], du[i]);

  r.state = {std::move(p), std::move(q), st.t + 1};
  return r;
}

SystemBlock connect(const SystemBlock& s1, const SystemBlock& s2, const ConnectionSpec& wiring) {
  validate(s1);
  validate(s2);
  const SystemBlock* sys[2] = {&s1, &s2};

  // wired[system][kind] -> set of used indices
  std::map<std::pair<int, Kind>, std::set<std::size_t>> used;
  struct Link {
    PortRef src, dst;
  };
  std::vector<Link> links;
  for (const auto& w : wiring) {
    auto src = locate(s1, s2, w.from);
    auto dst = locate(s1, s2, w.to);
    if (!src) throw DimensionError("connect: unknown output '" + w.from + "'");
    if (!dst) throw DimensionError("connect: unknown input '" + w.to + "'");
    if (src->system == dst->system)
      throw DimensionError("connect: wire '" + w.from + "' -> '" + w.to + "' stays inside one system");
    const bool y_to_v = src->kind == Kind::Y && dst->kind == Kind::V;
    const bool z_to_u = src->kind == Kind::Z && dst->kind == Kind::U;
    if (!y_to_v && !z_to_u)
      throw DimensionError("connect: wire '" + w.from + "' -> '" + w.to + "' must be Y->V or Z->U");
    if (!used[{src->system, src->kind}].insert(src->index).second)
      throw DimensionError("connect: output '" + w.from + "' wired twice");
    if (!used[{dst->system, dst->kind}].insert(dst->index).second)
      throw DimensionError("connect: input '" + w.to + "' wired twice");
    links.push_back({*src, *dst});
  }

  const std::size_t np1 = s1.p_size(), nq1 = s1.q_size();
  const std::size_t np = np1 + s2.p_size(), nq = nq1 + s2.q_size();
  const std::size_t p_off[2] = {0, np1};
  const std::size_t q_off[2] = {0, nq1};

  auto free_ports = [&](int k, Kind kind, const std::vector<std::string>& ports) {
    std::vector<std::size_t> out;
    const auto& u = used[{k, kind}];
    for (std::size_t i = 0; i < ports.size(); ++i)
      if (!u.count(i)) out.push_back(i);
    return out;
  };

  SystemBlock r;
  for (int k = 0; k < 2; ++k) {
    r.p_names.insert(r.p_names.end(), sys[k]->p_names.begin(), sys[k]->p_names.end());
    r.q_names.insert(r.q_names.end(), sys[k]->q_names.begin(), sys[k]->q_names.end());
  }

  r.A = StandardMatrix(np, nq);
  r.C = MinPlusMatrix(nq, np);
  for (int k = 0; k < 2; ++k) {
    const SystemBlock& s = *sys[k];
    for (std::size_t i = 0; i < s.p_size(); ++i)
      for (std::size_t j = 0; j < s.q_size(); ++j) r.A(p_off[k] + i, q_off[k] + j) = s.A(i, j);
    for (std::size_t i = 0; i < s.q_size(); ++i)
      for (std::size_t j = 0; j < s.p_size(); ++j) r.C(q_off[k] + i, p_off[k] + j) = s.C(i, j);
  }

  for (const auto& l : links) {
    const SystemBlock& src = *sys[l.src.system];
    const SystemBlock& dst = *sys[l.dst.system];
    const int a = l.src.system, b = l.dst.system;
    if (l.src.kind == Kind::Y) {
      // P_dst(t+1) += B_dst[:, j] * (E_src[k, :] Q_src(t))
      for (std::size_t i = 0; i < dst.p_size(); ++i) {
        const double bij = dst.B(i, l.dst.index);
        if (bij == 0.0) continue;
        for (std::size_t c = 0; c < src.q_size(); ++c)
          r.A(p_off[b] + i, q_off[a] + c) += bij * src.E(l.src.index, c);
      }
    } else {
      // Q_dst(t+1) min= D_dst[:, j] (x) (F_src[k, :] (x) P_src(t+1))
      for (std::size_t i = 0; i < dst.q_size(); ++i) {
        const double dij = dst.D(i, l.dst.index);
        if (dij == kEpsilon) continue;
        for (std::size_t c = 0; c < src.p_size(); ++c) {
          double& e = r.C(q_off[b] + i, p_off[a] + c);
          e = oplus(e, otimes(dij, src.F(l.src.index, c)));
        }
      }
    }
  }

  // External inputs and outputs: what is left unwired, S1's before S2's.
  std::vector<std::pair<int, std::size_t>> ext_v, ext_u, ext_y, ext_z;
  for (int k = 0; k < 2; ++k) {
    const SystemBlock& s = *sys[k];
    for (auto i : free_ports(k, Kind::V, s.v_ports)) ext_v.emplace_back(k, i);
    for (auto i : free_ports(k, Kind::U, s.u_ports)) ext_u.emplace_back(k, i);
    for (auto i : free_ports(k, Kind::Y, s.y_ports)) ext_y.emplace_back(k, i);
    for (auto i : free_ports(k, Kind::Z, s.z_ports)) ext_z.emplace_back(k, i);
  }

  r.B = StandardMatrix(np, ext_v.size());
  for (std::size_t c = 0; c < ext_v.size(); ++c) {
    const auto [k, j] = ext_v[c];
    for (std::size_t i = 0; i < sys[k]->p_size(); ++i) r.B(p_off[k] + i, c) = sys[k]->B(i, j);
    r.v_ports.push_back(sys[k]->v_ports[j]);
  }
  r.D = MinPlusMatrix(nq, ext_u.size());
  for (std::size_t c = 0; c < ext_u.size(); ++c) {
    const auto [k, j] = ext_u[c];
    for (std::size_t i = 0; i < sys[k]->q_size(); ++i) r.D(q_off[k] + i, c) = sys[k]->D(i, j);
    r.u_ports.push_back(sys[k]->u_ports[j]);
  }
  r.E = StandardMatrix(ext_y.size(), nq);
  for (std::size_t row = 0; row < ext_y.size(); ++row) {
    const auto [k, j] = ext_y[row];
    for (std::size_t c = 0; c < sys[k]->q_size(); ++c) r.E(row, q_off[k] + c) = sys[k]->E(j, c);
    r.y_ports.push_back(sys[k]->y_ports[j]);
  }
  r.F = MinPlusMatrix(ext_z.size(), np);
  for (std::size_t row = 0; row < ext_z.size(); ++row) {
    const auto [k, j] = ext_z[row];
    for (std::size_t c = 0; c < sys[k]->p_size(); ++c) r.F(row, p_off[k] + c) = sys[k]->F(j, c);
    r.z_ports.push_back(sys[k]->z_ports[j]);
  }

  validate(r);
  return r;
}

SystemBlock connect_all(const std::vector<SystemBlock>& blocks, const ConnectionSpec& wiring) {
  if (blocks.empty()) throw std::invalid_argument("connect_all: no blocks");
  // Port label -> owning block, to decide when a wire becomes applicable.
  std::map<std::string, std::size_t> owner;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const auto* g : {&blocks[b].u_ports, &blocks[b].v_ports, &blocks[b].y_ports, &blocks[b].z_ports})
      for (const auto& l : *g)
        if (!owner.emplace(l, b).second) throw DimensionError("connect_all: duplicate label '" + l + "'");
  }
  std::vector<std::vector<Wire>> by_block(blocks.size());
  for (const auto& w : wiring) {
    auto a = owner.find(w.from), b = owner.find(w.to);
    if (a == owner.end()) throw DimensionError("connect_all: unknown output '" + w.from + "'");
    if (b == owner.end()) throw DimensionError("connect_all: unknown input '" + w.to + "'");
    by_block[std::max(a->second, b->second)].push_back(w);
  }
  if (!by_block[0].empty()) throw DimensionError("connect_all: wire inside a single block");
  SystemBlock acc = blocks[0];
  for (std::size_t b = 1; b < blocks.size(); ++b) acc = connect(acc, blocks[b], by_block[b]);
  return acc;
}

SystemBlock make_section(double n0, const std::string& name) {
  if (n0 != 0.0 && n0 != 1.0) throw std::invalid_argument("section occupancy must be binary");
  SystemBlock s;
  s.A = StandardMatrix{{0.0}, {1.0}};
  s.B = StandardMatrix{{1.0}, {0.0}};
  s.C = MinPlusMatrix{{n0, kEpsilon}};
  s.D = MinPlusMatrix{{kUnity}};
  s.E = StandardMatrix{{1.0}};
  s.F = MinPlusMatrix{{kEpsilon, 1.0 - n0}};
  s.u_ports = labels(name, {"U"});
  s.v_ports = labels(name, {"V"});
  s.y_ports = labels(name, {"Y"});
  s.z_ports = labels(name, {"Z"});
  s.p_names = labels(name, {"P1", "P2"});
  s.q_names = labels(name, {"Q"});
  return s;
}

SystemBlock make_entry(double n0, const std::string& name) {
  SystemBlock s = make_section(n0, name);
  s.F = MinPlusMatrix{{kEpsilon, 1.0 - n0}, {kEpsilon, 1.0 - n0}};
  s.z_ports = labels(name, {"Z1", "Z2"});
  return s;
}

SystemBlock make_exit(double n0, const std::string& name) {
  SystemBlock s = make_section(n0, name);
  s.E = StandardMatrix{{1.0}, {1.0}};
  s.y_ports = labels(name, {"Y1", "Y2"});
  return s;
}

SystemBlock make_priority_entry1(double n1m0, double n0_node, const std::string& name) {
  const double nbar0 = 1.0 - n0_node;
  SystemBlock s;
  s.v_ports = labels(name, {"V", "Q31", "Q41", "Q2m"});
  s.y_ports = labels(name, {"Y3", "Y4"});
  s.z_ports = labels(name, {"Z1", "Z2"});
  s.p_names = labels(name, {"up", "room", "latch", "spill"});
  s.q_names = labels(name, {"Q"});
  // up = Q_{1,m-1}; room = Q31 + Q41 - Q2m; latch = Q1m(t); spill = Q31 + Q41 - Q_{1,m-1}
  s.A = StandardMatrix{{0}, {0}, {1}, {0}};
  s.B = StandardMatrix{{1, 0, 0, 0}, {0, 1, 1, -1}, {0, 0, 0, 0}, {-1, 1, 1, 0}};
  s.C = MinPlusMatrix{{n1m0, nbar0, kEpsilon, kEpsilon}};
  s.D = MinPlusMatrix(1, 0);
  s.E = StandardMatrix{{1}, {1}};
  // Z2 = Q31 + Q41 - Q1m-demand + nbar0, the capacity left to road 2 when
  // road 1 takes all it can.
  s.F = MinPlusMatrix{{kEpsilon, kEpsilon, 1.0 - n1m0, kEpsilon},
                      {kEpsilon, kEpsilon, kEpsilon, nbar0 - n1m0}};
  return s;
}

SystemBlock make_priority_entry2(double n2m0, const std::string& name) {
  SystemBlock s;
  s.v_ports = labels(name, {"V"});
  s.u_ports = labels(name, {"X"});
  s.y_ports = labels(name, {"Y1", "Y3", "Y4"});
  s.z_ports = labels(name, {"Z1"});
  s.p_names = labels(name, {"up", "own"});
  s.q_names = labels(name, {"u", "v", "w"});
  // own = Q2m(t) = u + v - w = min(a2, max(X, Q2m(t-1))) with a2 = up + n2m0
  s.A = StandardMatrix{{0, 0, 0}, {1, 1, -1}};
  s.B = StandardMatrix{{1}, {0}};
  s.C = MinPlusMatrix{{n2m0, kEpsilon}, {n2m0, kUnity}, {n2m0, kUnity}};
  s.D = MinPlusMatrix{{kUnity}, {kEpsilon}, {kUnity}};
  s.E = StandardMatrix{{1, 1, -1}, {1, 1, -1}, {1, 1, -1}};
  s.F = MinPlusMatrix{{kEpsilon, 1.0 - n2m0}};
  return s;
}

SystemBlock make_priority_exit(double alpha_from1, double alpha_from2, double node_release,
                               const std::string& name) {
  SystemBlock s;
  s.v_ports = labels(name, {"Q1m", "Q2m"});
  s.u_ports = labels(name, {"S"});
  s.y_ports = labels(name, {"Y1", "Y2"});
  s.p_names = labels(name, {"routed", "latch"});
  s.q_names = labels(name, {"Q"});
  s.A = StandardMatrix{{0}, {1}};
  s.B = StandardMatrix{{alpha_from1, alpha_from2}, {0, 0}};
  s.C = MinPlusMatrix{{node_release, kEpsilon}};
  s.D = MinPlusMatrix{{kUnity}};
  s.E = StandardMatrix{{1}, {1}};
  s.F = MinPlusMatrix(0, 2);
  return s;
}

SystemBlock make_priority_intersection(const JunctionSpec& spec, double n1m0, double n2m0,
                                       const std::string& name) {
  validate(spec);
  const std::string e1 = name + ".e1", e2 = name + ".e2", x3 = name + ".x3", x4 = name + ".x4";
  std::vector<SystemBlock> blocks{
      make_priority_entry1(n1m0, spec.n0_init, e1),
      make_priority_entry2(n2m0, e2),
      make_priority_exit(spec.alpha13, spec.alpha23, spec.n0_init, x3),
      make_priority_exit(spec.alpha14, spec.alpha24, kUnity, x4),
  };
  ConnectionSpec wires{
      {e1 + ".Z2", e2 + ".X"},   {e2 + ".Y1", e1 + ".Q2m"}, {e1 + ".Y3", x3 + ".Q1m"},
      {e2 + ".Y3", x3 + ".Q2m"}, {x3 + ".Y1", e1 + ".Q31"}, {e1 + ".Y4", x4 + ".Q1m"},
      {e2 + ".Y4", x4 + ".Q2m"}, {x4 + ".Y1", e1 + ".Q41"},
  };
  return connect_all(blocks, wires);
}

JunctionState read_junction(const SystemBlock& s, const SystemState& st, const JunctionSpec& spec,
                            const std::string& name) {
  auto q = [&](const std::string& label) { return st.Q[index_of(s.q_names, label)]; };
  JunctionState j;
  j.Q1m = q(name + ".e1.Q");
  j.Q2m = q(name + ".e2.u") + q(name + ".e2.v") - q(name + ".e2.w");
  j.Q31 = q(name + ".x3.Q");
  j.Q41 = q(name + ".x4.Q");
  j.n0 = spec.n0_init + j.Q1m + j.Q2m - j.Q31 - j.Q41;
  return j;
}

std::string to_text(const SystemBlock& s) {
  using nlohmann::ordered_json;
  auto entry = [](double v) -> ordered_json {
    if (v == kEpsilon) return "inf";
    return v;
  };
  auto dump_std = [&](const StandardMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      ordered_json r = ordered_json::array();
      for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(entry(m(i, j)));
      rows.push_back(std::move(r));
    }
    return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
  };
  auto dump_mp = [&](const MinPlusMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      ordered_json r = ordered_json::array();
      for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(entry(m(i, j)));
      rows.push_back(std::move(r));
    }
    return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
  };
  ordered_json doc;
  doc["ports"] = {{"U", s.u_ports}, {"V", s.v_ports}, {"Y", s.y_ports}, {"Z", s.z_ports}};
  doc["states"] = {{"P", s.p_names}, {"Q", s.q_names}};
  doc["A"] = dump_std(s.A);
  doc["B"] = dump_std(s.B);
  doc["C"] = dump_mp(s.C);
  doc["D"] = dump_mp(s.D);
  doc["E"] = dump_std(s.E);
  doc["F"] = dump_mp(s.F);
  return doc.dump(2) + "\n";
}

}  // namespace tropic
