#pragma once

// Six-matrix systems
//
//   P(t+1) = A Q(t) + B V(t)                  (standard algebra)
//   Q(t+1) = C (x) P(t+1) (+) D (x) U(t+1)    (min-plus)
//   Y(t+1) = E Q(t)                           (standard algebra)
//   Z(t+1) = F (x) P(t)                       (min-plus)
//
// and the connection operator. A connection wires a Y output into a V
// input or a Z output into a U input of the other system. Wired inputs
// read the partner's next output, V_dst(t) = Y_src(t+1) and
// U_dst(t+1) = Z_src(t+2); both are available from time-t state, so a
// connected system is again of the same form and never needs a fixed point.

#include <cstdint>
#include <string>
#include <vector>

#include "tropic/junction.hpp"
#include "tropic/minplus.hpp"

namespace tropic {

struct SystemBlock {
  StandardMatrix A;  // |P| x |Q|
  StandardMatrix B;  // |P| x |V|
  MinPlusMatrix C;   // |Q| x |P|
  MinPlusMatrix D;   // |Q| x |U|
  StandardMatrix E;  // |Y| x |Q|
  MinPlusMatrix F;   // |Z| x |P|

  std::vector<std::string> u_ports, v_ports, y_ports, z_ports;
  std::vector<std::string> p_names, q_names;

  std::size_t p_size() const { return p_names.size(); }
  std::size_t q_size() const { return q_names.size(); }
};

/// Checks block dimensions and label uniqueness; throws DimensionError.
void validate(const SystemBlock& s);

struct SystemState {
  Vector P;
  Vector Q;
  std::int64_t t = 0;
};

SystemState initial_state(const SystemBlock& s);

struct StepResult {
  SystemState state;
  Vector Y;  // Y(t+1)
  Vector Z;  // Z(t+1)
};

/// u_next is U(t+1), v is V(t).
StepResult step_system(const SystemBlock& s, const SystemState& state,
                       std::span<const double> u_next, std::span<const double> v);

/// Output label -> input label, owned by different systems.
struct Wire {
  std::string from;
  std::string to;
};
using ConnectionSpec = std::vector<Wire>;

SystemBlock connect(const SystemBlock& s1, const SystemBlock& s2, const ConnectionSpec& wiring);

/// Folds connect over a list of blocks, applying each wire as soon as both
/// of its ends are present. Every wire must be used.
SystemBlock connect_all(const std::vector<SystemBlock>& blocks, const ConnectionSpec& wiring);

/// Index of a label in a port or state list; throws std::out_of_range.
std::size_t index_of(const std::vector<std::string>& labels, const std::string& label);

// Elementary systems. Port labels are "<name>.U", "<name>.V", ...

/// Road section: Q(t+1) = min(n0 + V(t), U(t+1)), Y = Q, Z = nbar0 + Q.
SystemBlock make_section(double n0, const std::string& name = "s");
/// Section with its Z output duplicated (Z1, Z2).
SystemBlock make_entry(double n0, const std::string& name = "in");
/// Section with its Y output duplicated (Y1, Y2).
SystemBlock make_exit(double n0, const std::string& name = "out");

// Junction-side systems for a priority intersection. Entry 1 is the last
// section of road 1; entry 2 the last section of road 2, whose outflow is
// carried as Q2m = u + v - w over three min-plus states; the exits hold
// the node outflows Q31 and Q41.

/// V: V (Q_{1,m-1}), Q31, Q41, Q2m. Y: Y3, Y4. Z: Z1 (supply upstream), Z2 (to entry 2).
SystemBlock make_priority_entry1(double n1m0, double n0_node, const std::string& name);
/// V: V (Q_{2,m-1}). U: X (from entry 1). Y: Y1 (to entry 1), Y3, Y4. Z: Z1.
SystemBlock make_priority_entry2(double n2m0, const std::string& name);
/// V: Q1m, Q2m. U: S (downstream supply). Y: Y1 (to entry 1), Y2 (downstream).
SystemBlock make_priority_exit(double alpha_from1, double alpha_from2, double node_release,
                               const std::string& name);

/// The four junction systems of one intersection, wired together.
/// External ports: <name>.e1.V, <name>.e2.V, <name>.x3.S, <name>.x4.S,
/// <name>.x3.Y2, <name>.x4.Y2, <name>.e1.Z1, <name>.e2.Z1.
SystemBlock make_priority_intersection(const JunctionSpec& spec, double n1m0, double n2m0,
                                       const std::string& name = "j");

/// Recovers (Q1m, Q2m, Q31, Q41) from a state of a system carrying the
/// junction systems under the given name.
JunctionState read_junction(const SystemBlock& s, const SystemState& st, const JunctionSpec& spec,
                            const std::string& name);

/// Structured text (JSON) dump; epsilon entries are the string "inf".
std::string to_text(const SystemBlock& s);

}  // namespace tropic
