#pragma once

// Two-in/two-out intersection with a unit-capacity internal cell.
// Road 1 (north) and road 2 (west) enter, roads 3 (south) and 4 (east) leave.

#include <cstdint>
#include <variant>

#include "tropic/minplus.hpp"

namespace tropic {

/// Periodic plan: north green, integral red, west green, integral red.
struct SignalPlan {
  int c = 8;
  int gN = 3;
  int r1 = 1;
  int gW = 3;
  int r2 = 1;

  friend bool operator==(const SignalPlan&, const SignalPlan&) = default;
};

void validate(const SignalPlan& plan);

/// Equal greens on cycle c with unit integral reds.
SignalPlan equal_green_plan(int cycle = 8, int red = 1);

struct PriorityRule {};
struct FixedLights {
  SignalPlan plan;
};
struct ProportionalLights {
  SignalPlan plan;  // supplies c, r1, r2; greens are recomputed per cycle
};
using JunctionPolicy = std::variant<PriorityRule, FixedLights, ProportionalLights>;

struct JunctionSpec {
  double alpha13 = 0.5;
  double alpha14 = 0.5;
  double alpha23 = 0.5;
  double alpha24 = 0.5;
  double n0_init = 0.0;
  JunctionPolicy policy = PriorityRule{};
};

void validate(const JunctionSpec& spec);

struct JunctionState {
  double Q1m = 0.0;
  double Q2m = 0.0;
  double Q31 = 0.0;
  double Q41 = 0.0;
  double n0 = 0.0;

  friend bool operator==(const JunctionState&, const JunctionState&) = default;
};

JunctionState initial_state(const JunctionSpec& spec);

/// Time-t values of the last sections of the entering roads.
struct Upstream {
  double q1_prev = 0.0;  // Q_{1,m-1}(t)
  double n1m0 = 0.0;     // n_{1,m}(0)
  double q2_prev = 0.0;  // Q_{2,m-1}(t)
  double n2m0 = 0.0;     // n_{2,m}(0)
};

/// Time-t values of the first sections of the leaving roads. A boundary
/// exit passes its cumulated supply as q and 0 as nbar.
struct Downstream {
  double q32 = 0.0;
  double nbar31 = 1.0;
  double q42 = 0.0;
  double nbar41 = 1.0;
};

/// Priority to road 1: Q2m sees the freshly computed Q1m(t+1).
JunctionState step_priority(const JunctionState& state, const JunctionSpec& spec,
                            const Upstream& up, const Downstream& down);

/// Flow quanta (L1, L2) enabled at step t; half-open green intervals.
std::pair<double, double> light_state(const SignalPlan& plan, std::int64_t t);

/// Traffic-light dynamics with the plan carried by spec.policy.
JunctionState step_signalized(const JunctionState& state, const JunctionSpec& spec,
                              const Upstream& up, const Downstream& down, std::int64_t t);

/// Traffic-light dynamics under an explicit plan (used when greens are adapted).
JunctionState step_signalized(const JunctionState& state, const JunctionSpec& spec,
                              const Upstream& up, const Downstream& down, const SignalPlan& plan,
                              std::int64_t t);

/// Inflows gated by per-step quanta. With implicit_priority the Q2m
/// capacity term reads Q1m(t+1), so opening both gates never overfills
/// the internal cell.
JunctionState step_gated(const JunctionState& state, const JunctionSpec& spec, const Upstream& up,
                         const Downstream& down, double gate1, double gate2,
                         bool implicit_priority);

/// Green split proportional to the entering densities; total green
/// c - r1 - r2 is kept.
SignalPlan proportional_green(const SignalPlan& base, double rhoN, double rhoW);

/// Matrix encoding x = D (x) (H q + G x) (+) b of the priority step over
/// x = q = (Q1m, Q2m, Q31, Q41).
struct PriorityMatrices {
  MinPlusMatrix D;
  StandardMatrix H;
  StandardMatrix G;
  Vector b;
};

PriorityMatrices priority_matrices(const JunctionSpec& spec, const Upstream& up,
                                   const Downstream& down);

}  // namespace tropic
