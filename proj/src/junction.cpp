#include "tropic/junction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tropic {

namespace {

constexpr double kQuantum = 0.5;

// Node outflows. The initial node content is released through road 3 only;
// with n0(0) = 0 this is the plain routed-inflow bound on both exits.
void step_exits(const JunctionState& s, const JunctionSpec& spec, const Downstream& down,
                JunctionState& next) {
  next.Q31 = std::min(spec.alpha13 * s.Q1m + spec.alpha23 * s.Q2m + spec.n0_init,
                      down.q32 + down.nbar31);
  next.Q41 = std::min(spec.alpha14 * s.Q1m + spec.alpha24 * s.Q2m, down.q42 + down.nbar41);
}

void finish(const JunctionSpec& spec, JunctionState& next) {
  next.n0 = spec.n0_init + next.Q1m + next.Q2m - next.Q31 - next.Q41;
}

}  // namespace

void validate(const SignalPlan& p) {
  if (p.c < 1 || p.gN < 0 || p.r1 < 0 || p.gW < 0 || p.r2 < 0)
    throw std::invalid_argument("signal plan: durations must be nonnegative and c >= 1");
  if (p.c != p.gN + p.r1 + p.gW + p.r2)
    throw std::invalid_argument("signal plan: c must equal gN + r1 + gW + r2");
  if (p.gN + p.gW < 1) throw std::invalid_argument("signal plan: no green time");
}

SignalPlan equal_green_plan(int cycle, int red) {
  const int green = cycle - 2 * red;
  SignalPlan p{cycle, green / 2, red, green - green / 2, red};
  validate(p);
  return p;
}

void validate(const JunctionSpec& spec) {
  auto in_unit = [](double a) { return a >= 0.0 && a <= 1.0; };
  if (!in_unit(spec.alpha13) || !in_unit(spec.alpha14) || !in_unit(spec.alpha23) ||
      !in_unit(spec.alpha24))
    throw std::invalid_argument("turning rates must lie in [0, 1]");
  if (std::fabs(spec.alpha13 + spec.alpha14 - 1.0) > 1e-12 ||
      std::fabs(spec.alpha23 + spec.alpha24 - 1.0) > 1e-12)
    throw std::invalid_argument("turning rates of each entering road must sum to 1");
  if (spec.n0_init != 0.0 && spec.n0_init != 1.0)
    throw std::invalid_argument("initial node occupancy must be binary");
  if (const auto* f = std::get_if<FixedLights>(&spec.policy)) validate(f->plan);
  if (const auto* p = std::get_if<ProportionalLights>(&spec.policy)) validate(p->plan);
}

JunctionState initial_state(const JunctionSpec& spec) {
  validate(spec);
  JunctionState s;
  s.n0 = spec.n0_init;
  return s;
}

JunctionState step_priority(const JunctionState& s, const JunctionSpec& spec, const Upstream& up,
                            const Downstream& down) {
  return step_gated(s, spec, up, down, kEpsilon, kEpsilon, true);
}

std::pair<double, double> light_state(const SignalPlan& plan, std::int64_t t) {
  const std::int64_t tau = ((t % plan.c) + plan.c) % plan.c;
  const double l1 = tau < plan.gN ? kQuantum : 0.0;
  const std::int64_t w0 = plan.gN + plan.r1;
  const double l2 = (tau >= w0 && tau < w0 + plan.gW) ? kQuantum : 0.0;
  return {l1, l2};
}

JunctionState step_signalized(const JunctionState& s, const JunctionSpec& spec, const Upstream& up,
                              const Downstream& down, std::int64_t t) {
  if (const auto* f = std::get_if<FixedLights>(&spec.policy))
    return step_signalized(s, spec, up, down, f->plan, t);
  if (const auto* p = std::get_if<ProportionalLights>(&spec.policy))
    return step_signalized(s, spec, up, down, p->plan, t);
  throw std::invalid_argument("step_signalized: junction is not light-controlled");
}

JunctionState step_signalized(const JunctionState& s, const JunctionSpec& spec, const Upstream& up,
                              const Downstream& down, const SignalPlan& plan, std::int64_t t) {
  const auto [l1, l2] = light_state(plan, t);
  return step_gated(s, spec, up, down, l1, l2, false);
}

JunctionState step_gated(const JunctionState& s, const JunctionSpec& spec, const Upstream& up,
                         const Downstream& down, double gate1, double gate2,
                         bool implicit_priority) {
  const double nbar0 = 1.0 - spec.n0_init;
  const double out = s.Q31 + s.Q41;
  JunctionState next;
  next.Q1m = std::min({up.q1_prev + up.n1m0, out - s.Q2m + nbar0, s.Q1m + gate1});
  const double q1_seen = implicit_priority ? next.Q1m : s.Q1m;
  next.Q2m = std::min({up.q2_prev + up.n2m0, out - q1_seen + nbar0, s.Q2m + gate2});
  step_exits(s, spec, down, next);
  finish(spec, next);
  return next;
}

SignalPlan proportional_green(const SignalPlan& base, double rhoN, double rhoW) {
  if (rhoN < 0 || rhoW < 0) throw std::invalid_argument("densities must be nonnegative");
  const int green = base.c - base.r1 - base.r2;
  SignalPlan p = base;
  const double total = rhoN + rhoW;
  p.gN = total > 0 ? static_cast<int>(std::lround(green * rhoN / total)) : green / 2;
  p.gW = green - p.gN;
  return p;
}

PriorityMatrices priority_matrices(const JunctionSpec& spec, const Upstream& up,
                                   const Downstream& down) {
  const double nbar0 = 1.0 - spec.n0_init;
  PriorityMatrices m{MinPlusMatrix(4, 4), StandardMatrix(4, 4), StandardMatrix(4, 4), Vector(4)};
  m.D(0, 0) = nbar0;
  m.D(1, 1) = nbar0;
  m.D(2, 2) = spec.n0_init;
  m.D(3, 3) = kUnity;
  // w0 = Q31 + Q41 - Q2m, w1 = Q31 + Q41 - Q1m(t+1), w2/w3 routed inflows
  m.H(0, 1) = -1;
  m.H(0, 2) = 1;
  m.H(0, 3) = 1;
  m.H(1, 2) = 1;
  m.H(1, 3) = 1;
  m.G(1, 0) = -1;
  m.H(2, 0) = spec.alpha13;
  m.H(2, 1) = spec.alpha23;
  m.H(3, 0) = spec.alpha14;
  m.H(3, 1) = spec.alpha24;
  m.b = {up.q1_prev + up.n1m0, up.q2_prev + up.n2m0, down.q32 + down.nbar31,
         down.q42 + down.nbar41};
  return m;
}

}  // namespace tropic
