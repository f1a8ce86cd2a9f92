#include "tropic/link.hpp"

#include <algorithm>
#include <stdexcept>

namespace tropic {

double FundamentalDiagram::flow(double rho) const {
  return std::min(v * rho, w * (rho_jam - rho));
}

BoundaryProfile BoundaryProfile::unconstrained() {
  return {[](std::int64_t) { return kUnconstrained; },
          [](std::int64_t) { return kUnconstrained; }};
}

BoundaryProfile BoundaryProfile::constant_rate(double inflow_rate, double outflow_rate) {
  if (inflow_rate < 0 || outflow_rate < 0) throw std::invalid_argument("boundary rates must be >= 0");
  return {[inflow_rate](std::int64_t t) { return inflow_rate * static_cast<double>(t); },
          [outflow_rate](std::int64_t t) { return outflow_rate * static_cast<double>(t); }};
}

BoundaryProfile BoundaryProfile::tabulated(std::vector<double> delta0, std::vector<double> sigma_out) {
  auto check = [](const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("tabulated boundary needs at least one value");
    if (v.front() < 0) throw std::invalid_argument("boundary profile must start >= 0");
    if (!std::is_sorted(v.begin(), v.end())) throw std::invalid_argument("boundary profile must be nondecreasing");
  };
  check(delta0);
  check(sigma_out);
  auto lookup = [](std::vector<double> v) {
    return [v = std::move(v)](std::int64_t t) {
      const auto i = static_cast<std::size_t>(std::max<std::int64_t>(t, 0));
      return v[std::min(i, v.size() - 1)];
    };
  };
  return {lookup(std::move(delta0)), lookup(std::move(sigma_out))};
}

void validate(const LinkSpec& spec) {
  if (spec.m < 1) throw std::invalid_argument("link needs at least one section");
  if (spec.n0.size() != spec.m) throw DimensionError("link: n0 must have one entry per section");
  for (double v : spec.n0) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("link: initial occupancies must be binary");
  }
  if (spec.closed && spec.boundary) throw std::invalid_argument("closed link cannot carry a boundary");
  if (spec.closed && spec.m < 2) throw std::invalid_argument("ring road needs m >= 2");
  if (!spec.closed && !spec.boundary) throw std::invalid_argument("open link needs a boundary profile");
}

LinkState initial_state(const LinkSpec& spec) {
  validate(spec);
  LinkState s;
  s.Q.assign(spec.closed ? spec.m : spec.m + 1, 0.0);
  s.n = spec.n0;
  return s;
}

Vector LinkMatrices::b(std::int64_t t) const {
  const std::size_t size = A.rows();
  Vector out(size, kEpsilon);
  out.front() = boundary.delta0(t);
  out.back() = boundary.sigma_out(t);
  return out;
}

LinkMatrices build_link_matrices(const LinkSpec& spec) {
  validate(spec);
  if (spec.closed) throw std::invalid_argument("closed link: use build_ring_matrix");
  const std::size_t m = spec.m;
  MinPlusMatrix a(m + 1, m + 1);
  // Row i couples Q_i to Q_{i-1} (weight n_i(0)) and Q_{i+1} (weight nbar_{i+1}(0)).
  for (std::size_t i = 0; i <= m; ++i) {
    if (i >= 1) a(i, i - 1) = spec.n0[i - 1];
    if (i < m) a(i, i + 1) = 1.0 - spec.n0[i];
  }
  return {std::move(a), *spec.boundary};
}

MinPlusMatrix build_ring_matrix(const LinkSpec& spec) {
  validate(spec);
  if (!spec.closed) throw std::invalid_argument("build_ring_matrix needs a closed link");
  const std::size_t m = spec.m;
  MinPlusMatrix a(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t prev = (i + m - 1) % m;
    const std::size_t next = (i + 1) % m;
    a(i, prev) = oplus(a(i, prev), spec.n0[i]);
    a(i, next) = oplus(a(i, next), 1.0 - spec.n0[next]);
  }
  return a;
}

Vector occupancies(const LinkSpec& spec, std::span<const double> q) {
  const std::size_t m = spec.m;
  Vector n(m);
  if (spec.closed) {
    for (std::size_t i = 0; i < m; ++i) n[i] = spec.n0[i] + q[(i + m - 1) % m] - q[i];
  } else {
    for (std::size_t i = 0; i < m; ++i) n[i] = spec.n0[i] + q[i] - q[i + 1];
  }
  return n;
}

LinkState step_link(const LinkState& state, const LinkSpec& spec) {
  const std::size_t m = spec.m;
  const auto& q = state.Q;
  LinkState next;
  next.t = state.t + 1;
  if (spec.closed) {
    if (q.size() != m) throw DimensionError("step_link: ring state has wrong size");
    next.Q.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t prev = (i + m - 1) % m;
      const std::size_t nx = (i + 1) % m;
      next.Q[i] = std::min(q[prev] + spec.n0[i], q[nx] + (1.0 - spec.n0[nx]));
    }
  } else {
    if (q.size() != m + 1) throw DimensionError("step_link: state has wrong size");
    next.Q.resize(m + 1);
    next.Q[0] = std::min(spec.boundary->delta0(state.t), q[1] + (1.0 - spec.n0[0]));
    for (std::size_t i = 1; i < m; ++i) {
      next.Q[i] = std::min(q[i - 1] + spec.n0[i - 1], q[i + 1] + (1.0 - spec.n0[i]));
    }
    next.Q[m] = std::min(q[m - 1] + spec.n0[m - 1], spec.boundary->sigma_out(state.t));
  }
  next.n = occupancies(spec, next.Q);
  return next;
}

std::pair<double, double> demand_supply(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  return {std::min(rho, kCapacity), std::min(kCapacity, 1.0 - rho)};
}

}  // namespace tropic
