#include <cmath>

#include "doctest.h"
#include "tropic/sim.hpp"

using namespace tropic;

namespace {

CityConfig ring_city(std::size_t m) {
  CityConfig c;
  c.topology = Topology::Ring;
  c.sections_per_road = m;
  return c;
}

CityConfig small(PolicyKind p = PolicyKind::Priority) {
  CityConfig c;
  c.rows = 2;
  c.cols = 2;
  c.sections_per_road = 3;
  c.policy = p;
  return c;
}

double ring_flow(std::size_t m, double d, std::int64_t steps = 2000) {
  const Network net = build_city(ring_city(m));
  RunOptions ro;
  ro.steps = steps;
  return run(net, seed_density(net, d, Placement::UniformSpacing, 1), ro).avg_flow;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("average flow estimator") {
  Vector lin(2001), flat(2001, 3.0);
  for (std::size_t t = 0; t < lin.size(); ++t) lin[t] = 0.5 * static_cast<double>(t);
  const auto a = average_flow(lin);
  CHECK(a.avg_flow == doctest::Approx(0.5));
  CHECK(a.converged);
  CHECK(average_flow(flat).avg_flow == 0.0);
  CHECK_THROWS(average_flow(Vector(100, 0.0)));

  // a slope change late in the run is reported as not converged
  Vector kink(2001);
  for (std::size_t t = 0; t < kink.size(); ++t)
    kink[t] = t < 1500 ? 0.1 * static_cast<double>(t) : 150 + 0.3 * static_cast<double>(t - 1500);
  CHECK_FALSE(average_flow(kink).converged);
}

TEST_CASE("ring flows") {
  CHECK(std::fabs(ring_flow(4, 0.5) - 0.5) < 0.02);
  CHECK(std::fabs(ring_flow(8, 0.25) - 0.25) < 0.02);
  CHECK(std::fabs(ring_flow(10, 0.7) - 0.3) < 0.02);
  CHECK(ring_flow(6, 0.0) == 0.0);
  CHECK(ring_flow(6, 1.0) == 0.0);
}

TEST_CASE("empty and full cities") {
  for (auto p : {PolicyKind::Priority, PolicyKind::FixedLights, PolicyKind::ProportionalLights, PolicyKind::Tuc}) {
    const Network net = build_city(small(p));
    RunOptions ro;
    ro.steps = 400;
    CHECK(run(net, seed_density(net, 0, Placement::UniformSpacing, 1), ro).avg_flow == 0.0);
    CHECK(run(net, seed_density(net, 1, Placement::UniformSpacing, 1), ro).avg_flow == 0.0);
  }
}

TEST_CASE("run bookkeeping") {
  const Network net = build_city(small());
  RunOptions ro;
  ro.steps = 300;
  ro.dump_stride = 100;
  std::int64_t calls = 0;
  ro.hook = [&](const NetworkState& a, const NetworkState& b, std::span<const double> u) {
    CHECK(b.t == a.t + 1);
    CHECK(u.empty());
    ++calls;
  };
  const auto r = run(net, seed_density(net, 0.5, Placement::UniformSpacing, 1), ro);
  CHECK(calls == 300);
  CHECK(r.mean_flow.size() == 301);
  CHECK(r.snapshots.size() == 4);
  CHECK(r.snapshots[3].t == 300);
  CHECK(r.snapshots[0].occupancy.size() == 28);
  CHECK(r.initial_total == 14.0);
  CHECK(r.max_conservation_error < 1e-9);
  CHECK(r.final_state.t == 300);
}

TEST_CASE("divergence guard") {
  const Network net = build_city(small());
  RunOptions ro;
  ro.steps = 500;
  ro.magnitude_cap = 10;
  CHECK_THROWS_AS(run(net, seed_density(net, 0.5, Placement::UniformSpacing, 1), ro), DivergenceError);
}

TEST_CASE("centralized control reaches the nominal state") {
  const Network net = build_city(small(PolicyKind::Tuc));
  const auto s0 = seed_density(net, 0.4, Placement::Clustered, 1);
  const auto p = default_lqr(net, s0);
  double last = 1e9;
  std::size_t controls = 0;
  RunOptions ro;
  ro.steps = 500;
  ro.hook = [&](const NetworkState&, const NetworkState& after, std::span<const double> u) {
    controls = u.size();
    last = (road_counts(net, after) - p.x_bar).cwiseAbs().maxCoeff();
  };
  run(net, s0, ro);
  CHECK(controls == net.roads.size());
  CHECK(last < 0.05);
}

TEST_CASE("sweeps") {
  SweepOptions so;
  so.steps = 2000;
  so.densities = {0.0, 1.0};
  so.policies = {PolicyKind::Priority, PolicyKind::FixedLights, PolicyKind::ProportionalLights, PolicyKind::Tuc};
  for (const auto& pt : mfd_sweep(small(), so)) {
    CHECK(pt.ok);
    CHECK(pt.avg_flow == 0.0);
  }

  so.policies = {PolicyKind::Priority};
  so.densities = {0.5};
  so.seeds = {1};
  const auto a = mfd_sweep(small(), so), b = mfd_sweep(small(), so);
  REQUIRE(a.size() == 1);
  CHECK(a[0].avg_flow > 0);
  CHECK(a[0].avg_flow == b[0].avg_flow);
  CHECK(a[0].converged == b[0].converged);
}

TEST_CASE("sweep order and parallelism") {
  SweepOptions so;
  so.steps = 400;
  so.densities = {0.9, 0.1, 0.5};
  so.seeds = {2, 1};
  so.policies = {PolicyKind::Tuc, PolicyKind::Priority};
  so.jobs = 1;
  const auto serial = mfd_sweep(small(), so);
  so.jobs = 4;
  const auto parallel = mfd_sweep(small(), so);
  REQUIRE(serial.size() == 12);
  CHECK(serial[0].policy == PolicyKind::Tuc);
  CHECK(serial[0].density == 0.9);
  CHECK(serial[0].seed == 2);
  CHECK(serial[1].seed == 1);
  CHECK(serial[11].policy == PolicyKind::Priority);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].density == parallel[i].density);
    CHECK(serial[i].avg_flow == parallel[i].avg_flow);
  }
}

TEST_CASE("failed points are flagged") {
  SweepOptions so;
  so.steps = 400;
  so.densities = {0.0, 0.5};
  so.seeds = {1};
  so.magnitude_cap = 10;
  const auto pts = mfd_sweep(small(), so);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].ok);
  CHECK_FALSE(pts[1].ok);
  CHECK_FALSE(pts[1].converged);
  CHECK(std::isnan(pts[1].avg_flow));
  CHECK_FALSE(pts[1].error.empty());
}

TEST_CASE("high density ordering") {
  SweepOptions so;
  so.steps = 2000;
  so.densities = {0.8};
  so.policies = {PolicyKind::Priority, PolicyKind::Tuc};
  const auto pts = mfd_sweep(small(), so);
  double pri = 0, tuc = 0;
  for (const auto& p : pts) (p.policy == PolicyKind::Tuc ? tuc : pri) += p.avg_flow;
  CHECK(tuc >= pri);
}

}
