#include "tropic/sim.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace tropic {

namespace {

double ls_slope(std::span<const double> y, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo + 1);
  double st = 0, sy = 0;
  for (std::size_t t = lo; t <= hi; ++t) {
    st += static_cast<double>(t);
    sy += y[t];
  }
  const double mt = st / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t t = lo; t <= hi; ++t) {
    const double dt = static_cast<double>(t) - mt;
    num += dt * (y[t] - my);
    den += dt * dt;
  }
  return num / den;
}

}  // namespace

TucController make_tuc(const Network& net, const NetworkState& state, double state_weight,
                       double control_weight, double nominal_flow) {
  TucController c{default_lqr(net, state, state_weight, control_weight, nominal_flow), {}};
  c.gain = solve_lqr(c.problem);
  return c;
}

FlowEstimate average_flow(std::span<const double> y) {
  if (y.size() < 201) throw std::invalid_argument("average_flow: run shorter than 200 steps");
  const std::size_t T = y.size() - 1;
  FlowEstimate e;
  e.avg_flow = ls_slope(y, T / 2, T);
  e.slope_q3 = ls_slope(y, T / 2, 3 * T / 4);
  e.slope_q4 = ls_slope(y, 3 * T / 4, T);
  e.converged = std::fabs(e.slope_q3 - e.slope_q4) < 1e-3;
  return e;
}

FlowEstimate average_flow(const RunResult& r) { return average_flow(r.mean_flow); }

RunResult run(const Network& net, NetworkState state, const RunOptions& opt) {
  if (opt.steps < 1) throw std::invalid_argument("run: steps must be >= 1");
  const bool tuc = net.cfg.policy == PolicyKind::Tuc && !net.is_ring();
  LqrProblem problem;
  std::shared_ptr<const LqrGain> gain = opt.tuc_gain;
  if (tuc) {
    problem = default_lqr(net, state, opt.state_weight, opt.control_weight, opt.nominal_flow);
    if (!gain) gain = std::make_shared<const LqrGain>(solve_lqr(problem));
  }

  RunResult r;
  r.steps = opt.steps;
  const double ports = static_cast<double>(net.port_count());
  r.initial_total = total_vehicles(net, state);
  r.mean_flow.reserve(static_cast<std::size_t>(opt.steps) + 1);
  r.mean_flow.push_back(total_cumulated_flow(net, state) / ports);
  auto snapshot = [&](const NetworkState& s) {
    if (opt.dump_stride > 0 && s.t % opt.dump_stride == 0)
      r.snapshots.push_back({s.t, cell_occupancies(net, s)});
  };
  snapshot(state);

  Vector controls;
  for (std::int64_t k = 0; k < opt.steps; ++k) {
    if (tuc) {
      const Eigen::VectorXd u = apply_feedback(*gain, problem, road_counts(net, state));
      controls.assign(u.data(), u.data() + u.size());
    }
    NetworkState next = step_network(net, state, controls);
    const double mean = total_cumulated_flow(net, next) / ports;
    if (!std::isfinite(mean) || std::fabs(mean) > opt.magnitude_cap)
      throw DivergenceError("run: cumulated flow left the magnitude cap at t = " + std::to_string(next.t));
    r.mean_flow.push_back(mean);
    if (net.closed())
      r.max_conservation_error =
          std::max(r.max_conservation_error, std::fabs(total_vehicles(net, next) - r.initial_total));
    if (opt.hook) opt.hook(state, next, controls);
    snapshot(next);
    state = std::move(next);
  }
  r.final_total = total_vehicles(net, state);
  if (r.mean_flow.size() > 200) {
    const FlowEstimate e = average_flow(r.mean_flow);
    r.avg_flow = e.avg_flow;
    r.converged = e.converged;
  } else {
    r.avg_flow = (r.mean_flow.back() - r.mean_flow.front()) / static_cast<double>(opt.steps);
    r.converged = false;
  }
  r.final_state = std::move(state);
  return r;
}

std::vector<MfdPoint> mfd_sweep(const CityConfig& cfg, const SweepOptions& opt) {
  validate(cfg);
  for (double d : opt.densities)
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("densities: values must lie in [0, 1]");
  std::vector<PolicyKind> policies = opt.policies;
  if (policies.empty()) policies.push_back(cfg.policy);

  std::vector<MfdPoint> points;
  for (auto p : policies)
    for (double d : opt.densities)
      for (auto s : opt.seeds) points.push_back({p, d, s, 0.0, false, true, {}});

  // The Tuc gain depends on the wiring and weights only: solve it once.
  std::shared_ptr<const LqrGain> gain;
  std::string gain_error;
  for (auto p : policies) {
    if (p != PolicyKind::Tuc || cfg.topology == Topology::Ring) continue;
    try {
      CityConfig c = cfg;
      c.policy = p;
      const Network net = build_city(c);
      const NetworkState s0 = seed_density(net, 0.5, Placement::UniformSpacing, 1);
      gain = std::make_shared<const LqrGain>(
          solve_lqr(default_lqr(net, s0, opt.state_weight, opt.control_weight, opt.nominal_flow)));
    } catch (const std::exception& e) {
      gain_error = e.what();
    }
  }

  auto work = [&](MfdPoint& pt) {
    try {
      if (pt.policy == PolicyKind::Tuc && !gain_error.empty()) throw std::runtime_error(gain_error);
      CityConfig c = cfg;
      c.policy = pt.policy;
      c.density = pt.density;
      c.seed = pt.seed;
      const Network net = build_city(c);
      RunOptions ro;
      ro.steps = opt.steps;
      ro.state_weight = opt.state_weight;
      ro.control_weight = opt.control_weight;
      ro.nominal_flow = opt.nominal_flow;
      ro.tuc_gain = gain;
      ro.magnitude_cap = opt.magnitude_cap;
      const RunResult r = run(net, seed_density(net, pt.density, c.placement, pt.seed), ro);
      pt.avg_flow = r.avg_flow;
      pt.converged = r.converged;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.converged = false;
      pt.avg_flow = std::numeric_limits<double>::quiet_NaN();
      pt.error = e.what();
    }
  };

  unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) work(points[i]);
      });
  }
  return points;
}

}  // namespace tropic
