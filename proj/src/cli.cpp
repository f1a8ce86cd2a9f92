#include "tropic/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tropic/tuc.hpp"

namespace tropic {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<std::int64_t>();
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) bad(field, "expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) bad(field, "expected true or false");
  return j.get<bool>();
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad(where.empty() ? key : where + "." + key, "unknown key");
  }
}

PolicyKind get_policy(const json& j, const std::string& field) {
  const auto name = get_string(j, field);
  auto p = parse_policy(name);
  if (!p) bad(field, "unknown policy '" + name + "' (priority, fixed, proportional, tuc)");
  return *p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Element {
  enum Kind { Road, Junction, Lqr } kind;
  std::size_t index = 0;
};

std::optional<Element> parse_element(const std::string& s) {
  if (s == "lqr") return Element{Element::Lqr, 0};
  const auto colon = s.find(':');
  if (colon == std::string::npos) return std::nullopt;
  const std::string kind = s.substr(0, colon), num = s.substr(colon + 1);
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
  if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty()) return std::nullopt;
  if (kind == "road") return Element{Element::Road, idx};
  if (kind == "junction") return Element{Element::Junction, idx};
  return std::nullopt;
}

ordered_json matrix_json(const MinPlusMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json r = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) == kEpsilon)
        r.push_back("inf");
      else
        r.push_back(m(i, j));
    }
    rows.push_back(std::move(r));
  }
  return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(rows)}};
}

ordered_json matrix_json(const StandardMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(ordered_json(std::vector<double>(m.row(i).begin(), m.row(i).end())));
  return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(rows)}};
}

unsigned resolve_jobs(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("TROPIC_TRAFFIC_JOBS")) {
    unsigned v = 0;
    const std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size() && v > 0) return v;
  }
  return 0;
}

int cmd_run(const RunConfig& cfg, const std::string& out_dir, std::int64_t stride, bool quiet,
            std::ostream& out) {
  const Network net = build_city(cfg.city);
  const NetworkState s0 = seed_density(net, cfg.city.density, cfg.city.placement, cfg.city.seed);
  RunOptions ro;
  ro.steps = cfg.steps;
  ro.dump_stride = stride;
  ro.state_weight = cfg.state_weight;
  ro.control_weight = cfg.control_weight;
  ro.nominal_flow = cfg.nominal_flow;
  ro.magnitude_cap = cfg.magnitude_cap;
  const RunResult r = run(net, s0, ro);

  ordered_json doc;
  doc["policy"] = to_string(cfg.city.policy);
  doc["topology"] = net.is_ring() ? "ring" : (cfg.city.torus ? "torus" : "grid");
  doc["roads"] = net.roads.size();
  doc["junctions"] = net.nodes.size();
  doc["cells"] = net.cell_count();
  doc["density_target"] = cfg.city.density;
  doc["density_achieved"] = s0.init->density;
  doc["occupied_cells"] = s0.init->occupied;
  doc["seed"] = cfg.city.seed;
  doc["steps"] = r.steps;
  doc["avg_flow"] = r.avg_flow;
  doc["converged"] = r.converged;
  ordered_json cons;
  cons["closed"] = net.closed();
  cons["initial_total"] = r.initial_total;
  cons["final_total"] = r.final_total;
  cons["max_abs_error"] = r.max_conservation_error;
  cons["ok"] = !net.closed() || r.max_conservation_error < 1e-9;
  doc["conservation"] = std::move(cons);

  std::filesystem::create_directories(out_dir);
  write_atomic((std::filesystem::path(out_dir) / "summary.json").string(), doc.dump(2) + "\n");
  if (stride > 0) write_atomic((std::filesystem::path(out_dir) / "states.csv").string(), states_csv(r));
  if (!quiet) out << "avg_flow " << format_double(r.avg_flow) << (r.converged ? "" : " (not converged)") << "\n";
  return kExitOk;
}

int cmd_mfd(RunConfig cfg, const std::string& policies_flag, const std::string& out_dir, int jobs,
            bool quiet, std::ostream& out, std::ostream& err) {
  if (!policies_flag.empty()) {
    cfg.policies.clear();
    std::stringstream ss(policies_flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto p = parse_policy(item);
      if (!p) throw ConfigError("policies: unknown policy '" + item + "'");
      if (std::find(cfg.policies.begin(), cfg.policies.end(), *p) == cfg.policies.end()) cfg.policies.push_back(*p);
    }
  }
  SweepOptions so;
  so.policies = cfg.policies;
  so.densities = cfg.densities;
  so.seeds = cfg.seeds;
  so.steps = cfg.steps;
  so.jobs = resolve_jobs(jobs);
  so.state_weight = cfg.state_weight;
  so.control_weight = cfg.control_weight;
  so.nominal_flow = cfg.nominal_flow;
  so.magnitude_cap = cfg.magnitude_cap;
  const auto points = mfd_sweep(cfg.city, so);

  std::filesystem::create_directories(out_dir);
  write_atomic((std::filesystem::path(out_dir) / "mfd.csv").string(), mfd_csv(points));
  write_atomic((std::filesystem::path(out_dir) / "mfd.svg").string(), mfd_svg(points));
  std::size_t ok = 0;
  for (const auto& p : points) {
    if (p.ok)
      ++ok;
    else
      err << "warning: " << to_string(p.policy) << " d=" << format_double(p.density) << " seed=" << p.seed
          << ": " << p.error << "\n";
  }
  if (!quiet) out << points.size() << " points, " << ok << " ok\n";
  return ok > 0 || points.empty() ? kExitOk : kExitDivergence;
}

int cmd_inspect(const RunConfig& cfg, const std::string& element, std::ostream& out, std::ostream& err) {
  const Network net = build_city(cfg.city);
  if (element.empty()) {
    out << topology_text(net);
    return kExitOk;
  }
  const auto el = parse_element(element);
  const NetworkState s0 = seed_density(net, cfg.city.density, cfg.city.placement, cfg.city.seed);
  const InitialData& init = *s0.init;
  if (el && el->kind == Element::Road && el->index < net.roads.size()) {
    const LinkSpec spec = road_spec(net, init, el->index);
    ordered_json doc;
    doc["element"] = element;
    doc["sections"] = spec.m;
    doc["n0"] = spec.n0;
    doc["A"] = matrix_json(spec.closed ? build_ring_matrix(spec) : build_link_matrices(spec).A);
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
  if (el && el->kind == Element::Junction && el->index < net.nodes.size()) {
    const Node& nd = net.nodes[el->index];
    const JunctionSpec spec = junction_spec(net, init, el->index);
    const auto m = net.m;
    const Upstream up{0, init.road_n0[nd.in1][m - 1], 0, init.road_n0[nd.in2][m - 1]};
    Downstream down{kUnconstrained, 0, kUnconstrained, 0};
    if (nd.out3) down.nbar31 = 1.0 - init.road_n0[*nd.out3][0], down.q32 = 0;
    if (nd.out4) down.nbar41 = 1.0 - init.road_n0[*nd.out4][0], down.q42 = 0;
    const PriorityMatrices pm = priority_matrices(spec, up, down);
    ordered_json doc;
    doc["element"] = element;
    doc["n0"] = spec.n0_init;
    doc["roads"] = {{"in1", nd.in1}, {"in2", nd.in2}};
    doc["roads"]["out3"] = nd.out3 ? ordered_json(*nd.out3) : ordered_json("boundary");
    doc["roads"]["out4"] = nd.out4 ? ordered_json(*nd.out4) : ordered_json("boundary");
    doc["D"] = matrix_json(pm.D);
    doc["H"] = matrix_json(pm.H);
    doc["G"] = matrix_json(pm.G);
    ordered_json b = ordered_json::array();
    for (double v : pm.b) b.push_back(v == kEpsilon ? ordered_json("inf") : ordered_json(v));
    doc["b_at_zero"] = std::move(b);
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
  if (el && el->kind == Element::Lqr && !net.is_ring()) {
    const LqrProblem p = default_lqr(net, s0, cfg.state_weight, cfg.control_weight, cfg.nominal_flow);
    out << gain_text(solve_lqr(p));
    return kExitOk;
  }
  err << "error: unknown element '" << element << "'\n";
  return kExitUnknownElement;
}

}  // namespace

std::vector<double> parse_density_range(const std::string& spec) {
  double v[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? spec.find(':', pos) : spec.size();
    if (end == std::string::npos) bad("densities", "expected 'start:stop:step'");
    const char* b = spec.data() + pos;
    const char* e = spec.data() + end;
    auto [ptr, ec] = std::from_chars(b, e, v[i]);
    if (ec != std::errc{} || ptr != e) bad("densities", "expected 'start:stop:step'");
    pos = end + 1;
  }
  const double a = v[0], z = v[1], step = v[2];
  if (!(step > 0)) bad("densities", "step must be positive");
  if (z < a) bad("densities", "stop must not precede start");
  const auto n = static_cast<std::size_t>(std::floor((z - a) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
  return out;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(doc, "",
             {"topology", "rows", "cols", "sections_per_road", "torus", "policy", "signal", "lqr", "density",
              "seed", "placement", "inflow_rate", "steps", "densities", "seeds", "policies", "magnitude_cap"});

  RunConfig cfg;
  CityConfig& c = cfg.city;
  if (doc.contains("topology")) {
    const auto t = get_string(doc["topology"], "topology");
    if (t == "grid")
      c.topology = Topology::Grid;
    else if (t == "ring")
      c.topology = Topology::Ring;
    else
      bad("topology", "expected 'grid' or 'ring'");
  }
  if (doc.contains("rows")) c.rows = static_cast<int>(get_int(doc["rows"], "rows"));
  if (doc.contains("cols")) c.cols = static_cast<int>(get_int(doc["cols"], "cols"));
  if (doc.contains("sections_per_road")) {
    const auto m = get_int(doc["sections_per_road"], "sections_per_road");
    if (m < 1) bad("sections_per_road", "must be >= 1");
    c.sections_per_road = static_cast<std::size_t>(m);
  }
  if (doc.contains("torus")) c.torus = get_bool(doc["torus"], "torus");
  if (doc.contains("policy")) c.policy = get_policy(doc["policy"], "policy");
  if (doc.contains("signal")) {
    const json& s = doc["signal"];
    if (!s.is_object()) bad("signal", "expected an object");
    check_keys(s, "signal", {"cycle", "green_north", "red1", "green_west", "red2"});
    auto field = [&](const char* k, int& dst) {
      if (s.contains(k)) dst = static_cast<int>(get_int(s[k], std::string("signal.") + k));
    };
    field("cycle", c.signal.c);
    field("green_north", c.signal.gN);
    field("red1", c.signal.r1);
    field("green_west", c.signal.gW);
    field("red2", c.signal.r2);
  }
  if (doc.contains("lqr")) {
    const json& l = doc["lqr"];
    if (!l.is_object()) bad("lqr", "expected an object");
    check_keys(l, "lqr", {"state_weight", "control_weight", "nominal_flow"});
    if (l.contains("state_weight")) cfg.state_weight = get_number(l["state_weight"], "lqr.state_weight");
    if (l.contains("control_weight")) cfg.control_weight = get_number(l["control_weight"], "lqr.control_weight");
    if (l.contains("nominal_flow")) cfg.nominal_flow = get_number(l["nominal_flow"], "lqr.nominal_flow");
    if (!(cfg.state_weight >= 0)) bad("lqr.state_weight", "must be >= 0");
    if (!(cfg.control_weight > 0)) bad("lqr.control_weight", "must be > 0");
    if (l.contains("nominal_flow") && !(cfg.nominal_flow >= 0 && cfg.nominal_flow <= kCapacity))
      bad("lqr.nominal_flow", "must lie in [0, 0.5]");
  }
  if (doc.contains("density")) c.density = get_number(doc["density"], "density");
  if (doc.contains("seed")) {
    const auto s = get_int(doc["seed"], "seed");
    if (s < 0) bad("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("placement")) {
    const auto name = get_string(doc["placement"], "placement");
    auto p = parse_placement(name);
    if (!p) bad("placement", "expected 'uniform', 'random' or 'clustered'");
    c.placement = *p;
  }
  if (doc.contains("inflow_rate")) c.inflow_rate = get_number(doc["inflow_rate"], "inflow_rate");
  if (doc.contains("steps")) {
    cfg.steps = get_int(doc["steps"], "steps");
    if (cfg.steps < 1) bad("steps", "must be >= 1");
  }
  if (doc.contains("magnitude_cap")) {
    cfg.magnitude_cap = get_number(doc["magnitude_cap"], "magnitude_cap");
    if (!(cfg.magnitude_cap > 0)) bad("magnitude_cap", "must be > 0");
  }
  if (doc.contains("densities")) {
    const json& d = doc["densities"];
    if (d.is_string()) {
      cfg.densities = parse_density_range(d.get<std::string>());
    } else if (d.is_array()) {
      for (std::size_t i = 0; i < d.size(); ++i)
        cfg.densities.push_back(get_number(d[i], "densities[" + std::to_string(i) + "]"));
    } else {
      bad("densities", "expected 'start:stop:step' or a list of numbers");
    }
    for (double v : cfg.densities)
      if (!(v >= 0 && v <= 1)) bad("densities", "values must lie in [0, 1]");
  } else {
    cfg.densities = parse_density_range("0:1:0.05");
  }
  if (doc.contains("seeds")) {
    const json& s = doc["seeds"];
    if (!s.is_array() || s.empty()) bad("seeds", "expected a non-empty list of integers");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto v = get_int(s[i], "seeds[" + std::to_string(i) + "]");
      if (v < 0) bad("seeds[" + std::to_string(i) + "]", "must be >= 0");
      cfg.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (doc.contains("policies")) {
    const json& p = doc["policies"];
    if (!p.is_array()) bad("policies", "expected a list of policy names");
    for (std::size_t i = 0; i < p.size(); ++i) cfg.policies.push_back(get_policy(p[i], "policies[" + std::to_string(i) + "]"));
  }

  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string mfd_csv(const std::vector<MfdPoint>& points) {
  std::vector<MfdPoint> rows = points;
  std::stable_sort(rows.begin(), rows.end(), [](const MfdPoint& a, const MfdPoint& b) {
    const auto pa = to_string(a.policy), pb = to_string(b.policy);
    if (pa != pb) return pa < pb;
    if (a.density != b.density) return a.density < b.density;
    return a.seed < b.seed;
  });
  std::string out = "policy,density,seed,avg_flow,converged\n";
  for (const auto& p : rows) {
    out += to_string(p.policy) + "," + format_double(p.density) + "," + std::to_string(p.seed) + "," +
           (p.ok ? format_double(p.avg_flow) : std::string("nan")) + "," + (p.ok && p.converged ? "true" : "false") +
           "\n";
  }
  return out;
}

std::string mfd_svg(const std::vector<MfdPoint>& points) {
  constexpr double W = 640, H = 420, L = 60, R = 150, T = 30, B = 50;
  constexpr double ymax = 0.5;
  auto px = [&](double d) { return L + d * (W - L - R); };
  auto py = [&](double f) { return H - B - f / ymax * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (const auto& p : points) {
    if (!p.ok) continue;
    auto& cell = series[to_string(p.policy)][p.density];
    cell.first += p.avg_flow;
    cell.second += 1;
  }
  const std::map<std::string, std::string> colors{
      {"fixed", "#1f77b4"}, {"priority", "#d62728"}, {"proportional", "#2ca02c"}, {"tuc", "#9467bd"}};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(px(0)) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(px(1)) + "\" y2=\"" + num(py(0)) + "\"/>\n";
  s += "<line x1=\"" + num(px(0)) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(px(0)) + "\" y2=\"" + num(py(ymax)) + "\"/>\n";
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 10; i += 2) {
    const double d = i / 10.0;
    s += "<text x=\"" + num(px(d)) + "\" y=\"" + num(py(0) + 16) + "\" text-anchor=\"middle\">" + num(d) + "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double f = i / 10.0;
    s += "<text x=\"" + num(px(0) - 6) + "\" y=\"" + num(py(f) + 4) + "\" text-anchor=\"end\">" + num(f) + "</text>\n";
  }
  s += "<text x=\"" + num(px(0.5)) + "\" y=\"" + num(H - 12) + "\" text-anchor=\"middle\">density</text>\n";
  s += "<text x=\"16\" y=\"" + num(py(ymax / 2)) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(py(ymax / 2)) + ")\">average flow</text>\n";
  s += "</g>\n";

  int k = 0;
  for (const auto& [name, pts] : series) {
    const auto it = colors.find(name);
    const std::string color = it == colors.end() ? "black" : it->second;
    std::string path;
    for (const auto& [d, acc] : pts) {
      if (!path.empty()) path += " ";
      path += num(px(d)) + "," + num(py(acc.first / acc.second));
    }
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + path + "\"/>\n";
    const double ly = T + 20.0 * k;
    s += "<line x1=\"" + num(W - R + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - R + 40) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(W - R + 46) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + name + "</text>\n";
    ++k;
  }
  s += "</svg>\n";
  return s;
}

std::string states_csv(const RunResult& r) {
  std::string out = "t,cell_id,occupancy\n";
  for (const auto& snap : r.snapshots)
    for (std::size_t i = 0; i < snap.occupancy.size(); ++i)
      out += std::to_string(snap.t) + "," + std::to_string(i) + "," + format_double(snap.occupancy[i]) + "\n";
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp + "'");
    f << content;
    if (!f.flush()) throw std::runtime_error("cannot write '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Min-plus traffic network simulator", "tropic-traffic"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", policies, element;
  std::int64_t stride = 0;
  int jobs = 0;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "run one simulation");
  run_cmd->add_option("config", config, "JSON configuration")->required();
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--dump-stride", stride, "write occupancies every k steps")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--quiet", quiet);

  auto* mfd_cmd = app.add_subcommand("mfd", "sweep densities and policies");
  mfd_cmd->add_option("config", config, "JSON configuration")->required();
  mfd_cmd->add_option("--policies", policies, "comma-separated policies");
  mfd_cmd->add_option("--out", out_dir, "output directory");
  mfd_cmd->add_option("--jobs", jobs, "sweep parallelism")->check(CLI::PositiveNumber);
  mfd_cmd->add_flag("--quiet", quiet);

  auto* inspect_cmd = app.add_subcommand("inspect", "print topology or element matrices");
  inspect_cmd->add_option("config", config, "JSON configuration")->required();
  inspect_cmd->add_option("--element", element, "road:K, junction:K or lqr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const RunConfig cfg = load_config(config);
    if (*run_cmd) return cmd_run(cfg, out_dir, stride, quiet, out);
    if (*mfd_cmd) return cmd_mfd(cfg, policies, out_dir, jobs, quiet, out, err);
    return cmd_inspect(cfg, element, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  }
}

}  // namespace tropic
