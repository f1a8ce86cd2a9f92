#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "tropic/cli.hpp"

using namespace tropic;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("tropic-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string out() const { return (path / "out").string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tropic-traffic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kSmall = R"({"rows": 2, "cols": 2, "sections_per_road": 3, "steps": 400})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"topology": "ring", "sections_per_road": 4, "density": 0.5,
    "policy": "tuc", "signal": {"cycle": 10, "green_north": 4, "green_west": 4},
    "lqr": {"control_weight": 2}, "densities": [0.1, 0.2], "seeds": [7], "policies": ["fixed", "tuc"]})");
  CHECK(c.city.topology == Topology::Ring);
  CHECK(c.city.policy == PolicyKind::Tuc);
  CHECK(c.city.signal.c == 10);
  CHECK(c.control_weight == 2);
  CHECK(c.densities == std::vector<double>{0.1, 0.2});
  CHECK(c.seeds == std::vector<std::uint64_t>{7});
  CHECK(c.policies.size() == 2);
  CHECK(parse_config("{}").densities.size() == 21);

  CHECK_THROWS_WITH_AS(parse_config(R"({"density": 1.5})"), doctest::Contains("density"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"colour": 1})"), doctest::Contains("colour"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"signal": {"amber": 1}})"), doctest::Contains("signal.amber"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"rows": "two"})"), doctest::Contains("rows"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"policy": "greedy"})"), doctest::Contains("policy"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seeds": [-1]})"), doctest::Contains("seeds[0]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"signal": {"cycle": 3}})"), doctest::Contains("signal"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"rows\": 2,"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
}

TEST_CASE("density ranges") {
  CHECK(parse_density_range("0:1:0.25") == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(parse_density_range("0.1:0.3:0.1") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(parse_density_range("0.05:0.95:0.05").size() == 19);
  CHECK(parse_density_range("0.5:0.5:1") == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_density_range("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_density_range("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_density_range("1:0:0.1"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-20) == "1e-20");
  CHECK(format_double(kEpsilon) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("run command") {
  TempDir tmp;
  SUBCASE("empty city") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "density": 0, "steps": 300})");
    const auto r = cli({"run", cfg, "--out", tmp.out(), "--quiet"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    const auto doc = nlohmann::json::parse(slurp(fs::path(tmp.out()) / "summary.json"));
    CHECK(doc["avg_flow"] == 0.0);
    CHECK(doc["steps"] == 300);
    CHECK(doc["conservation"]["ok"] == true);
    CHECK(doc.contains("converged"));
    CHECK_FALSE(fs::exists(fs::path(tmp.out()) / "states.csv"));
  }
  SUBCASE("ring") {
    const auto cfg = tmp.file("c.json", R"({"topology": "ring", "sections_per_road": 4, "density": 0.5})");
    CHECK(cli({"run", cfg, "--out", tmp.out(), "--quiet"}).code == kExitOk);
    const auto doc = nlohmann::json::parse(slurp(fs::path(tmp.out()) / "summary.json"));
    CHECK(std::fabs(doc["avg_flow"].get<double>() - 0.5) < 0.02);
  }
  SUBCASE("state dump") {
    const auto cfg = tmp.file("c.json", kSmall);
    CHECK(cli({"run", cfg, "--out", tmp.out(), "--dump-stride", "100", "--quiet"}).code == kExitOk);
    const auto rows = csv_rows(slurp(fs::path(tmp.out()) / "states.csv"));
    REQUIRE(rows.size() == 1 + 5 * 28);
    CHECK(rows[0] == std::vector<std::string>{"t", "cell_id", "occupancy"});
    CHECK(rows[1][0] == "0");
    CHECK(rows.back()[0] == "400");
    CHECK(rows.back()[1] == "27");
  }
  SUBCASE("invalid density") {
    const auto cfg = tmp.file("c.json", R"({"density": 1.5})");
    const auto r = cli({"run", cfg, "--out", tmp.out()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("density") != std::string::npos);
    CHECK_FALSE(fs::exists(fs::path(tmp.out()) / "summary.json"));
  }
  SUBCASE("missing file") { CHECK(cli({"run", (tmp.path / "none.json").string()}).code == kExitUsage); }
  SUBCASE("divergence") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "density": 0.5, "magnitude_cap": 10})");
    const auto r = cli({"run", cfg, "--out", tmp.out()});
    CHECK(r.code == kExitDivergence);
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("bad arguments") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"fly"}).code == kExitUsage);
    CHECK(cli({"run"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }
}

TEST_CASE("mfd command") {
  TempDir tmp;
  SUBCASE("endpoints") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "steps": 300, "densities": [0, 1]})");
    CHECK(cli({"mfd", cfg, "--policies", "priority,tuc", "--out", tmp.out(), "--quiet"}).code == kExitOk);
    const auto rows = csv_rows(slurp(fs::path(tmp.out()) / "mfd.csv"));
    REQUIRE(rows.size() == 1 + 2 * 2 * 3);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "0");
    CHECK(fs::exists(fs::path(tmp.out()) / "mfd.svg"));
  }
  SUBCASE("row count and schema") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "sections_per_road": 3, "steps": 300,
      "densities": "0.2:0.8:0.2", "seeds": [1, 2],
      "policies": ["tuc", "priority", "fixed", "proportional"]})");
    CHECK(cli({"mfd", cfg, "--out", tmp.out(), "--quiet"}).code == kExitOk);
    const auto text = slurp(fs::path(tmp.out()) / "mfd.csv");
    CHECK(text.find('\r') == std::string::npos);
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 1 + 4 * 4 * 2);
    CHECK(rows[0] == std::vector<std::string>{"policy", "density", "seed", "avg_flow", "converged"});
    std::vector<std::string> seen;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].size() == 5);
      CHECK(parse_policy(rows[i][0]).has_value());
      const double d = std::stod(rows[i][1]);
      CHECK(format_double(d) == rows[i][1]);
      CHECK(d >= 0.0);
      CHECK(format_double(std::stod(rows[i][3])) == rows[i][3]);
      CHECK((rows[i][4] == "true" || rows[i][4] == "false"));
      if (seen.empty() || seen.back() != rows[i][0]) seen.push_back(rows[i][0]);
    }
    CHECK(seen == std::vector<std::string>{"fixed", "priority", "proportional", "tuc"});
    const auto svg = slurp(fs::path(tmp.out()) / "mfd.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
  }
  SUBCASE("high density ordering") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "sections_per_road": 3, "densities": [0.8]})");
    CHECK(cli({"mfd", cfg, "--policies", "priority,tuc", "--out", tmp.out(), "--quiet"}).code == kExitOk);
    const auto rows = csv_rows(slurp(fs::path(tmp.out()) / "mfd.csv"));
    double pri = 0, tuc = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) (rows[i][0] == "tuc" ? tuc : pri) += std::stod(rows[i][3]);
    CHECK(tuc >= pri);
  }
  SUBCASE("failed points") {
    const auto cfg = tmp.file("c.json", R"({"rows": 2, "cols": 2, "steps": 300, "densities": [0, 0.5],
      "seeds": [1], "magnitude_cap": 10})");
    const auto r = cli({"mfd", cfg, "--out", tmp.out(), "--quiet"});
    CHECK(r.code == kExitOk);
    const auto rows = csv_rows(slurp(fs::path(tmp.out()) / "mfd.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[2][3] == "nan");
    CHECK(rows[2][4] == "false");
    CHECK(r.err.find("warning") != std::string::npos);

    const auto all_bad = tmp.file("d.json", R"({"rows": 2, "cols": 2, "steps": 300, "densities": [0.5],
      "seeds": [1], "magnitude_cap": 10})");
    CHECK(cli({"mfd", all_bad, "--out", tmp.out(), "--quiet"}).code == kExitDivergence);
  }
  SUBCASE("unknown policy") {
    const auto cfg = tmp.file("c.json", kSmall);
    CHECK(cli({"mfd", cfg, "--policies", "priority,greedy", "--out", tmp.out()}).code == kExitUsage);
  }
}

TEST_CASE("golden mfd output") {
  const fs::path golden(TROPIC_GOLDEN_DIR);
  TempDir tmp;
  CHECK(cli({"mfd", (golden / "mfd_small.json").string(), "--out", tmp.out(), "--quiet", "--jobs", "1"}).code ==
        kExitOk);
  const auto first = slurp(fs::path(tmp.out()) / "mfd.csv");
  CHECK(first == slurp(golden / "mfd_small.csv"));
  ::setenv("TROPIC_TRAFFIC_JOBS", "3", 1);
  CHECK(cli({"mfd", (golden / "mfd_small.json").string(), "--out", tmp.out(), "--quiet"}).code == kExitOk);
  ::unsetenv("TROPIC_TRAFFIC_JOBS");
  CHECK(slurp(fs::path(tmp.out()) / "mfd.csv") == first);

  std::ostringstream out, err;
  const std::string cfg = (golden / "mfd_small.json").string();
  const char* argv[] = {"tropic-traffic", "inspect", cfg.c_str()};
  CHECK(run_cli(3, argv, out, err) == kExitOk);
  CHECK(out.str() == slurp(golden / "inspect_small.json"));
}

TEST_CASE("inspect command") {
  TempDir tmp;
  const auto cfg = tmp.file("c.json", kSmall);
  const auto topo = cli({"inspect", cfg});
  CHECK(topo.code == kExitOk);
  const auto doc = nlohmann::json::parse(topo.out);
  CHECK(doc["roads"] == 8);
  CHECK(doc["junctions"] == 4);
  CHECK(doc["cells"] == 28);

  const auto road = cli({"inspect", cfg, "--element", "road:0"});
  CHECK(road.code == kExitOk);
  const auto a = nlohmann::json::parse(road.out)["A"];
  CHECK(a["rows"] == 4);
  CHECK(a["cols"] == 4);
  CHECK(a["entries"][0][0] == "inf");

  CHECK(cli({"inspect", cfg, "--element", "junction:3"}).code == kExitOk);
  const auto lqr = cli({"inspect", cfg, "--element", "lqr"});
  CHECK(lqr.code == kExitOk);
  CHECK(nlohmann::json::parse(lqr.out)["K"].size() == 8);

  CHECK(cli({"inspect", cfg, "--element", "road:8"}).code == kExitUnknownElement);
  CHECK(cli({"inspect", cfg, "--element", "junction:4"}).code == kExitUnknownElement);
  CHECK(cli({"inspect", cfg, "--element", "bridge:1"}).code == kExitUnknownElement);
  CHECK(cli({"inspect", cfg, "--element", "road:x"}).code == kExitUnknownElement);

  const auto broken = tmp.file("b.json", "{\"rows\": 2,,}");
  CHECK(cli({"inspect", broken}).code == kExitUsage);
}

TEST_CASE("atomic writes") {
  TempDir tmp;
  const auto p = (tmp.path / "f.txt").string();
  write_atomic(p, "one\n");
  write_atomic(p, "two\n");
  CHECK(slurp(p) == "two\n");
  CHECK_FALSE(fs::exists(p + ".tmp"));
  CHECK_THROWS(write_atomic((tmp.path / "missing" / "f.txt").string(), "x"));
}

}
