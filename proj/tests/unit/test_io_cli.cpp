#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "relaynet/error.hpp"
#include "relaynet/io.hpp"

using namespace relaynet;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / fmt_name();
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static std::string fmt_name() {
    static int counter = 0;
    return "relaynet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "relaynet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSmall = R"({
  "schema_version": 1,
  "name": "small",
  "terminals": [[0, 0], [10, 0], [5, 8]],
  "obstacles": [{"cx": 5, "cy": 3, "r": 1}],
  "relay_budget": 12,
  "seed": 3
})";

std::string parse_error_message(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return std::string(to_string(e.kind())) + ": " + e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("scenario round trip is canonical") {
  const ScenarioFile a = parse_scenario(kSmall);
  CHECK(a.scenario.terminal_count() == 3);
  CHECK(a.scenario.obstacles[0].radius == 1.0);
  CHECK(a.scenario.relay_budget == 12);
  const std::string canon = to_json(a);
  const ScenarioFile b = parse_scenario(canon);
  CHECK(to_json(b) == canon);
  CHECK(scenario_digest(a) == scenario_digest(b));
  CHECK(scenario_digest(a).size() == 16);
  // awkward doubles survive exactly
  ScenarioFile c = a;
  c.scenario.terminals[0] = {0.1 + 0.2, -1e-17};
  const ScenarioFile d = parse_scenario(to_json(c));
  CHECK(d.scenario.terminals[0] == c.scenario.terminals[0]);
}

TEST_CASE("packaged scenarios load") {
  for (const char* name : {"pentagon.json", "pentagon_4obs.json"}) {
    const ScenarioFile f = load_scenario(std::string(RELAYNET_DATA_DIR) + "/" + name);
    CHECK(f.scenario.terminal_count() == 5);
    CHECK(to_json(parse_scenario(to_json(f))) == to_json(f));
  }
}

TEST_CASE("scenario diagnostics name the line or field") {
  CHECK(parse_error_message("{\n  \"schema_version\": 1,\n  ]") .find("line 3") != std::string::npos);
  const std::string field = parse_error_message(
      R"({"schema_version": 1, "terminals": [[0,0],[1,0]], "obstacles": [{"cx": 5, "cy": 5, "r": "big"}]})");
  CHECK(field.find("obstacles[0].r") != std::string::npos);
  CHECK(parse_error_message(R"({"schema_version": 2, "terminals": [[0,0],[1,0]]})").find("schema_version") !=
        std::string::npos);
  CHECK(parse_error_message(R"({"schema_version": 1, "terminals": [[0,0],[1,0]], "colour": 1})").find("colour") !=
        std::string::npos);
  const std::string inside = parse_error_message(
      R"({"schema_version": 1, "terminals": [[0,0],[5,5]], "obstacles": [{"cx": 5, "cy": 5, "r": 1}]})");
  CHECK(inside.rfind("invalid-scenario", 0) == 0);
  CHECK(inside.find("terminal 1") != std::string::npos);
}

TEST_CASE("network files") {
  const NetworkFile n = parse_network(R"({"nodes": [[0,0],[4,0],[2,1]], "links": [[2,0],[1,2]]})", 2);
  CHECK(n.terminals == std::vector<int>{0, 1});
  REQUIRE(n.links.size() == 2);
  CHECK(n.links[0].u < n.links[0].v);
  CHECK(to_json(parse_network(to_json(n), 2)) == to_json(n));
  CHECK_THROWS_AS(parse_network(R"({"nodes": [[0,0]], "links": [[0,3]]})", 1), Error);
}

TEST_CASE("SVG has one circle per obstacle and per disk, scaled") {
  const ScenarioFile f = parse_scenario(kSmall);
  const Scenario& s = f.scenario;
  NetworkState st = NetworkState::with_relays(s, {{2, 0}, {8, 0}, {4, 6}});
  const auto mst = assign_mst_radii(s, st);
  SvgOptions opt;
  opt.scale = 12.5;
  const std::string svg = render_svg(s, st, mst, opt);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);

  std::vector<double> disk_r;
  const std::regex disk(R"re(<circle [^>]*r="([0-9.]+)" data-node="([0-9]+)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), disk); it != std::sregex_iterator(); ++it) {
    const int id = std::stoi((*it)[2]);
    CHECK(std::stod((*it)[1]) == doctest::Approx(node_radius(s, st, id) * opt.scale).epsilon(1e-6));
    disk_r.push_back(std::stod((*it)[1]));
  }
  CHECK(disk_r.size() == 6);
  const std::regex any_circle("<circle ");
  const auto circles = std::distance(std::sregex_iterator(svg.begin(), svg.end(), any_circle), std::sregex_iterator());
  CHECK(circles == static_cast<long>(disk_r.size() + s.obstacles.size()));
}

TEST_CASE("cli analytic") {
  CliRun r = run_cli({"analytic", "dmin", "3"});
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(4.26197).epsilon(1e-5));
  r = run_cli({"analytic", "dmin", "2"});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("3 relays") != std::string::npos);
  r = run_cli({"analytic", "triangle", "0", "0", "1", "0", "0.5", "0.866"});
  CHECK(r.code == 0);
  CHECK(r.out.find("candidate: circumcenter") != std::string::npos);
  CHECK(r.out.find("cost: 1.333") != std::string::npos);
  r = run_cli({"analytic", "triangle", "-1", "0", "1", "0", "0", "1"});
  CHECK(r.code == 0);
  r = run_cli({"analytic", "chain", "4", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("feasible: yes") != std::string::npos);
  CHECK(run_cli({"analytic", "cube", "1"}).code == cli::kValidation);
  CHECK(run_cli({}).code == cli::kValidation);
}

TEST_CASE("cli classify") {
  TempDir dir;
  // one obstacle well above the path: no centre pairs, only its S ray is crossed
  write_file(dir.file("s.json"), R"({"schema_version": 1, "terminals": [[0,0],[10,0]],
    "obstacles": [{"cx": 5, "cy": 20, "r": 1}]})");
  write_file(dir.file("straight.json"), R"({"nodes": [[0,0],[10,0]], "links": [[0,1]]})");
  write_file(dir.file("loop.json"), R"({"nodes": [[0,0],[10,0],[5,2]], "links": [[0,1],[1,2],[2,0]]})");
  CliRun r = run_cli({"classify", dir.file("s.json"), dir.file("straight.json")});
  CHECK(r.code == 0);
  CHECK(r.out == "hvector: ;0010\npartition: {0}\n");
  r = run_cli({"classify", dir.file("s.json"), dir.file("loop.json")});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("loop detected") != std::string::npos);
}

TEST_CASE("cli solve writes reports and outputs") {
  TempDir dir;
  write_file(dir.file("s.json"), kSmall);
  CliRun r = run_cli({"solve", dir.file("s.json"), "--seeds", "2", "--svg", dir.file("o.svg"), "--trace",
                      dir.file("t.csv"), "--network", dir.file("n.json")});
  CHECK(r.code == 0);
  CHECK(r.out.find("seed,converged,feasible,strongly_connected,steps,active_relays,junctions,cost,hvector\n") !=
        std::string::npos);
  CHECK(r.out.rfind("# command: solve", 0) == 0);
  CHECK(fs::exists(dir.file("o.svg")));
  CHECK(read_file(dir.file("t.csv")).rfind("step,cost,feasible,n_active_relays\n", 0) == 0);
  const NetworkFile n = load_network(dir.file("n.json"), 3);
  CHECK(n.nodes.size() >= 3);
  // the written network classifies
  CHECK(run_cli({"classify", dir.file("s.json"), dir.file("n.json")}).code == 0);
  // same inputs, same report
  CHECK(run_cli({"solve", dir.file("s.json"), "--seeds", "2"}).out ==
        run_cli({"solve", dir.file("s.json"), "--seeds", "2", "--threads", "2"}).out);

  write_file(dir.file("bad.json"), R"({"schema_version": 1, "terminals": [[0,0],[5,5]],
    "obstacles": [{"cx": 5, "cy": 5, "r": 1}]})");
  r = run_cli({"solve", dir.file("bad.json")});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("terminal 1") != std::string::npos);
  CHECK(run_cli({"solve", dir.file("missing.json")}).code == cli::kValidation);
}

TEST_CASE("cli prescan exit codes") {
  TempDir dir;
  write_file(dir.file("s.json"), R"({"schema_version": 1, "terminals": [[-8,0],[8,0]],
    "obstacles": [{"cx": 0, "cy": 0, "r": 1.5}], "relay_budget": 14})");
  CliRun r = run_cli({"prescan", dir.file("s.json"), "--report", dir.file("c.csv")});
  CHECK(r.code == 0);
  CHECK(r.out.find("n,generations,s_pre,cl_pass,s_fin,min_cost\n") != std::string::npos);
  const std::string report = read_file(dir.file("c.csv"));
  CHECK(report.find("id,generation,parent,hvector") != std::string::npos);
  CHECK(report.find(dir.path.string()) == std::string::npos);
  r = run_cli({"prescan", dir.file("s.json"), "--cl-threshold", "101", "--report", dir.file("d.csv")});
  CHECK(r.code == cli::kNothingPassedCl);
  CHECK(fs::exists(dir.file("d.csv")));
}

TEST_CASE("thread count honours the environment cap") {
  CHECK(cli::thread_count(3) >= 1);
  ::setenv("RELAYNET_THREADS", "2", 1);
  CHECK(cli::thread_count(0) == 2);
  CHECK(cli::thread_count(8) == 2);
  CHECK(cli::thread_count(1) == 1);
  ::unsetenv("RELAYNET_THREADS");
  CHECK(cli::thread_count(0) == 1);
  CHECK(cli::thread_count(4) == 4);
}
