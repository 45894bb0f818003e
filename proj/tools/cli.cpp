#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "relaynet/analytic.hpp"
#include "relaynet/error.hpp"
#include "relaynet/homotopy.hpp"
#include "relaynet/io.hpp"
#include "relaynet/optimizer.hpp"
#include "relaynet/prescan.hpp"

namespace relaynet::cli {

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::no_solution:
    case ErrorKind::no_tree:
    case ErrorKind::no_path:
      return kNoFeasible;
    default:
      return kValidation;
  }
}

template <class Fn>
void parallel_for(int count, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string header_lines(const std::string& command, const ScenarioFile& f) {
  return fmt::format("# command: {}\n# scenario: {} {}\n", command, f.name.empty() ? "-" : f.name,
                     scenario_digest(f));
}

void write_or_print(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

HVector classify_network(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst) {
  return classify(NetworkGeometry::from_network(s, st, mst), s.obstacles,
                  CardinalRays::make(s.obstacles, s.terminals));
}

void print_elapsed(std::ostream& err, std::chrono::steady_clock::time_point start) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << fmt::format("elapsed {:.2f} s\n", secs);
}

// solve -------------------------------------------------------------------

struct SolveArgs {
  std::string scenario;
  int seeds = 1;
  int relays = -1;
  std::optional<std::uint64_t> seed;
  std::string report;
  std::string svg;
  std::string trace;
  std::string network;
  int threads = 0;
};

struct SolveRun {
  std::uint64_t seed = 0;
  OptimizeResult result;
  CostResult cost;
  bool connected = false;
  int junctions = 0;
  std::string hvector;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioFile f = load_scenario(a.scenario);
  const Scenario& s = f.scenario;
  const int n = a.relays >= 0 ? a.relays : s.relay_budget;
  const std::uint64_t base = a.seed.value_or(f.seed);
  if (a.seeds < 1) throw Error(ErrorKind::invalid_scenario, "--seeds must be at least 1");

  std::vector<SolveRun> runs(static_cast<std::size_t>(a.seeds));
  parallel_for(a.seeds, thread_count(a.threads), [&](int i) {
    SolveRun& r = runs[static_cast<std::size_t>(i)];
    r.seed = base + static_cast<std::uint64_t>(i);
    OptimizerConfig cfg = f.optimizer;
    cfg.seed = r.seed;
    r.result = optimize(s, random_initial_state(s, n, r.seed), cfg);
    r.cost = cost(s, r.result.state);
    r.connected = is_strongly_connected(r.result.state, s);
    r.junctions = static_cast<int>(relay_junctions(s, r.result.state, r.result.mst).size());
    r.hvector = classify_network(s, r.result.state, r.result.mst).to_string();
  });

  std::string csv = header_lines(fmt::format("solve seeds={} relays={} seed={}", a.seeds, n, base), f);
  csv += "seed,converged,feasible,strongly_connected,steps,active_relays,junctions,cost,hvector\n";
  const SolveRun* best = nullptr;
  for (const SolveRun& r : runs) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.seed, r.result.trace.converged ? 1 : 0,
                       r.cost.feasible ? 1 : 0, r.connected ? 1 : 0, r.result.trace.steps.size(),
                       r.result.state.active_relay_count(), r.junctions,
                       r.cost.feasible ? fmt::format("{:.6f}", r.cost.area) : std::string("inf"), r.hvector);
    if (r.cost.feasible && r.connected && (!best || r.cost.area < best->cost.area)) best = &r;
  }
  write_or_print(a.report, csv, out);

  const SolveRun& shown = best ? *best : runs.front();
  if (!a.svg.empty()) write_file(a.svg, render_svg(s, shown.result.state, shown.result.mst));
  if (!a.trace.empty()) write_file(a.trace, trace_csv(shown.result.trace));
  if (!a.network.empty()) {
    write_file(a.network, to_json(network_file(s, shown.result.state, shown.result.mst)));
  }
  print_elapsed(err, start);
  if (!best) {
    err << "no feasible strongly connected network found\n";
    return kNoFeasible;
  }
  return kOk;
}

// prescan -----------------------------------------------------------------

struct PrescanArgs {
  std::string scenario;
  int relays = -1;
  std::optional<int> generations;
  std::optional<double> cl_threshold;
  bool keep_redundant = false;
  std::string report;
  std::string summary;
  std::string svg;
  int threads = 0;
};

int cmd_prescan(const PrescanArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioFile f = load_scenario(a.scenario);
  PrescanConfig cfg;
  cfg.relays = a.relays >= 0 ? a.relays : f.scenario.relay_budget;
  if (cfg.relays < 1) throw Error(ErrorKind::invalid_scenario, "prescan needs at least one relay (--relays)");
  cfg.homgen.max_generations = a.generations.value_or(f.generations);
  cfg.cl_threshold = a.cl_threshold.value_or(f.cl_threshold);
  cfg.homgen.keep_redundant = a.keep_redundant || f.keep_redundant;
  cfg.optimizer = f.optimizer;
  cfg.optimizer.seed = f.seed;
  cfg.threads = thread_count(a.threads);

  const PrescanResult r = prescan(f.scenario, cfg);
  const std::string head =
      header_lines(fmt::format("prescan relays={} generations={} cl_threshold={} keep_redundant={}", cfg.relays,
                               cfg.homgen.max_generations, cfg.cl_threshold, cfg.homgen.keep_redundant ? 1 : 0),
                   f);
  const std::string summary = prescan_summary_csv({{&cfg, &r}});
  write_or_print(a.summary, head + summary, out);
  if (!a.report.empty()) write_file(a.report, head + prescan_candidates_csv(r));
  if (!a.svg.empty() && !r.evolved.empty()) {
    const EvolvedResult& b = r.evolved.front();
    write_file(a.svg, render_svg(f.scenario, b.state, b.mst));
  }
  print_elapsed(err, start);

  if (r.evolved.empty()) {
    if (!r.candidates.empty() && r.discarded.size() == r.candidates.size()) {
      err << fmt::format("no candidate passed the CL filter (> {}%)\n", cfg.cl_threshold);
      return kNothingPassedCl;
    }
    err << "no candidate evolved into a feasible network\n";
    return kNoFeasible;
  }
  return kOk;
}

// classify ----------------------------------------------------------------

int cmd_classify(const std::string& scenario_path, const std::string& network_path, std::ostream& out) {
  const ScenarioFile f = load_scenario(scenario_path);
  const Scenario& s = f.scenario;
  const NetworkFile n = load_network(network_path, s.terminal_count());
  try {
    branches(n.links, n.terminals);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::not_a_tree) {
      throw Error(ErrorKind::not_a_tree, "loop detected: classification needs a loop-free network");
    }
    throw;
  }
  const NetworkGeometry net = to_geometry(n);
  const HVector h = classify(net, s.obstacles, CardinalRays::make(s.obstacles, s.terminals));
  out << "hvector: " << h.to_string() << "\n";
  out << "partition:";
  for (const auto& block : partition_of(net, s.obstacles)) {
    out << " {";
    for (std::size_t i = 0; i < block.size(); ++i) out << (i ? "," : "") << block[i];
    out << "}";
  }
  out << "\n";
  return kOk;
}

// analytic ----------------------------------------------------------------

void print_chain(const ChainSolution& c, std::ostream& out) {
  out << fmt::format("d: {:.9g}\n", c.d);
  for (std::size_t i = 0; i < c.relay_positions.size(); ++i) {
    out << fmt::format("relay {}: ({:.9g}, {:.9g})\n", i, c.relay_positions[i].x, c.relay_positions[i].y);
  }
  out << "radii:";
  for (double r : c.radii) out << fmt::format(" {:.9g}", r);
  out << fmt::format("\ncost: {:.9g}\nfeasible: {}\n", c.cost, c.feasible ? "yes" : "no");
}

int cmd_analytic(const std::string& sub, const std::vector<double>& args, std::ostream& out) {
  auto need = [&](std::size_t k, const char* usage) {
    if (args.size() != k) throw Error(ErrorKind::invalid_scenario, fmt::format("usage: analytic {}", usage));
  };
  auto relay_count = [](double v) {
    const int n = static_cast<int>(v);
    if (n != v) throw Error(ErrorKind::invalid_scenario, "relay count must be an integer");
    if (n <= 2) {
      throw Error(ErrorKind::invalid_scenario,
                  fmt::format("n = {}: at least 3 relays are needed to join two terminals around an obstacle", n));
    }
    return n;
  };
  if (sub == "dmin") {
    need(1, "dmin <n>");
    out << fmt::format("{:.9g}\n", d_min(relay_count(args[0])));
  } else if (sub == "chain") {
    need(2, "chain <n> <d>");
    const int n = relay_count(args[0]);
    const double d = args[1];
    if (!(d > 1.0)) throw Error(ErrorKind::invalid_scenario, "d must exceed the obstacle radius 1");
    print_chain(d >= d_min(n) ? semicircle_chain(n, d) : optimize_chain(n, d), out);
  } else if (sub == "triangle") {
    need(6, "triangle <ax> <ay> <bx> <by> <cx> <cy>");
    const TriRelaySolution t = three_terminal_one_relay({args[0], args[1]}, {args[2], args[3]}, {args[4], args[5]});
    out << "candidate: " << to_string(t.candidate_kind) << "\n";
    if (t.relay_position) out << fmt::format("relay: ({:.9g}, {:.9g})\n", t.relay_position->x, t.relay_position->y);
    out << fmt::format("radii: {:.9g} {:.9g} {:.9g} {:.9g}\ncost: {:.9g}\n", t.radii[0], t.radii[1], t.radii[2],
                       t.radii[3], t.cost);
  } else {
    throw Error(ErrorKind::invalid_scenario, fmt::format("unknown analytic subcommand '{}'", sub));
  }
  return kOk;
}

}  // namespace

int thread_count(int flag) {
  std::optional<int> env;
  if (const char* v = std::getenv("RELAYNET_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(v, &end, 10);
    if (end != v && parsed > 0) env = static_cast<int>(parsed);
  }
  int n = flag > 0 ? flag : env.value_or(1);
  if (env) n = std::min(n, *env);
  return std::max(1, n);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relay placement and range assignment around no-transmission zones"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Optimize random initial networks");
  s->add_option("scenario", solve.scenario, "Scenario JSON")->required();
  s->add_option("--seeds", solve.seeds, "Number of runs (seeds seed, seed+1, ...)");
  s->add_option("--relays", solve.relays, "Relay count (default: relay_budget)");
  s->add_option("--seed", solve.seed, "Base seed (default: scenario seed)");
  s->add_option("--report", solve.report, "Report CSV path (default: stdout)");
  s->add_option("--svg", solve.svg, "SVG of the best run");
  s->add_option("--trace", solve.trace, "Trace CSV of the best run");
  s->add_option("--network", solve.network, "Network JSON of the best run");
  s->add_option("--threads", solve.threads, "Parallel runs (default: RELAYNET_THREADS or 1)");

  PrescanArgs pre;
  auto* p = app.add_subcommand("prescan", "Homotopy pre-scan and candidate evolution");
  p->add_option("scenario", pre.scenario, "Scenario JSON")->required();
  p->add_option("--relays", pre.relays, "Relay count (default: relay_budget)");
  p->add_option("--generations", pre.generations, "HomGen generation limit, negative for none");
  p->add_option("--cl-threshold", pre.cl_threshold, "Minimum convergence likelihood in percent");
  p->add_flag("--keep-redundant", pre.keep_redundant, "Expand duplicate classes reached through other graphs");
  p->add_option("--report", pre.report, "Per-candidate CSV path");
  p->add_option("--summary", pre.summary, "Summary CSV path (default: stdout)");
  p->add_option("--svg", pre.svg, "SVG of the cheapest evolved network");
  p->add_option("--threads", pre.threads, "Parallel evolutions (default: RELAYNET_THREADS or 1)");

  std::string cls_scenario, cls_network;
  auto* c = app.add_subcommand("classify", "Print the homotopy vector of a network");
  c->add_option("scenario", cls_scenario, "Scenario JSON")->required();
  c->add_option("network", cls_network, "Network JSON")->required();

  std::string sub;
  std::vector<double> numbers;
  auto* an = app.add_subcommand("analytic", "Closed-form small cases");
  an->add_option("kind", sub, "dmin | chain | triangle")->required();
  an->add_option("args", numbers, "Numeric arguments");
  an->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*s) return cmd_solve(solve, out, err);
    if (*p) return cmd_prescan(pre, out, err);
    if (*c) return cmd_classify(cls_scenario, cls_network, out);
    if (*an) {
      for (const auto& extra : an->remaining()) numbers.push_back(std::stod(extra));
      return cmd_analytic(sub, numbers, out);
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace relaynet::cli
