// Acceptance gate: one PASS/FAIL line per criterion.
//   relaynet_acceptance            run all
//   relaynet_acceptance 3 7        run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "relaynet/analytic.hpp"
#include "relaynet/error.hpp"
#include "relaynet/homotopy.hpp"
#include "relaynet/io.hpp"
#include "relaynet/network.hpp"
#include "relaynet/optimizer.hpp"
#include "relaynet/prescan.hpp"
#include "relaynet/steiner.hpp"
#include "relaynet/visgraph.hpp"

using namespace relaynet;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string packaged(const char* name) { return std::string(RELAYNET_DATA_DIR) + "/" + name; }

std::set<int> terminal_ids(const GeoGraph& g) {
  const auto v = g.terminal_nodes();
  return {v.begin(), v.end()};
}

// AC1 ------------------------------------------------------------------------

double chain_cost_or_inf(int n, double d) {
  const ChainSolution c = optimize_chain(n, d);
  return c.feasible ? c.cost : std::numeric_limits<double>::infinity();
}

Outcome ac1() {
  Outcome o;
  std::string summary;
  for (int n = 3; n <= 8; ++n) {
    const double dm = d_min(n);
    // coarse sweep, then golden section around the best sample
    double best_f = 0.0, best = std::numeric_limits<double>::infinity();
    for (double f = 0.80; f <= 1.50 + 1e-9; f += 0.01) {
      const double c = chain_cost_or_inf(n, f * dm);
      if (c < best) best = c, best_f = f;
    }
    double lo = (best_f - 0.01) * dm, hi = (best_f + 0.01) * dm;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = chain_cost_or_inf(n, x1), f2 = chain_cost_or_inf(n, x2);
    while (hi - lo > 1e-5 * dm) {
      if (f1 <= f2) {
        hi = x2, x2 = x1, f2 = f1;
        x1 = hi - g * (hi - lo), f1 = chain_cost_or_inf(n, x1);
      } else {
        lo = x1, x1 = x2, f1 = f2;
        x2 = lo + g * (hi - lo), f2 = chain_cost_or_inf(n, x2);
      }
    }
    // the boundary side may be infeasible; take the feasible end
    double d_star = 0.5 * (lo + hi);
    if (!std::isfinite(chain_cost_or_inf(n, d_star))) d_star = hi;
    const ChainSolution c = optimize_chain(n, d_star);
    const double rel = std::abs(d_star - dm) / dm;
    const auto [rmin, rmax] = std::minmax_element(c.radii.begin(), c.radii.end());
    const double spread = (*rmax - *rmin) / *rmax;
    o.require(rel <= 0.02, fmt::format("n={} argmin d={:.6f} vs d_min={:.6f}", n, d_star, dm));
    o.require(c.feasible, fmt::format("n={} chain at argmin infeasible", n));
    // equal radii at d_min itself, where the criterion places the optimum
    const ChainSolution at = optimize_chain(n, dm);
    const auto [amin, amax] = std::minmax_element(at.radii.begin(), at.radii.end());
    const double at_spread = (*amax - *amin) / *amax;
    o.require(at_spread <= 1e-6, fmt::format("n={} radii spread {:.3g} at d_min", n, at_spread));
    summary += fmt::format(" n{}:{:+.3f}%/{:.1e}/{:.1e}", n, 100 * (d_star - dm) / dm, spread, at_spread);
  }
  if (o.pass) o.detail = "argmin offset / spread at argmin / spread at d_min:" + summary;
  return o;
}

// AC2 ------------------------------------------------------------------------

Outcome ac2() {
  Outcome o;
  int checked = 0;
  for (double d = 1.5; d <= 20.0 + 1e-9; d += 0.01) {
    for (int k = 0; k <= 720; ++k) {
      const TwoRelayCheck r = two_relay_regions(d, kPi * k / 720);
      o.require(!(r.relays_link && r.terminals_link), fmt::format("two relays link at d={} theta={}", d, k));
      ++checked;
    }
  }
  const double d = d_min(3) + 0.1;
  const ChainSolution c = optimize_chain(3, d);
  std::vector<Point2> pts{{-d, 0}};
  pts.insert(pts.end(), c.relay_positions.begin(), c.relay_positions.end());
  pts.push_back({d, 0});
  bool clear = true;
  for (std::size_t i = 0; i < pts.size(); ++i) clear = clear && norm(pts[i]) - c.radii[i] >= 1.0 - 1e-6;
  o.require(c.feasible && clear, "n=3 chain not feasible");
  o.require(oracle::strongly_connected(pts, c.radii, 1e-6), "n=3 chain not strongly connected");
  if (o.pass) o.detail = fmt::format("{} (d, theta) pairs infeasible; n=3 chain cost {:.4f}", checked, c.cost);
  return o;
}

// AC3 ------------------------------------------------------------------------

Outcome ac3() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    const double got = three_terminal_one_relay(a, b, c).cost;
    const double ref = oracle::three_terminal_grid(a, b, c, 1e-3);
    const double rel = std::abs(got - ref) / ref;
    worst = std::max(worst, rel);
    o.require(rel <= 5e-3, fmt::format("triangle {} off by {:.3g}", i, rel));
  }
  if (o.pass) o.detail = fmt::format("200 triangles, worst relative gap {:.2e}", worst);
  return o;
}

// AC4 ------------------------------------------------------------------------

Outcome ac4() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0, 10);
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Scenario s;
    const int k = 4 + trial % 4;
    for (int i = 0; i < k; ++i) s.terminals.push_back({u(rng), u(rng)});
    const NetworkState base = NetworkState::with_relays(s, {});
    const double opt = cost(s, brute_force_optimum(s, base)).area;
    NetworkState mst = base;
    assign_mst_radii(s, mst);
    const double approx = cost(s, mst).area;
    const double lower = oracle::squared_mst_weight(s.terminals);
    o.require(lower <= opt + 1e-9, fmt::format("instance {}: lower bound above optimum", trial));
    o.require(opt <= approx + 1e-9, fmt::format("instance {}: optimum above MST cost", trial));
    o.require(approx <= 2 * opt + 1e-9, fmt::format("instance {}: ratio {:.4f}", trial, approx / opt));
    o.require(std::abs(opt - oracle::optimal_range_cost(s.terminals)) <= 1e-9 * opt,
              fmt::format("instance {}: brute force disagrees with enumeration", trial));
    worst_ratio = std::max(worst_ratio, approx / opt);
  }
  // Tight family: the cheap assignment bounds the optimum from above, so
  // MST / cheap is a lower bound on the true ratio.
  const int n = 40;
  const double eps = 0.01;
  const auto f = oracle::tight_family(n, eps);
  Scenario s;
  s.terminals = f.points;
  NetworkState mst = NetworkState::with_relays(s, {});
  assign_mst_radii(s, mst);
  const double approx = cost(s, mst).area;
  double cheap = 0.0;
  for (double r : f.cheap_radii) cheap += r * r;
  const double formula = (n / 2.0 + 1) + (n / 2.0 - 1) * eps * eps;
  o.require(oracle::strongly_connected(f.points, f.cheap_radii), "tight family assignment not strongly connected");
  o.require(std::abs(cheap - formula) <= 1e-3, fmt::format("cheap cost {:.6f} vs formula {:.6f}", cheap, formula));
  const double ratio = approx / cheap;
  o.require(ratio >= 1.8, fmt::format("tight family ratio {:.4f}", ratio));
  if (o.pass)
    o.detail = fmt::format("worst random ratio {:.4f}; tight family MST {:.4f} / {:.4f} = {:.4f}", worst_ratio, approx,
                           cheap, ratio);
  return o;
}

// AC5 ------------------------------------------------------------------------

Outcome ac5() {
  Outcome o;
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + trial % 7;
    const GeoGraph g = oracle::random_graph(rng, n, 2, 0.4);
    const auto all = oracle::all_simple_paths(g, 0, 1);
    const int k = static_cast<int>(all.size()) + 3;
    const auto yen = yen_k_paths(g, 0, 1, k);
    bool same = yen.size() == all.size();
    for (std::size_t i = 0; same && i < yen.size(); ++i)
      same = std::abs(yen[i].weight - all[i].first) <= 1e-9 * (1 + all[i].first) && yen[i].nodes == all[i].second;
    o.require(same, fmt::format("Yen graph {} differs from enumeration", trial));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6 + trial % 7;
    const int m = 2 + trial % 4;
    const GeoGraph g = oracle::random_graph(rng, n, m, 0.3);
    const std::set<int> terms = terminal_ids(g);
    const double got = solve_stpg(g, terms).total_length;
    const double ref = oracle::steiner_weight(g, terms);
    o.require(std::abs(got - ref) <= 1e-9 * (1 + ref), fmt::format("STPG graph {}: {} vs {}", trial, got, ref));
  }
  if (o.pass) o.detail = "50 Yen and 50 STPG instances match the oracles";
  return o;
}

// AC6 ------------------------------------------------------------------------

Outcome ac6() {
  Outcome o;
  Scenario s;
  s.terminals = {{-8, 0.3}, {8, -0.3}};
  s.obstacles = {{{-2.5, 0}, 1.2}, {{2.5, 0}, 1.2}};
  const GeoGraph g = augment(build_graph(s.terminals, s.obstacles));
  const CardinalRays rays = CardinalRays::make(s.obstacles, s.terminals);
  std::set<HVector> yen_classes;
  for (const GraphPath& p : yen_k_paths(g, 0, 1, 64))
    yen_classes.insert(classify(NetworkGeometry::from_graph(g, p.edges), s.obstacles, rays));

  HomotopyCandidate first;
  first.tree = solve_stpg(g, terminal_ids(g));
  first.hvector = classify_tree(g, first.tree, rays);
  HomGenOptions opt;
  opt.max_generations = -1;
  const auto cands = homgen({first}, g, opt);

  const auto expected = max_homotopies(2, 2);
  o.require(expected == 4, "2^2 != 4");
  o.require(yen_classes.size() >= expected, fmt::format("Yen found {} classes", yen_classes.size()));
  o.require(bell_number(4) == 15, "B4 != 15");
  if (o.pass)
    o.detail = fmt::format("Yen {} classes (HomGen alone {}), bound {}, B4 = {}", yen_classes.size(), cands.size(),
                           expected, bell_number(4));
  return o;
}

// AC7 ------------------------------------------------------------------------

HVector classify_lines(const std::vector<std::vector<Point2>>& lines, const std::vector<Point2>& terminals,
                       const std::vector<Disk>& obstacles) {
  NetworkFile f;
  auto id_of = [&](Point2 p) {
    for (std::size_t i = 0; i < f.nodes.size(); ++i)
      if (f.nodes[i] == p) return static_cast<int>(i);
    f.nodes.push_back(p);
    return static_cast<int>(f.nodes.size() - 1);
  };
  for (Point2 t : terminals) f.terminals.push_back(id_of(t));
  for (const auto& line : lines)
    for (std::size_t i = 1; i < line.size(); ++i) f.links.push_back({id_of(line[i - 1]), id_of(line[i])});
  return classify(to_geometry(f), obstacles, CardinalRays::make(obstacles, terminals));
}

Outcome ac7() {
  Outcome o;
  const std::vector<Disk> obs{{{-3, 0}, 0.5}, {{3, 0}, 0.5}};
  {
    // same gap crossing count, opposite sides of both obstacles
    const Point2 t1{-6, 1}, t2{6, 1};
    const HVector a = classify_lines({{t1, t2}}, {t1, t2}, obs);
    const HVector b = classify_lines({{t1, {-6, -1}, {6, -1}, t2}}, {t1, t2}, obs);
    o.require(a.h1 == b.h1, "first pair: h1 differs");
    o.require(a != b, "first pair: combined vector equal");
    if (o.pass) o.detail = fmt::format("pair 1: {} vs {}", a.to_string(), b.to_string());
  }
  {
    // every ray crossed in both trees; only one crosses the centre segment
    const Point2 t1{-6, 1}, t2{-6, 0.5}, t3{0, -1};
    const HVector a =
        classify_lines({{t1, {-6, 2}, {0, 2}}, {{0, 2}, {5, 2}, {5, -2}, {-6, -2}, t2}, {{0, 2}, t3}}, {t1, t2, t3}, obs);
    const HVector b = classify_lines(
        {{t1, {-6, 2}, {5, 2}, {5, -2}, {0, -2}}, {{0, -2}, {-6, -2}, t2}, {{0, -2}, t3}}, {t1, t2, t3}, obs);
    o.require(a.h2 == b.h2, "second pair: h2 differs");
    o.require(a != b, "second pair: combined vector equal");
    if (o.pass) o.detail += fmt::format("; pair 2: {} vs {}", a.to_string(), b.to_string());
  }
  return o;
}

// AC8 ------------------------------------------------------------------------

Outcome ac8() {
  Outcome o;
  const ScenarioFile f = load_scenario(packaged("pentagon.json"));
  const Scenario& s = f.scenario;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    OptimizerConfig cfg = f.optimizer;
    cfg.seed = seed;
    const OptimizeResult r = optimize(s, random_initial_state(s, 40, seed), cfg);
    o.require(r.trace.converged, fmt::format("seed {} did not converge", seed));
    const auto js = relay_junctions(s, r.state, r.mst);
    o.require(js.size() == 3, fmt::format("seed {}: {} junctions", seed, js.size()));
    for (const Junction& j : js) {
      o.require(j.angles_deg.size() == 3, fmt::format("seed {}: junction of degree {}", seed, j.angles_deg.size()));
      for (double a : j.angles_deg) {
        worst = std::max(worst, std::abs(a - 120.0));
        o.require(std::abs(a - 120.0) <= 10.0, fmt::format("seed {}: junction angle {:.2f}", seed, a));
      }
    }
  }
  if (o.pass) o.detail = fmt::format("20/20 seeds, worst angle deviation {:.2f} deg", worst);
  return o;
}

// AC9 / AC12 -----------------------------------------------------------------

PrescanConfig prescan_config(const ScenarioFile& f, int relays) {
  PrescanConfig cfg;
  cfg.relays = relays;
  cfg.cl_threshold = f.cl_threshold;
  cfg.homgen.max_generations = f.generations;
  cfg.homgen.keep_redundant = f.keep_redundant;
  cfg.optimizer = f.optimizer;
  cfg.optimizer.seed = f.seed;
  cfg.threads = cli::thread_count(0);
  return cfg;
}

Outcome ac9() {
  Outcome o;
  const ScenarioFile f = load_scenario(packaged("pentagon_4obs.json"));
  std::vector<PrescanConfig> cfgs;
  std::vector<PrescanResult> results;
  for (int n : {30, 60, 180}) {
    cfgs.push_back(prescan_config(f, n));
    results.push_back(prescan(f.scenario, cfgs.back()));
  }
  std::string detail;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    o.require(!r.evolved.empty(), fmt::format("n={}: no evolved solution", cfgs[i].relays));
    if (r.evolved.empty()) continue;
    detail += fmt::format("{}n={} min {:.3f} s_fin {}", i ? "; " : "", cfgs[i].relays, r.evolved.front().cost,
                          r.final_classes());
    if (i == 0 || results[i - 1].evolved.empty()) continue;
    o.require(r.evolved.front().cost < results[i - 1].evolved.front().cost,
              fmt::format("min cost not decreasing at n={}", cfgs[i].relays));
    o.require(r.final_classes() >= results[i - 1].final_classes(),
              fmt::format("s_fin decreasing at n={}", cfgs[i].relays));
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome ac12() {
  Outcome o;
  const std::string out_dir = std::filesystem::temp_directory_path().string();
  auto run_once = [&](const std::string& report) {
    const std::vector<std::string> args{"relaynet", "prescan", packaged("pentagon_4obs.json"), "--relays", "30",
                                        "--report", report};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::make_pair(code, out.str());
  };
  const std::string a = out_dir + "/relaynet_ac12_a.csv", b = out_dir + "/relaynet_ac12_b.csv";
  const auto ra = run_once(a);
  const auto rb = run_once(b);
  o.require(ra.first == 0 && rb.first == 0, fmt::format("exit codes {} {}", ra.first, rb.first));
  const std::string ca = read_file(a), cb = read_file(b);
  o.require(ca == cb, "candidate reports differ");
  o.require(ra.second == rb.second, "summaries differ");
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  if (o.pass) o.detail = fmt::format("candidate report {} bytes and summary identical", ca.size());
  return o;
}

// AC10 -----------------------------------------------------------------------

Outcome ac10() {
  Outcome o;
  const ScenarioFile f = load_scenario(packaged("pentagon_4obs.json"));
  const Scenario& s = f.scenario;
  const GeoGraph g = augment(build_graph(s.terminals, s.obstacles));
  HomotopyCandidate first;
  first.tree = solve_stpg(g, terminal_ids(g));
  first.hvector = classify_tree(g, first.tree, CardinalRays::make(s.obstacles, s.terminals));
  first.length = first.tree.total_length;
  HomGenOptions one, all;
  one.max_generations = 1;
  all.max_generations = -1;
  const auto a = homgen({first}, g, one);
  const auto b = homgen({first}, g, all);
  o.require(a.size() < b.size(), fmt::format("generation 1: {} classes, unlimited: {}", a.size(), b.size()));
  std::set<HVector> distinct;
  for (const auto& c : b) distinct.insert(c.hvector);
  o.require(distinct.size() == b.size(), "repeated hvector");
  std::map<int, std::pair<double, int>> by_gen;
  for (const auto& c : b) {
    by_gen[c.generation].first += c.length;
    ++by_gen[c.generation].second;
  }
  double prev = 0.0;
  std::string means;
  for (const auto& [gen, acc] : by_gen) {
    const double mean = acc.first / acc.second;
    o.require(mean >= prev - 1e-9, fmt::format("mean length drops at generation {}", gen));
    prev = mean;
    means += fmt::format(" {:.2f}", mean);
  }
  if (o.pass) o.detail = fmt::format("{} vs {} classes; mean length by generation:{}", a.size(), b.size(), means);
  return o;
}

// AC11 -----------------------------------------------------------------------

Outcome ac11() {
  Outcome o;
  std::mt19937_64 rng(1111);
  std::uniform_real_distribution<double> u(0, 20), ur(0.8, 2.0);
  int converged = 0, runs = 0;
  while (runs < 24) {
    Scenario s;
    s.terminals = {{0, 0}, {20, 0}, {10, 17}};
    for (int i = 0; i < 2; ++i) s.obstacles.push_back({{u(rng), u(rng) * 0.8}, ur(rng)});
    bool ok = true;
    for (Point2 t : s.terminals)
      for (const Disk& d : s.obstacles) ok = ok && distance(t, d.center) > d.radius + 1.0;
    if (!ok) continue;
    ++runs;
    OptimizerConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(runs);
    const OptimizeResult r = optimize(s, random_initial_state(s, 24, cfg.seed), cfg);
    if (!r.trace.converged) continue;
    ++converged;
    o.require(cost(s, r.state).feasible, fmt::format("run {} converged infeasible", runs));
    o.require(is_strongly_connected(r.state, s), fmt::format("run {} converged disconnected", runs));
    try {
      classify(NetworkGeometry::from_network(s, r.state, r.mst), s.obstacles,
               CardinalRays::make(s.obstacles, s.terminals));
    } catch (const Error& e) {
      o.require(false, fmt::format("run {} classification failed: {}", runs, e.what()));
    }
  }
  o.require(converged > 0, "no run converged");

  int pairs = 0;
  while (pairs < 100) {
    Scenario s;
    for (int i = 0; i < 3; ++i) s.terminals.push_back({u(rng), u(rng)});
    for (int i = 0; i < 3; ++i) s.obstacles.push_back({{u(rng), u(rng)}, ur(rng)});
    bool ok = true;
    for (Point2 t : s.terminals)
      for (const Disk& d : s.obstacles) ok = ok && distance(t, d.center) > d.radius + 0.2;
    for (std::size_t i = 0; i < s.obstacles.size(); ++i)
      for (std::size_t j = i + 1; j < s.obstacles.size(); ++j)
        ok = ok && distance(s.obstacles[i].center, s.obstacles[j].center) >
                       s.obstacles[i].radius + s.obstacles[j].radius + 0.1;
    if (!ok) continue;
    const GeoGraph g = augment(build_graph(s.terminals, s.obstacles));
    SteinerTree t;
    try {
      t = solve_stpg(g, terminal_ids(g));
    } catch (const Error&) {
      continue;
    }
    const int n = 5 + pairs % 40;
    const double lo = convergence_likelihood(g, t, s, n);
    const double hi = convergence_likelihood(g, t, s, n + 1 + pairs % 7);
    o.require(hi >= lo, fmt::format("CL drops from {:.3f} to {:.3f}", lo, hi));
    ++pairs;
  }
  if (o.pass) o.detail = fmt::format("{}/{} runs converged and checked; 100 CL pairs monotone", converged, runs);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> checks{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("AC{} {} ({:.1f} s) {}", id, o.pass ? "PASS" : "FAIL", secs, o.detail) << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
