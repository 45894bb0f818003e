#include "relaynet/prescan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "relaynet/error.hpp"

namespace relaynet {

HVector classify_tree(const GeoGraph& g, const SteinerTree& tree, const CardinalRays& rays) {
  return classify(NetworkGeometry::from_graph(g, tree.edges), g.obstacles(), rays);
}

// HomGen -------------------------------------------------------------------

namespace {

struct Expansion {
  int candidate = 0;  // candidate whose class this tree belongs to
  SteinerTree tree;
  std::set<int> removed;
  int generation = 0;
};

// Lowest-id tree edge touching `node`, or -1.
int edge_at(const GeoGraph& g, const SteinerTree& tree, int node) {
  for (int eid : tree.edges) {
    const GeoEdge& e = g.edge(eid);
    if (e.u == node || e.v == node) return eid;
  }
  return -1;
}

}  // namespace

std::vector<HomotopyCandidate> homgen(const std::vector<HomotopyCandidate>& initial, const GeoGraph& base_graph,
                                      const HomGenOptions& options, HomGenStats* stats) {
  if (initial.empty()) throw Error(ErrorKind::degenerate_input, "homgen needs at least one initial candidate");
  HomGenStats local;
  HomGenStats& st = stats ? *stats : local;
  std::vector<Point2> terminal_points;
  std::set<int> terminals;
  for (int id : base_graph.terminal_nodes()) {
    terminal_points.push_back(base_graph.node(id).position);
    terminals.insert(id);
  }
  const CardinalRays rays = CardinalRays::make(base_graph.obstacles(), terminal_points);

  std::vector<HomotopyCandidate> out = initial;
  std::set<HVector> known;
  std::set<std::pair<HVector, std::set<int>>> seen_pairs;
  std::deque<Expansion> frontier;
  for (std::size_t i = 0; i < out.size(); ++i) {
    known.insert(out[i].hvector);
    seen_pairs.insert({out[i].hvector, out[i].removed_edges});
    frontier.push_back({static_cast<int>(i), out[i].tree, out[i].removed_edges, out[i].generation});
  }

  auto may_expand = [&](int generation) {
    return options.max_generations < 0 || generation < options.max_generations;
  };

  while (!frontier.empty() && st.expansions < options.max_expansions) {
    const Expansion cur = std::move(frontier.front());
    frontier.pop_front();
    if (!may_expand(cur.generation)) continue;
    ++st.expansions;
    const int gen = cur.generation + 1;
    // Per terminal: keep cutting the edge that joins it to the current tree
    // until the reduced graph no longer connects it.
    for (int t : base_graph.terminal_nodes()) {
      std::set<int> removed = cur.removed;
      SteinerTree tree = cur.tree;
      while (true) {
        const int eid = edge_at(base_graph, tree, t);
        if (eid < 0) break;
        removed.insert(eid);
        try {
          tree = solve_stpg(base_graph, terminals, removed, options.steiner);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::no_tree) break;
          throw;
        }
        ++st.trees_examined;
        const HVector h = classify_tree(base_graph, tree, rays);
        if (known.insert(h).second) {
          HomotopyCandidate c;
          c.tree = tree;
          c.hvector = h;
          c.generation = gen;
          c.removed_edges = removed;
          c.length = tree.total_length;
          c.parent = cur.candidate;
          out.push_back(c);
          seen_pairs.insert({h, removed});
          frontier.push_back({static_cast<int>(out.size()) - 1, tree, removed, gen});
        } else if (options.keep_redundant && seen_pairs.insert({h, removed}).second) {
          int owner = 0;
          while (out[static_cast<std::size_t>(owner)].hvector != h) ++owner;
          frontier.push_back({owner, tree, removed, gen});
        }
      }
    }
  }
  return out;
}

// Convergence likelihood ---------------------------------------------------

std::vector<GapTraversal> gap_traversals(const NetworkGeometry& net, const Scenario& s) {
  const std::vector<PolyPath> paths = branch_paths(net);
  auto crossed = [&](const Segment& seg) {
    for (const PolyPath& p : paths) {
      if (count_crossings(p, seg) > 0) return true;
    }
    return false;
  };
  std::vector<GapTraversal> out;
  const auto& obs = s.obstacles;
  for (int i = 0; i < s.obstacle_count(); ++i) {
    for (int j = i + 1; j < s.obstacle_count(); ++j) {
      const Disk& a = obs[static_cast<std::size_t>(i)];
      const Disk& b = obs[static_cast<std::size_t>(j)];
      if (crossed({a.center, b.center})) {
        out.push_back({GapTraversal::Kind::obstacle_obstacle, i, j, pair_clearance(a, b)});
      }
    }
  }
  for (int t = 0; t < s.terminal_count(); ++t) {
    const Point2 tp = s.terminals[static_cast<std::size_t>(t)];
    for (int j = 0; j < s.obstacle_count(); ++j) {
      const Disk& d = obs[static_cast<std::size_t>(j)];
      // Start just off the terminal so branches leaving it do not count.
      const Point2 dir = d.center - tp;
      const Segment seg{tp + 1e-7 * dir, d.center};
      if (crossed(seg)) out.push_back({GapTraversal::Kind::terminal_obstacle, t, j, terminal_clearance(tp, d)});
    }
  }
  return out;
}

std::vector<GapTraversal> gap_traversals(const GeoGraph& g, const SteinerTree& tree, const Scenario& s) {
  return gap_traversals(NetworkGeometry::from_graph(g, tree.edges), s);
}

double convergence_likelihood(const std::vector<GapTraversal>& gaps, double length, int n) {
  if (n < 1) throw Error(ErrorKind::degenerate_input, "convergence likelihood needs n >= 1");
  const double r_avg = length / n;
  double cl = 1.0;
  for (const auto& gap : gaps) {
    const double need = gap.kind == GapTraversal::Kind::obstacle_obstacle ? 2.0 * r_avg : r_avg;
    const double v = gap.gap > 0.0 ? 1.0 - need / gap.gap : -std::numeric_limits<double>::infinity();
    cl = std::min(cl, v);
  }
  return 100.0 * cl;
}

double convergence_likelihood(const GeoGraph& g, const SteinerTree& tree, const Scenario& s, int n) {
  return convergence_likelihood(gap_traversals(g, tree, s), tree.total_length, n);
}

// Relay seeding -----------------------------------------------------------

NetworkState seed_relays(const NetworkGeometry& net, const Scenario& s, int n) {
  if (n < 1) throw Error(ErrorKind::degenerate_input, "seed_relays needs n >= 1");
  const std::vector<PolyPath> paths = branch_paths(net);
  std::vector<double> len;
  for (const auto& p : paths) len.push_back(p.length());
  const double total = std::accumulate(len.begin(), len.end(), 0.0);
  if (paths.empty() || total <= 0.0) throw Error(ErrorKind::degenerate_input, "cannot seed relays on an empty tree");

  std::vector<int> count(paths.size());
  std::vector<std::pair<double, std::size_t>> rest;
  int placed = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double share = n * len[i] / total;
    count[i] = static_cast<int>(std::floor(share));
    placed += count[i];
    rest.push_back({share - count[i], i});
  }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; placed < n; ++k, ++placed) ++count[rest[k % rest.size()].second];

  std::vector<Point2> relays;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double step = len[i] / (count[i] + 1);
    for (int k = 1; k <= count[i]; ++k) relays.push_back(paths[i].point_at_length(k * step));
  }
  return NetworkState::with_relays(s, std::move(relays));
}

NetworkState seed_relays(const GeoGraph& g, const SteinerTree& tree, const Scenario& s, int n) {
  return seed_relays(NetworkGeometry::from_graph(g, tree.edges), s, n);
}

// Pre-scan -----------------------------------------------------------------

int PrescanResult::final_classes() const {
  std::set<HVector> h;
  for (const auto& e : evolved) h.insert(e.hvector);
  return static_cast<int>(h.size());
}

namespace {

Scenario without_obstacles(const Scenario& s) {
  Scenario free = s;
  free.obstacles.clear();
  return free;
}

// Straight terminal MST, used to seed the obstacle-free run.
NetworkGeometry terminal_mst(const Scenario& s) {
  NetworkGeometry net;
  net.nodes = s.terminals;
  for (const TreeEdge& e : mst_squared(s.terminals)) {
    net.links.push_back({e.u, e.v, Segment{s.terminals[static_cast<std::size_t>(e.u)],
                                           s.terminals[static_cast<std::size_t>(e.v)]}});
  }
  net.terminals.resize(s.terminals.size());
  std::iota(net.terminals.begin(), net.terminals.end(), 0);
  return net;
}

struct RunOutcome {
  OptimizeResult result;
  bool ok = false;
};

RunOutcome evolve(const Scenario& s, NetworkState seed, const OptimizerConfig& cfg) {
  RunOutcome out;
  out.result = optimize(s, std::move(seed), cfg);
  const CostResult c = cost(s, out.result.state);
  out.ok = out.result.trace.converged && c.feasible && is_strongly_connected(out.result.state, s);
  return out;
}

}  // namespace

PrescanResult prescan(const Scenario& s, const PrescanConfig& cfg) {
  s.validate();
  cfg.optimizer.validate();
  if (cfg.relays < 1) throw Error(ErrorKind::invalid_scenario, "prescan needs at least one relay");
  PrescanResult res;
  const CardinalRays rays = CardinalRays::make(s.obstacles, s.terminals);

  // Obstacle-free optimum, accepted when it already respects the obstacles.
  {
    const Scenario free = without_obstacles(s);
    const RunOutcome s0 = evolve(free, seed_relays(terminal_mst(s), free, cfg.relays), cfg.optimizer);
    if (s0.ok && cost(s, s0.result.state).feasible) {
      EvolvedResult e;
      e.state = s0.result.state;
      e.mst = s0.result.mst;
      e.hvector = classify(NetworkGeometry::from_network(s, e.state, e.mst), s.obstacles, rays);
      e.cost = cost(s, e.state).area;
      e.steps = static_cast<int>(s0.result.trace.steps.size());
      res.evolved.push_back(std::move(e));
      res.obstacle_free_solution = true;
      return res;
    }
  }

  const GeoGraph g = augment(build_graph(s.terminals, s.obstacles, cfg.graph));
  std::set<int> terminals;
  for (int id : g.terminal_nodes()) terminals.insert(id);
  HomotopyCandidate first;
  try {
    first.tree = solve_stpg(g, terminals, {}, cfg.homgen.steiner);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::no_tree) throw Error(ErrorKind::no_solution, "terminals cannot be connected");
    throw;
  }
  first.hvector = classify_tree(g, first.tree, rays);
  first.length = first.tree.total_length;
  res.homgen_stats.trees_examined = 1;
  res.candidates = homgen({first}, g, cfg.homgen, &res.homgen_stats);

  std::vector<int> accepted;
  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const double cl = convergence_likelihood(g, res.candidates[i].tree, s, cfg.relays);
    res.cl.push_back(cl);
    if (cl > cfg.cl_threshold) {
      accepted.push_back(static_cast<int>(i));
    } else {
      res.discarded.push_back({static_cast<int>(i), cl});
    }
  }

  // Independent runs; slots keep the output order fixed.
  std::vector<RunOutcome> runs(accepted.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < accepted.size(); k = next++) {
      const auto& c = res.candidates[static_cast<std::size_t>(accepted[k])];
      runs[k] = evolve(s, seed_relays(g, c.tree, s, cfg.relays), cfg.optimizer);
    }
  };
  const int threads = std::clamp(cfg.threads, 1, std::max(1, static_cast<int>(accepted.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t k = 0; k < accepted.size(); ++k) {
    const RunOutcome& r = runs[k];
    const CostResult c = cost(s, r.result.state);
    if (!r.ok) {
      res.failed.push_back({accepted[k], c.feasible, r.result.trace.converged});
      continue;
    }
    EvolvedResult e;
    e.candidate = accepted[k];
    e.state = r.result.state;
    e.mst = r.result.mst;
    e.hvector = classify(NetworkGeometry::from_network(s, e.state, e.mst), s.obstacles, rays);
    e.cost = c.area;
    e.steps = static_cast<int>(r.result.trace.steps.size());
    res.evolved.push_back(std::move(e));
  }
  std::stable_sort(res.evolved.begin(), res.evolved.end(), [&](const EvolvedResult& a, const EvolvedResult& b) {
    const int ga = res.candidates[static_cast<std::size_t>(a.candidate)].generation;
    const int gb = res.candidates[static_cast<std::size_t>(b.candidate)].generation;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (ga != gb) return ga < gb;
    return a.hvector < b.hvector;
  });
  return res;
}

std::string prescan_summary_csv(const std::vector<std::pair<const PrescanConfig*, const PrescanResult*>>& rows) {
  std::string out = "n,generations,s_pre,cl_pass,s_fin,min_cost\n";
  for (const auto& [cfg, r] : rows) {
    int max_gen = 0;
    for (const auto& c : r->candidates) max_gen = std::max(max_gen, c.generation);
    const int pass = static_cast<int>(r->candidates.size() - r->discarded.size());
    const std::string min_cost = r->evolved.empty() ? "" : fmt::format("{:.6f}", r->evolved.front().cost);
    out += fmt::format("{},{},{},{},{},{}\n", cfg->relays, max_gen, r->candidates.size(), pass, r->final_classes(),
                       min_cost);
  }
  return out;
}

std::string prescan_candidates_csv(const PrescanResult& r) {
  std::set<int> failed;
  for (const auto& f : r.failed) failed.insert(f.candidate);

  std::string out = "id,generation,parent,hvector,length,cl,status,cost,final_hvector\n";
  auto row = [&](int id, const std::string& status, const EvolvedResult* e) {
    const auto& c = r.candidates[static_cast<std::size_t>(id)];
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{},{},{}\n", id, c.generation, c.parent, c.hvector.to_string(),
                       c.length, r.cl[static_cast<std::size_t>(id)], status, e ? fmt::format("{:.6f}", e->cost) : "",
                       e ? e->hvector.to_string() : "");
  };
  // Evolved rows in ranking order, then the rest by id.
  std::set<int> ranked;
  for (const auto& e : r.evolved) {
    if (e.candidate < 0) {
      out += fmt::format("-1,0,-1,,,100.000000,obstacle_free,{:.6f},{}\n", e.cost, e.hvector.to_string());
      continue;
    }
    row(e.candidate, "evolved", &e);
    ranked.insert(e.candidate);
  }
  for (int id = 0; id < static_cast<int>(r.candidates.size()); ++id) {
    if (!ranked.count(id)) row(id, failed.count(id) ? "failed" : "discarded", nullptr);
  }
  return out;
}

}  // namespace relaynet
