#include "relaynet/network.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "relaynet/error.hpp"

namespace relaynet {

void Scenario::validate() const {
  if (terminals.size() < 2) {
    throw Error(ErrorKind::invalid_scenario, "scenario needs at least 2 terminals");
  }
  if (relay_budget < 0) throw Error(ErrorKind::invalid_scenario, "relay_budget must be >= 0");
  auto finite = [](Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Disk& o = obstacles[i];
    if (!finite(o.center) || !std::isfinite(o.radius) || o.radius <= 0.0) {
      throw Error(ErrorKind::invalid_scenario, fmt::format("obstacle {}: radius must be > 0 and finite", i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (near(o.center, obstacles[j].center) && std::abs(o.radius - obstacles[j].radius) <= kGeomTol) {
        throw Error(ErrorKind::invalid_scenario, fmt::format("obstacle {} coincides with obstacle {}", i, j));
      }
    }
  }
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    const Point2 t = terminals[i];
    if (!finite(t)) throw Error(ErrorKind::invalid_scenario, fmt::format("terminal {}: non-finite coordinates", i));
    for (std::size_t j = 0; j < i; ++j) {
      if (near(t, terminals[j])) {
        throw Error(ErrorKind::invalid_scenario, fmt::format("terminal {} duplicates terminal {}", i, j));
      }
    }
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      if (obstacles[k].contains_strictly(t)) {
        throw Error(ErrorKind::invalid_scenario, fmt::format("terminal {} lies inside obstacle {}", i, k));
      }
    }
  }
}

NetworkState NetworkState::with_relays(const Scenario& s, std::vector<Point2> relays) {
  NetworkState st;
  st.relays = std::move(relays);
  st.radii_terminals.assign(s.terminals.size(), 0.0);
  st.radii_relays.assign(st.relays.size(), 0.0);
  st.active.assign(st.relays.size(), true);
  return st;
}

int NetworkState::active_relay_count() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

int node_count(const Scenario& s, const NetworkState& st) {
  return s.terminal_count() + st.relay_count();
}

Point2 node_position(const Scenario& s, const NetworkState& st, int id) {
  const int m = s.terminal_count();
  return id < m ? s.terminals[id] : st.relays[id - m];
}

double node_radius(const Scenario& s, const NetworkState& st, int id) {
  const int m = s.terminal_count();
  return id < m ? st.radii_terminals[id]
                : st.radii_relays[id - m];
}

bool node_active(const Scenario& s, const NetworkState& st, int id) {
  const int m = s.terminal_count();
  return id < m || st.active[id - m];
}

std::vector<int> active_node_ids(const Scenario& s, const NetworkState& st) {
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(node_count(s, st)));
  for (int id = 0; id < node_count(s, st); ++id) {
    if (node_active(s, st, id)) ids.push_back(id);
  }
  return ids;
}

double max_feasible_radius(Point2 p, const std::vector<Disk>& obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const Disk& o : obstacles) best = std::min(best, distance(p, o.center) - o.radius);
  return best;
}

bool disk_feasible(Point2 p, double r, const std::vector<Disk>& obstacles) {
  for (const Disk& o : obstacles) {
    if (distance(p, o.center) < o.radius + r - kGeomTol) return false;
  }
  return true;
}

CostResult cost(const Scenario& s, const NetworkState& st) {
  CostResult out;
  for (int id = 0; id < node_count(s, st); ++id) {
    const double r = node_active(s, st, id) ? node_radius(s, st, id) : 0.0;
    out.area += r * r;
    if (r > 0.0 && !disk_feasible(node_position(s, st, id), r, s.obstacles)) out.feasible = false;
    if (r == 0.0 && id < s.terminal_count()) {
      // a terminal with no range still must sit outside every obstacle
      for (const Disk& o : s.obstacles) {
        if (o.contains_strictly(node_position(s, st, id))) out.feasible = false;
      }
    }
  }
  return out;
}

CommGraph comm_graph(const Scenario& s, const NetworkState& st) {
  CommGraph g;
  g.nodes = active_node_ids(s, st);
  const std::size_t k = g.nodes.size();
  g.out.assign(k, {});
  for (std::size_t i = 0; i < k; ++i) {
    const Point2 pi = node_position(s, st, g.nodes[i]);
    const double ri = node_radius(s, st, g.nodes[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      if (distance(pi, node_position(s, st, g.nodes[j])) <= ri + kGeomTol) {
        g.out[i].push_back(static_cast<int>(j));
      }
    }
  }
  return g;
}

namespace {

std::vector<bool> reach_from_zero(const std::vector<std::vector<int>>& adj) {
  std::vector<bool> seen(adj.size(), false);
  if (adj.empty()) return seen;
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const CommGraph& g) {
  if (g.nodes.size() <= 1) return true;
  const auto fwd = reach_from_zero(g.out);
  if (std::find(fwd.begin(), fwd.end(), false) != fwd.end()) return false;
  std::vector<std::vector<int>> rev(g.out.size());
  for (std::size_t u = 0; u < g.out.size(); ++u) {
    for (int v : g.out[u]) rev[v].push_back(static_cast<int>(u));
  }
  const auto bwd = reach_from_zero(rev);
  return std::find(bwd.begin(), bwd.end(), false) == bwd.end();
}

bool is_strongly_connected(const NetworkState& st, const Scenario& s) {
  return is_strongly_connected(comm_graph(s, st));
}

std::vector<TreeEdge> mst_squared(const std::vector<Point2>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<TreeEdge> edges;
  if (n < 2) return edges;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(points.size(), inf);
  std::vector<int> parent(points.size(), -1);
  std::vector<bool> in_tree(points.size(), false);
  key[0] = 0.0;
  edges.reserve(points.size() - 1);
  for (int iter = 0; iter < n; ++iter) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      if (!in_tree[v] && (u < 0 || key[v] < key[u])) u = v;
    }
    in_tree[u] = true;
    if (parent[u] >= 0) {
      const int p = parent[u];
      edges.push_back({std::min(u, p), std::max(u, p)});
    }
    const Point2 pu = points[u];
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = distance2(pu, points[v]);
      auto& kv = key[v];
      if (w < kv || (w == kv && u < parent[v])) {
        kv = w;
        parent[v] = u;
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const TreeEdge& a, const TreeEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  return edges;
}

double tree_squared_weight(const std::vector<TreeEdge>& tree, const std::vector<Point2>& points) {
  double total = 0.0;
  for (const auto& e : tree) {
    total += distance2(points[e.u], points[e.v]);
  }
  return total;
}

std::vector<double> range_assignment_from_tree(const std::vector<TreeEdge>& tree,
                                               const std::vector<Point2>& points) {
  std::vector<double> radii(points.size(), 0.0);
  for (const auto& e : tree) {
    const double len = distance(points[e.u], points[e.v]);
    radii[e.u] = std::max(radii[e.u], len);
    radii[e.v] = std::max(radii[e.v], len);
  }
  return radii;
}

std::vector<TreeEdge> assign_mst_radii(const Scenario& s, NetworkState& st) {
  const std::vector<int> ids = active_node_ids(s, st);
  std::vector<Point2> pts;
  pts.reserve(ids.size());
  for (int id : ids) pts.push_back(node_position(s, st, id));
  const auto local = mst_squared(pts);
  const auto radii = range_assignment_from_tree(local, pts);
  const int m = s.terminal_count();
  st.radii_terminals.assign(static_cast<std::size_t>(m), 0.0);
  st.radii_relays.assign(st.relays.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < m) st.radii_terminals[id] = radii[i];
    else st.radii_relays[id - m] = radii[i];
  }
  std::vector<TreeEdge> global;
  global.reserve(local.size());
  for (const auto& e : local) {
    global.push_back({ids[e.u], ids[e.v]});
  }
  return global;
}

namespace {

struct BruteSearch {
  int k = 0;
  std::vector<std::vector<double>> dist;
  std::vector<std::vector<double>> candidates;  // ascending per node
  std::vector<double> suffix_min;               // sum of cheapest remaining r^2
  std::vector<int> choice;
  std::vector<int> best_choice;
  double best = std::numeric_limits<double>::infinity();

  bool strongly_connected() const {
    std::vector<unsigned> out(static_cast<std::size_t>(k), 0U);
    for (int i = 0; i < k; ++i) {
      const double r = candidates[i][choice[i]];
      for (int j = 0; j < k; ++j) {
        if (i != j && dist[i][j] <= r + kGeomTol) out[i] |= 1U << j;
      }
    }
    const unsigned all = (1U << k) - 1U;
    auto closure = [&](bool reverse) {
      unsigned seen = 1U;
      unsigned frontier = 1U;
      while (frontier) {
        unsigned next = 0U;
        for (int i = 0; i < k; ++i) {
          if (reverse) {
            if (!(seen >> i & 1U) && (out[i] & frontier)) next |= 1U << i;
          } else if (frontier >> i & 1U) {
            next |= out[i];
          }
        }
        next &= ~seen;
        seen |= next;
        frontier = next;
      }
      return seen == all;
    };
    return closure(false) && closure(true);
  }

  void dfs(int i, double partial) {
    if (partial + suffix_min[i] >= best) return;
    if (i == k) {
      if (strongly_connected()) {
        best = partial;
        best_choice = choice;
      }
      return;
    }
    const auto& c = candidates[i];
    for (std::size_t j = 0; j < c.size(); ++j) {
      choice[i] = static_cast<int>(j);
      dfs(i + 1, partial + c[j] * c[j]);
    }
  }
};

}  // namespace

NetworkState brute_force_optimum(const Scenario& s, const NetworkState& st, int max_nodes) {
  const std::vector<int> ids = active_node_ids(s, st);
  const int k = static_cast<int>(ids.size());
  if (k > max_nodes || k > 16) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("brute force limited to {} nodes, got {}", max_nodes, k));
  }
  BruteSearch search;
  search.k = k;
  search.dist.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  search.candidates.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const Point2 pi = node_position(s, st, ids[i]);
    const double cap = max_feasible_radius(pi, s.obstacles) + kGeomTol;
    auto& cand = search.candidates[i];
    for (int j = 0; j < k; ++j) {
      const double d = distance(pi, node_position(s, st, ids[j]));
      search.dist[i][j] = d;
      if (i != j && d <= cap) cand.push_back(d);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (cand.empty() && k > 1) {
      throw Error(ErrorKind::no_solution, fmt::format("node {} cannot reach any node without overlapping an obstacle",
                                                      ids[i]));
    }
    if (k == 1) cand.push_back(0.0);
  }
  search.suffix_min.assign(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = k - 1; i >= 0; --i) {
    const double c = search.candidates[i].front();
    search.suffix_min[i] = search.suffix_min[i + 1] + c * c;
  }
  search.choice.assign(static_cast<std::size_t>(k), 0);
  search.dfs(0, 0.0);
  if (search.best_choice.empty()) {
    throw Error(ErrorKind::no_solution, "no feasible strongly connected radius assignment");
  }

  NetworkState out = st;
  out.radii_terminals.assign(s.terminals.size(), 0.0);
  out.radii_relays.assign(st.relays.size(), 0.0);
  const int m = s.terminal_count();
  for (int i = 0; i < k; ++i) {
    const double r = search.candidates[i][search.best_choice[i]];
    const int id = ids[i];
    if (id < m) out.radii_terminals[id] = r;
    else out.radii_relays[id - m] = r;
  }
  return out;
}

}  // namespace relaynet
