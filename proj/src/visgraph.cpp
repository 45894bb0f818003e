#include "relaynet/visgraph.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "relaynet/error.hpp"

namespace relaynet {

PathElement GeoEdge::oriented_from(int from) const {
  return from == u ? geometry : reversed(geometry);
}

int GeoGraph::add_node(Point2 p, NodeKind kind, std::optional<int> host) {
  const int id = node_count();
  nodes_.push_back({id, p, kind, host});
  adjacency_.emplace_back();
  if (kind == NodeKind::terminal) terminal_index_.push_back(id);
  return id;
}

int GeoGraph::add_edge(int u, int v, PathElement geometry) {
  const int id = edge_count();
  const double w = element_length(geometry);
  edges_.push_back({id, u, v, std::move(geometry), w});
  adjacency_[static_cast<std::size_t>(u)].push_back(id);
  adjacency_[static_cast<std::size_t>(v)].push_back(id);
  return id;
}

bool GeoGraph::has_segment_between(int u, int v) const {
  for (int e : incident(u)) {
    const GeoEdge& edge = edges_[static_cast<std::size_t>(e)];
    if (edge.other(u) == v && edge.is_segment()) return true;
  }
  return false;
}

namespace {

class GraphBuilder {
 public:
  GraphBuilder(const std::vector<Point2>& terminals, const std::vector<Disk>& obstacles,
               const GraphOptions& options)
      : terminals_(terminals), obstacles_(obstacles), options_(options), on_obstacle_(obstacles.size()) {}

  GeoGraph run() {
    graph_.set_obstacles(obstacles_);
    add_terminals();
    add_terminal_tangents();
    add_bitangents();
    add_direct_links();
    add_arcs();
    return std::move(graph_);
  }

 private:
  void add_terminals() {
    for (std::size_t i = 0; i < terminals_.size(); ++i) {
      const Point2 t = terminals_[i];
      std::optional<int> host;
      for (std::size_t o = 0; o < obstacles_.size(); ++o) {
        if (obstacles_[o].contains_strictly(t)) {
          throw Error(ErrorKind::invalid_scenario, fmt::format("terminal {} lies inside obstacle {}", i, o));
        }
        if (obstacles_[o].on_boundary(t)) {
          if (!host) host = static_cast<int>(o);
          on_obstacle_[o].push_back(static_cast<int>(i));
        }
      }
      graph_.add_node(t, NodeKind::terminal, host);
    }
  }

  int point_node(Point2 p, int obstacle) {
    for (int id : on_obstacle_[static_cast<std::size_t>(obstacle)]) {
      if (distance(graph_.node(id).position, p) <= options_.merge_tol) return id;
    }
    const int id = graph_.add_node(p, NodeKind::tangent_point, obstacle);
    on_obstacle_[static_cast<std::size_t>(obstacle)].push_back(id);
    return id;
  }

  void add_segment(int u, int v) {
    if (u == v || graph_.has_segment_between(u, v)) return;
    const Segment s{graph_.node(u).position, graph_.node(v).position};
    if (s.length() <= options_.merge_tol) return;
    graph_.add_edge(u, v, s);
  }

  void add_terminal_tangents() {
    for (std::size_t t = 0; t < terminals_.size(); ++t) {
      for (std::size_t o = 0; o < obstacles_.size(); ++o) {
        const auto tps = tangent_points(terminals_[t], obstacles_[o]);
        if (tps.size() != 2) continue;
        const int skip[] = {static_cast<int>(o)};
        for (Point2 q : tps) {
          if (!segment_clear({terminals_[t], q}, obstacles_, skip)) continue;
          add_segment(static_cast<int>(t), point_node(q, static_cast<int>(o)));
        }
      }
    }
  }

  void add_bitangents() {
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      for (std::size_t j = i + 1; j < obstacles_.size(); ++j) {
        const int skip[] = {static_cast<int>(i), static_cast<int>(j)};
        for (const Segment& s : bitangents(obstacles_[i], obstacles_[j])) {
          if (!segment_clear(s, obstacles_, skip)) continue;
          add_segment(point_node(s.a, static_cast<int>(i)), point_node(s.b, static_cast<int>(j)));
        }
      }
    }
  }

  void add_direct_links() {
    for (std::size_t a = 0; a < terminals_.size(); ++a) {
      for (std::size_t b = a + 1; b < terminals_.size(); ++b) {
        if (segment_clear({terminals_[a], terminals_[b]}, obstacles_)) {
          add_segment(static_cast<int>(a), static_cast<int>(b));
        }
      }
    }
  }

  void add_arcs() {
    for (std::size_t o = 0; o < obstacles_.size(); ++o) {
      const Disk& disk = obstacles_[o];
      auto ids = on_obstacle_[o];
      std::sort(ids.begin(), ids.end());
      const int skip[] = {static_cast<int>(o)};
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          const Point2 pa = graph_.node(ids[i]).position - disk.center;
          const Point2 pb = graph_.node(ids[j]).position - disk.center;
          const double ta = std::atan2(pa.y, pa.x);
          const double tb = std::atan2(pb.y, pb.x);
          const Arc ccw{disk, ta, tb, Orientation::ccw};
          const Arc cw{disk, ta, tb, Orientation::cw};
          if (ccw.length() <= options_.merge_tol || cw.length() <= options_.merge_tol) continue;
          std::vector<Arc> keep;
          const double diff = ccw.length() - cw.length();
          if (options_.arcs == ArcPolicy::both || std::abs(diff) <= kGeomTol) {
            keep = {ccw, cw};
          } else {
            keep = {diff < 0.0 ? ccw : cw};
          }
          for (const Arc& arc : keep) {
            if (arc_clear(arc, obstacles_, skip)) graph_.add_edge(ids[i], ids[j], arc);
          }
        }
      }
    }
  }

  const std::vector<Point2>& terminals_;
  const std::vector<Disk>& obstacles_;
  GraphOptions options_;
  std::vector<std::vector<int>> on_obstacle_;
  GeoGraph graph_;
};

}  // namespace

GeoGraph build_graph(const std::vector<Point2>& terminals, const std::vector<Disk>& obstacles,
                     const GraphOptions& options) {
  return GraphBuilder(terminals, obstacles, options).run();
}

GeoGraph augment(const GeoGraph& g) {
  GeoGraph out = g;
  const int n = g.node_count();
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (g.has_segment_between(u, v)) continue;
      const Segment s{g.node(u).position, g.node(v).position};
      if (s.length() <= 1e-7) continue;
      if (segment_clear(s, g.obstacles())) out.add_edge(u, v, s);
    }
  }
  return out;
}

bool edges_clear(const GeoGraph& g) {
  for (const GeoEdge& e : g.edges()) {
    if (!element_clear(e.geometry, g.obstacles())) return false;
  }
  return true;
}

PolyPath GraphPath::geometry(const GeoGraph& g) const {
  PolyPath out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out.elements.push_back(g.edge(edges[i]).oriented_from(nodes[i]));
  }
  return out;
}

bool path_less(const GraphPath& a, const GraphPath& b) {
  if (a.weight != b.weight) return a.weight < b.weight;
  if (a.nodes != b.nodes) return a.nodes < b.nodes;
  return a.edges < b.edges;
}

namespace {

bool weights_tie(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::vector<int> node_sequence(int node, const std::vector<int>& pred_node) {
  std::vector<int> seq;
  for (int v = node; v >= 0; v = pred_node[static_cast<std::size_t>(v)]) seq.push_back(v);
  std::reverse(seq.begin(), seq.end());
  return seq;
}

double sum_weights(const GeoGraph& g, const std::vector<int>& edges) {
  double w = 0.0;
  for (int e : edges) w += g.edge(e).weight;
  return w;
}

}  // namespace

std::optional<GraphPath> dijkstra_path(const GeoGraph& g, int from, int to,
                                       const std::set<int>& banned_edges,
                                       const std::set<int>& banned_nodes) {
  const auto n = static_cast<std::size_t>(g.node_count());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> pred_node(n, -1);
  std::vector<int> pred_edge(n, -1);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(from)] = 0.0;
  queue.push({0.0, from});

  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    const auto uu = static_cast<std::size_t>(u);
    if (done[uu] || d > dist[uu]) continue;
    done[uu] = true;
    if (u == to) break;
    for (int eid : g.incident(u)) {
      if (banned_edges.count(eid)) continue;
      const GeoEdge& e = g.edge(eid);
      const int v = e.other(u);
      const auto vv = static_cast<std::size_t>(v);
      if (done[vv] || banned_nodes.count(v)) continue;
      const double nd = d + e.weight;
      bool take = false;
      if (dist[vv] == inf || (nd < dist[vv] && !weights_tie(nd, dist[vv]))) {
        take = true;
      } else if (weights_tie(nd, dist[vv])) {
        const auto mine = node_sequence(u, pred_node);
        const auto theirs = node_sequence(pred_node[vv], pred_node);
        take = mine < theirs || (mine == theirs && eid < pred_edge[vv]);
      }
      if (take) {
        dist[vv] = std::min(nd, dist[vv]);
        pred_node[vv] = u;
        pred_edge[vv] = eid;
        queue.push({dist[vv], v});
      }
    }
  }
  if (!done[static_cast<std::size_t>(to)]) return std::nullopt;

  GraphPath path;
  path.nodes = node_sequence(to, pred_node);
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    path.edges.push_back(pred_edge[static_cast<std::size_t>(path.nodes[i])]);
  }
  path.weight = sum_weights(g, path.edges);
  return path;
}

GraphPath shortest_path(const GeoGraph& g, int terminal_a, int terminal_b) {
  auto p = dijkstra_path(g, g.terminal_node(terminal_a), g.terminal_node(terminal_b));
  if (!p) {
    throw Error(ErrorKind::no_path, fmt::format("no path between terminals {} and {}", terminal_a, terminal_b));
  }
  return *p;
}

std::vector<GraphPath> yen_k_paths(const GeoGraph& g, int terminal_a, int terminal_b, int k) {
  std::vector<GraphPath> accepted;
  if (k < 1) return accepted;
  const int source = g.terminal_node(terminal_a);
  const int target = g.terminal_node(terminal_b);
  auto first = dijkstra_path(g, source, target);
  if (!first) return accepted;
  accepted.push_back(*first);

  auto cmp = [](const GraphPath& a, const GraphPath& b) { return path_less(a, b); };
  std::set<GraphPath, decltype(cmp)> candidates(cmp);
  std::set<std::vector<int>> seen{first->edges};

  while (static_cast<int>(accepted.size()) < k) {
    const GraphPath prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const int spur = prev.nodes[i];
      const std::vector<int> root_nodes(prev.nodes.begin(), prev.nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      const std::vector<int> root_edges(prev.edges.begin(), prev.edges.begin() + static_cast<std::ptrdiff_t>(i));

      std::set<int> banned_edges;
      for (const GraphPath& p : accepted) {
        if (p.nodes.size() > i + 1 &&
            std::equal(root_nodes.begin(), root_nodes.end(), p.nodes.begin()) &&
            std::equal(root_edges.begin(), root_edges.end(), p.edges.begin())) {
          banned_edges.insert(p.edges[i]);
        }
      }
      const std::set<int> banned_nodes(root_nodes.begin(), root_nodes.end() - 1);
      auto spur_path = dijkstra_path(g, spur, target, banned_edges, banned_nodes);
      if (!spur_path) continue;

      GraphPath total;
      total.nodes = root_nodes;
      total.nodes.insert(total.nodes.end(), spur_path->nodes.begin() + 1, spur_path->nodes.end());
      total.edges = root_edges;
      total.edges.insert(total.edges.end(), spur_path->edges.begin(), spur_path->edges.end());
      total.weight = sum_weights(g, total.edges);
      if (seen.insert(total.edges).second) candidates.insert(std::move(total));
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return accepted;
}

}  // namespace relaynet
