#include "relaynet/homotopy.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

#include "relaynet/error.hpp"

namespace relaynet {

NetworkGeometry NetworkGeometry::from_graph(const GeoGraph& g, const std::vector<int>& edge_ids) {
  NetworkGeometry net;
  for (const GeoNode& n : g.nodes()) net.nodes.push_back(n.position);
  for (int eid : edge_ids) {
    const GeoEdge& e = g.edge(eid);
    net.links.push_back({e.u, e.v, e.geometry});
  }
  net.terminals = g.terminal_nodes();
  return net;
}

NetworkGeometry NetworkGeometry::from_network(const Scenario& s, const NetworkState& st,
                                              const std::vector<TreeEdge>& tree) {
  NetworkGeometry net;
  const int n = node_count(s, st);
  for (int i = 0; i < n; ++i) net.nodes.push_back(node_position(s, st, i));
  for (const TreeEdge& e : tree) {
    net.links.push_back({e.u, e.v, Segment{net.nodes[static_cast<std::size_t>(e.u)],
                                           net.nodes[static_cast<std::size_t>(e.v)]}});
  }
  net.terminals.resize(static_cast<std::size_t>(s.terminal_count()));
  std::iota(net.terminals.begin(), net.terminals.end(), 0);
  return net;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
  return x;
}

}  // namespace

std::vector<Branch> branches(const std::vector<TreeEdge>& edges, const std::vector<int>& terminals) {
  int n = 0;
  for (const auto& e : edges) n = std::max({n, e.u + 1, e.v + 1});
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));  // (neighbour, edge index)
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    const int a = find_root(parent, u);
    const int b = find_root(parent, v);
    if (a == b) throw Error(ErrorKind::not_a_tree, "network contains a cycle");
    parent[static_cast<std::size_t>(a)] = b;
    adj[static_cast<std::size_t>(u)].push_back({v, static_cast<int>(i)});
    adj[static_cast<std::size_t>(v)].push_back({u, static_cast<int>(i)});
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::vector<bool> is_end(static_cast<std::size_t>(n), false);
  for (int v = 0; v < n; ++v) is_end[static_cast<std::size_t>(v)] = adj[static_cast<std::size_t>(v)].size() != 2;
  for (int t : terminals) {
    if (t >= 0 && t < n) is_end[static_cast<std::size_t>(t)] = true;
  }

  std::vector<bool> used(edges.size(), false);
  std::vector<Branch> out;
  for (int start = 0; start < n; ++start) {
    if (!is_end[static_cast<std::size_t>(start)]) continue;
    for (auto [next, eid] : adj[static_cast<std::size_t>(start)]) {
      if (used[static_cast<std::size_t>(eid)]) continue;
      Branch b{start};
      int prev = start;
      int cur = next;
      used[static_cast<std::size_t>(eid)] = true;
      while (true) {
        b.push_back(cur);
        if (is_end[static_cast<std::size_t>(cur)]) break;
        const auto& nb = adj[static_cast<std::size_t>(cur)];
        const auto step = nb[0].first == prev ? nb[1] : nb[0];
        used[static_cast<std::size_t>(step.second)] = true;
        prev = cur;
        cur = step.first;
      }
      out.push_back(std::move(b));
    }
  }
  return out;
}

namespace {

using LinkIndex = std::map<std::pair<int, int>, std::size_t>;

LinkIndex index_links(const NetworkGeometry& net) {
  LinkIndex idx;
  for (std::size_t i = 0; i < net.links.size(); ++i) {
    idx[{net.links[i].u, net.links[i].v}] = i;
    idx[{net.links[i].v, net.links[i].u}] = i;
  }
  return idx;
}

PathElement oriented(const NetworkGeometry::Link& link, int from) {
  return from == link.u ? link.geometry : reversed(link.geometry);
}

PolyPath path_along(const NetworkGeometry& net, const LinkIndex& idx, const std::vector<int>& nodes) {
  PolyPath p;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& link = net.links[idx.at({nodes[i - 1], nodes[i]})];
    p.elements.push_back(oriented(link, nodes[i - 1]));
  }
  return p;
}

std::vector<TreeEdge> link_edges(const NetworkGeometry& net) {
  std::vector<TreeEdge> edges;
  for (const auto& l : net.links) edges.push_back({l.u, l.v});
  return edges;
}

}  // namespace

std::vector<PolyPath> branch_paths(const NetworkGeometry& net) {
  const LinkIndex idx = index_links(net);
  std::vector<PolyPath> out;
  for (const Branch& b : branches(link_edges(net), net.terminals)) out.push_back(path_along(net, idx, b));
  return out;
}

// Rays -------------------------------------------------------------------

CardinalRays CardinalRays::make(const std::vector<Disk>& obstacles, const std::vector<Point2>& terminals) {
  std::vector<Point2> pts = terminals;
  for (const Disk& d : obstacles) {
    for (Point2 dir : {Point2{1, 0}, Point2{-1, 0}, Point2{0, 1}, Point2{0, -1}}) {
      pts.push_back(d.center + d.radius * dir);
    }
  }
  double diameter = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) diameter = std::max(diameter, distance(pts[i], pts[j]));
  }
  const double reach = 2.0 * std::max(diameter, 1.0);
  CardinalRays out;
  for (const Disk& d : obstacles) {
    out.rays.push_back({Segment{d.center, d.center + Point2{0, reach}}, Segment{d.center, d.center + Point2{reach, 0}},
                        Segment{d.center, d.center - Point2{0, reach}}, Segment{d.center, d.center - Point2{reach, 0}}});
  }
  return out;
}

std::string HVector::to_string() const {
  std::string s;
  for (auto b : h1) s += b ? '1' : '0';
  for (std::size_t i = 0; i < h2.size(); ++i) {
    if (i % 4 == 0) s += ';';
    s += h2[i] ? '1' : '0';
  }
  return s;
}

namespace {

constexpr double kNudge = 1e-6;

std::vector<Point2> path_vertices(const std::vector<PolyPath>& paths) {
  std::vector<Point2> v;
  for (const auto& p : paths) {
    for (const auto& e : p.elements) {
      v.push_back(element_start(e));
      v.push_back(element_end(e));
    }
  }
  return v;
}

// Rotates `s` about `pivot` in growing alternating steps until no vertex sits on it.
Segment clear_of_vertices(Segment s, Point2 pivot, const std::vector<Point2>& vertices) {
  auto touches = [&](const Segment& seg) {
    return std::any_of(vertices.begin(), vertices.end(),
                       [&](Point2 p) { return distance_to_segment(p, seg) <= kGeomTol; });
  };
  for (int k = 1; touches(s) && k < 64; ++k) {
    const double angle = kNudge * ((k + 1) / 2) * (k % 2 ? 1.0 : -1.0);
    const Segment trial{rotate_about(s.a, pivot, angle), rotate_about(s.b, pivot, angle)};
    if (!touches(trial)) return trial;
  }
  return s;
}

std::uint8_t odd_for_some_branch(const std::vector<PolyPath>& paths, const Segment& s) {
  for (const auto& p : paths) {
    if (count_crossings(p, s) % 2 == 1) return 1;
  }
  return 0;
}

}  // namespace

HVector classify(const std::vector<PolyPath>& branch_geometry, const std::vector<Disk>& obstacles,
                 const CardinalRays& rays) {
  const auto vertices = path_vertices(branch_geometry);
  HVector h;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    for (std::size_t j = i + 1; j < obstacles.size(); ++j) {
      const Point2 ci = obstacles[i].center;
      const Segment s = clear_of_vertices({ci, obstacles[j].center}, ci, vertices);
      h.h1.push_back(odd_for_some_branch(branch_geometry, s));
    }
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    for (const Segment& ray : rays.rays.at(i)) {
      const Segment s = clear_of_vertices(ray, obstacles[i].center, vertices);
      h.h2.push_back(odd_for_some_branch(branch_geometry, s));
    }
  }
  return h;
}

HVector classify(const NetworkGeometry& net, const std::vector<Disk>& obstacles, const CardinalRays& rays) {
  return classify(branch_paths(net), obstacles, rays);
}

std::uint64_t max_homotopies(int f, int phi) {
  std::uint64_t out = 1;
  for (int i = 0; i < phi; ++i) out *= static_cast<std::uint64_t>(f);
  return out;
}

int face_count(int m) { return m; }

std::uint64_t bell_number(int phi) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < phi; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

// Faces ------------------------------------------------------------------

bool inside_closed(const PolyPath& closed, Point2 p) {
  std::vector<Point2> vertices = path_vertices({closed});
  double extent = 1.0;
  for (Point2 v : vertices) extent = std::max(extent, distance(v, p));
  for (const auto& e : closed.elements) {
    if (const auto* a = std::get_if<Arc>(&e)) extent = std::max(extent, distance(a->disk.center, p) + a->disk.radius);
  }
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Segment ray{p, p + polar(4.0 * extent, 0.3141 + 0.7071 * attempt)};
    const bool grazes = std::any_of(vertices.begin(), vertices.end(),
                                    [&](Point2 v) { return distance_to_segment(v, ray) <= 1e-7; });
    if (grazes) continue;
    int count = 0;
    for (const auto& e : closed.elements) count += element_crossings(e, ray, true);
    return count % 2 == 1;
  }
  return false;
}

namespace {

std::vector<int> tree_path(const NetworkGeometry& net, int from, int to) {
  std::map<int, std::vector<int>> adj;
  for (const auto& l : net.links) {
    adj[l.u].push_back(l.v);
    adj[l.v].push_back(l.u);
  }
  std::map<int, int> prev{{from, from}};
  std::queue<int> q;
  q.push(from);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (prev.emplace(v, u).second) q.push(v);
    }
  }
  if (!prev.count(to)) throw Error(ErrorKind::not_a_tree, "network does not connect the terminals");
  std::vector<int> path{to};
  while (path.back() != from) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

// Counter-clockwise hull of the given points, returned as indices.
std::vector<int> convex_hull(const std::vector<Point2>& pts) {
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const Point2 p = pts[static_cast<std::size_t>(a)];
    const Point2 q = pts[static_cast<std::size_t>(b)];
    return p.x != q.x ? p.x < q.x : p.y < q.y;
  });
  if (idx.size() < 3) return idx;
  std::vector<int> hull(2 * idx.size());
  std::size_t k = 0;
  auto turn = [&](int o, int a, int b) {
    return cross(pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(o)],
                 pts[static_cast<std::size_t>(b)] - pts[static_cast<std::size_t>(o)]);
  };
  for (int i : idx) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], i) <= 0) --k;
    hull[k++] = i;
  }
  for (std::size_t t = idx.size() - 1, lower = k + 1; t-- > 0;) {
    const int i = idx[t];
    while (k >= lower && turn(hull[k - 2], hull[k - 1], i) <= 0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

std::vector<std::vector<int>> partition_of(const NetworkGeometry& net, const std::vector<Disk>& obstacles) {
  std::vector<std::vector<int>> out;
  if (obstacles.empty()) return out;
  const LinkIndex idx = index_links(net);

  std::vector<PolyPath> curves;
  const auto& terms = net.terminals;
  if (terms.size() == 2 && !net.links.empty()) {
    // Two sides of a path: close it far away on one side.
    const Point2 a = net.nodes[static_cast<std::size_t>(terms[0])];
    const Point2 b = net.nodes[static_cast<std::size_t>(terms[1])];
    double extent = distance(a, b);
    for (Point2 p : net.nodes) extent = std::max({extent, distance(p, a), distance(p, b)});
    for (const Disk& d : obstacles) extent = std::max(extent, distance(d.center, a) + d.radius);
    const double far = 10.0 * (extent + 1.0);
    const Point2 u = unit(b - a);
    const Point2 n = perp(u);
    PolyPath c = path_along(net, idx, tree_path(net, terms[0], terms[1]));
    const Point2 fb = b + far * u;
    const Point2 fa = a - far * u;
    for (Segment s : {Segment{b, fb}, Segment{fb, fb + far * n}, Segment{fb + far * n, fa + far * n},
                      Segment{fa + far * n, fa}, Segment{fa, a}}) {
      c.elements.push_back(s);
    }
    curves.push_back(std::move(c));
  } else if (terms.size() >= 3) {
    std::vector<Point2> tp;
    for (int t : terms) tp.push_back(net.nodes[static_cast<std::size_t>(t)]);
    const auto hull = convex_hull(tp);
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const int a = terms[static_cast<std::size_t>(hull[i])];
      const int b = terms[static_cast<std::size_t>(hull[(i + 1) % hull.size()])];
      PolyPath c = path_along(net, idx, tree_path(net, a, b));
      c.elements.push_back(Segment{net.nodes[static_cast<std::size_t>(b)], net.nodes[static_cast<std::size_t>(a)]});
      curves.push_back(std::move(c));
    }
  }

  std::map<std::vector<bool>, std::vector<int>> groups;
  for (std::size_t o = 0; o < obstacles.size(); ++o) {
    std::vector<bool> label;
    for (const auto& c : curves) label.push_back(inside_closed(c, obstacles[o].center));
    groups[label].push_back(static_cast<int>(o));
  }
  for (auto& [label, members] : groups) out.push_back(members);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace relaynet
