#pragma once

#include <optional>
#include <set>
#include <vector>

#include "relaynet/geometry.hpp"

namespace relaynet {

enum class NodeKind { terminal, tangent_point };

struct GeoNode {
  int id = 0;
  Point2 position;
  NodeKind kind = NodeKind::tangent_point;
  std::optional<int> host_obstacle;
};

/// Undirected edge; `geometry` runs from node u to node v.
struct GeoEdge {
  int id = 0;
  int u = 0;
  int v = 0;
  PathElement geometry;
  double weight = 0.0;

  int other(int node) const { return node == u ? v : u; }
  /// Geometry oriented to leave `from`.
  PathElement oriented_from(int from) const;
  bool is_segment() const { return std::holds_alternative<Segment>(geometry); }
};

enum class ArcPolicy { shortest, both };

struct GraphOptions {
  ArcPolicy arcs = ArcPolicy::shortest;
  double merge_tol = 1e-7;
};

/// Visibility graph of terminals and tangent points. Terminal i is node i.
class GeoGraph {
 public:
  GeoGraph() = default;

  int add_node(Point2 p, NodeKind kind, std::optional<int> host = std::nullopt);
  /// Adds an edge; weight is the geometric length. Returns the edge id.
  int add_edge(int u, int v, PathElement geometry);

  const std::vector<GeoNode>& nodes() const { return nodes_; }
  const std::vector<GeoEdge>& edges() const { return edges_; }
  const GeoNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const GeoEdge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  /// Edge ids incident to a node, ascending.
  const std::vector<int>& incident(int node) const { return adjacency_.at(static_cast<std::size_t>(node)); }
  int terminal_node(int terminal) const { return terminal_index_.at(static_cast<std::size_t>(terminal)); }
  int terminal_count() const { return static_cast<int>(terminal_index_.size()); }
  std::vector<int> terminal_nodes() const { return terminal_index_; }
  bool has_segment_between(int u, int v) const;

  const std::vector<Disk>& obstacles() const { return obstacles_; }
  void set_obstacles(std::vector<Disk> obstacles) { obstacles_ = std::move(obstacles); }

 private:
  std::vector<GeoNode> nodes_;
  std::vector<GeoEdge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> terminal_index_;
  std::vector<Disk> obstacles_;
};

/// Tangent / bitangent / arc graph. Throws invalid_scenario when a terminal
/// lies strictly inside an obstacle.
GeoGraph build_graph(const std::vector<Point2>& terminals, const std::vector<Disk>& obstacles,
                     const GraphOptions& options = {});

/// Adds a straight edge for every node pair in line of sight that is not
/// already joined by a segment edge.
GeoGraph augment(const GeoGraph& g);

/// Path through the graph as parallel node and edge sequences.
struct GraphPath {
  std::vector<int> nodes;
  std::vector<int> edges;
  double weight = 0.0;

  PolyPath geometry(const GeoGraph& g) const;
};

/// Strict order used for ties: weight, then node sequence, then edge ids.
bool path_less(const GraphPath& a, const GraphPath& b);

/// Dijkstra between two nodes; equal-weight ties resolved toward the
/// lexicographically smaller node sequence. Edges in `banned_edges` and
/// nodes in `banned_nodes` are skipped. Returns nullopt when unreachable.
std::optional<GraphPath> dijkstra_path(const GeoGraph& g, int from, int to,
                                       const std::set<int>& banned_edges = {},
                                       const std::set<int>& banned_nodes = {});

/// Shortest path between terminals a and b; throws no_path.
GraphPath shortest_path(const GeoGraph& g, int terminal_a, int terminal_b);

/// Up to k shortest loopless paths between two terminals (Yen).
std::vector<GraphPath> yen_k_paths(const GeoGraph& g, int terminal_a, int terminal_b, int k);

/// Re-validates every edge against the obstacle set.
bool edges_clear(const GeoGraph& g);

}  // namespace relaynet
