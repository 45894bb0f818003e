#pragma once

#include <string>
#include <vector>

#include "relaynet/geometry.hpp"

namespace relaynet {

/// Problem instance: fixed terminals, no-transmission disks and a relay budget.
struct Scenario {
  std::vector<Point2> terminals;
  std::vector<Disk> obstacles;
  int relay_budget = 0;
  std::string units = "km";

  int terminal_count() const { return static_cast<int>(terminals.size()); }
  int obstacle_count() const { return static_cast<int>(obstacles.size()); }

  /// Throws Error(invalid_scenario) naming the offending terminal/obstacle.
  void validate() const;
};

/// Decision variables. Node ids: terminals first (0..m-1), then relays.
struct NetworkState {
  std::vector<Point2> relays;
  std::vector<double> radii_terminals;
  std::vector<double> radii_relays;
  std::vector<bool> active;

  static NetworkState with_relays(const Scenario& s, std::vector<Point2> relays);

  int relay_count() const { return static_cast<int>(relays.size()); }
  int active_relay_count() const;
};

int node_count(const Scenario& s, const NetworkState& st);
Point2 node_position(const Scenario& s, const NetworkState& st, int id);
double node_radius(const Scenario& s, const NetworkState& st, int id);
bool node_active(const Scenario& s, const NetworkState& st, int id);
/// Terminal ids followed by active relay ids, ascending.
std::vector<int> active_node_ids(const Scenario& s, const NetworkState& st);

/// Sum of squared radii plus the feasibility tag; `feasible == false` is the
/// infinite cost of the else-branch and must not be compared numerically.
struct CostResult {
  double area = 0.0;
  bool feasible = true;
};

/// Largest radius node `p` may use without overlapping an obstacle.
double max_feasible_radius(Point2 p, const std::vector<Disk>& obstacles);
bool disk_feasible(Point2 p, double r, const std::vector<Disk>& obstacles);

CostResult cost(const Scenario& s, const NetworkState& st);

/// Directed communication graph over active nodes: u->v iff |uv| <= r_u + tol.
struct CommGraph {
  std::vector<int> nodes;                 // global node ids
  std::vector<std::vector<int>> out;      // indices into `nodes`
};

CommGraph comm_graph(const Scenario& s, const NetworkState& st);
bool is_strongly_connected(const CommGraph& g);
bool is_strongly_connected(const NetworkState& st, const Scenario& s);

struct TreeEdge {
  int u = 0;
  int v = 0;
  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

/// MST under squared Euclidean weights (Prim). Ties go to the lower
/// (weight, node id, parent id). Edges are returned with u < v, sorted.
std::vector<TreeEdge> mst_squared(const std::vector<Point2>& points);
double tree_squared_weight(const std::vector<TreeEdge>& tree, const std::vector<Point2>& points);

/// Longest incident tree edge per node.
std::vector<double> range_assignment_from_tree(const std::vector<TreeEdge>& tree,
                                               const std::vector<Point2>& points);

/// Recomputes radii from the squared-weight MST of terminals and active
/// relays; inactive relays get radius 0. Returns the MST over global ids.
std::vector<TreeEdge> assign_mst_radii(const Scenario& s, NetworkState& st);

/// Exact minimum-cost feasible strongly connected radii for fixed positions.
/// Only pairwise distances are tried as radii. At most `max_nodes` active
/// nodes (budget_exceeded otherwise); no_solution when nothing is feasible.
NetworkState brute_force_optimum(const Scenario& s, const NetworkState& st, int max_nodes = 8);

}  // namespace relaynet
