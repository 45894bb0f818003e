#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relaynet/network.hpp"

namespace relaynet {

struct OptimizerConfig {
  int max_steps = 2000;
  int stability_window = 25;
  double stability_rel_tol = 1e-5;
  double leaf_steer_rate = 0.2;
  double neighbor_move_rate = 0.5;
  int stuck_steps_before_radial = 5;
  bool equilibration_enabled = true;
  std::uint64_t seed = 1;
  /// Store the MST every `snapshot_stride` steps (0 disables snapshots).
  int snapshot_stride = 0;

  /// Throws invalid_scenario when a field is out of range.
  void validate() const;
};

struct TraceStep {
  int step = 0;
  double cost = 0.0;
  bool feasible = true;
  int active_relays = 0;
};

struct OptimizerTrace {
  std::vector<TraceStep> steps;
  std::vector<std::pair<int, std::vector<TreeEdge>>> snapshots;
  bool converged = false;
  int stars_created = 0;
  int migrations = 0;
  int deactivated = 0;
};

struct OptimizeResult {
  NetworkState state;
  std::vector<TreeEdge> mst;  // global node ids
  OptimizerTrace trace;
};

/// Movement loop with branch equilibration (when enabled) and obstacle
/// avoidance (when obstacles exist).
OptimizeResult optimize(const Scenario& s, NetworkState initial, const OptimizerConfig& cfg);

/// n relays uniformly placed in the terminals' bounding box, away from obstacles.
NetworkState random_initial_state(const Scenario& s, int n, std::uint64_t seed);

struct Move {
  int node = 0;  // global node id of a relay
  Point2 delta;
};

/// Displacements of every relay on a branch that ends in a relay leaf,
/// toward the branch's other end.
std::vector<Move> steer_leaf_relays(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                                    const OptimizerConfig& cfg);

/// rate * (centroid of MST neighbours - position).
Point2 average_neighbor_move(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst, int node,
                             const OptimizerConfig& cfg);

/// Per-relay memory used by the no-overlap rule.
struct OverlapHistory {
  int steps_without_move = 0;
  int steps_trapped = 0;  // consecutive steps with the centre on or inside an obstacle
};

/// Radius a node at `p` needs to reach all of `neighbours`.
double link_radius(Point2 p, const std::vector<Point2>& neighbours);

/// Obstacle avoidance for one relay. Overlap at any position is judged with the
/// radius the relay would need there to keep its current MST links.
Point2 no_overlap_adjust(Point2 proposed, Point2 position, const std::vector<Point2>& neighbours,
                         const std::vector<Disk>& obstacles, const OverlapHistory& history, int stuck_threshold);

struct BranchStats {
  int id = 0;
  std::vector<int> nodes;  // global ids, endpoints included
  double length = 0.0;
  int interior = 0;
  double avg_radius = 0.0;  // length / (interior + 1)
};

std::vector<BranchStats> branch_stats(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst);

/// Two-branch cost change of moving one relay from the denser branch (length
/// ls, ns interior relays) to the sparser one (ll, nl), lengths unchanged.
double migration_delta(double ls, int ns, double ll, int nl);
/// Integer criterion ceil(L_lrg/R_lrg) < ceil(L_sml/R_sml).
bool migration_criterion(const BranchStats& sml, const BranchStats& lrg);

struct EquilibrateReport {
  int stars = 0;
  int migrations = 0;
  bool moved = false;
  std::vector<int> balanced_junctions;  // relays already moved this step
};

/// Branch equilibration on the current MST; edits relay positions in place.
EquilibrateReport equilibrate(const Scenario& s, NetworkState& st, const std::vector<TreeEdge>& mst,
                              const OptimizerConfig& cfg);

struct Junction {
  int node = 0;
  std::vector<double> angles_deg;  // consecutive gaps between branch directions, summing to 360
};

/// Relays of MST degree >= 3. Each branch direction points at the node `hops`
/// steps along the branch, or the branch end if it is closer.
std::vector<Junction> relay_junctions(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                                      int hops = 4);

/// CSV with header step,cost,feasible,n_active_relays.
std::string trace_csv(const OptimizerTrace& trace);

}  // namespace relaynet
