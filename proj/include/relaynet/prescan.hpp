#pragma once

#include <set>
#include <string>
#include <vector>

#include "relaynet/homotopy.hpp"
#include "relaynet/network.hpp"
#include "relaynet/optimizer.hpp"
#include "relaynet/steiner.hpp"
#include "relaynet/visgraph.hpp"

namespace relaynet {

/// STPG tree on the augmented graph with some edges removed.
struct HomotopyCandidate {
  SteinerTree tree;
  HVector hvector;
  int generation = 0;
  std::set<int> removed_edges;  // edge ids of the base graph
  double length = 0.0;
  int parent = -1;  // index into the candidate list
};

struct HomGenOptions {
  int max_generations = 7;  // negative: no limit
  bool keep_redundant = false;
  /// Cap on expanded (tree, graph) pairs.
  int max_expansions = 20000;
  SteinerOptions steiner;
};

struct HomGenStats {
  int trees_examined = 0;
  int expansions = 0;
};

/// Classifies a graph tree against the scenario's obstacles.
HVector classify_tree(const GeoGraph& g, const SteinerTree& tree, const CardinalRays& rays);

/// Class enumeration by edge removal. `initial` must be non-empty; the returned list starts with it and
/// holds pairwise distinct hvectors.
std::vector<HomotopyCandidate> homgen(const std::vector<HomotopyCandidate>& initial, const GeoGraph& base_graph,
                                      const HomGenOptions& options, HomGenStats* stats = nullptr);

struct GapTraversal {
  enum class Kind { obstacle_obstacle, terminal_obstacle };
  Kind kind = Kind::obstacle_obstacle;
  int a = 0;  // obstacle index, or terminal index for terminal_obstacle
  int b = 0;  // obstacle index
  double gap = 0.0;

  friend bool operator==(const GapTraversal&, const GapTraversal&) = default;
};

/// Gaps whose connecting segment (centre to centre, or terminal to centre)
/// is crossed by some branch of the network.
std::vector<GapTraversal> gap_traversals(const NetworkGeometry& net, const Scenario& s);
std::vector<GapTraversal> gap_traversals(const GeoGraph& g, const SteinerTree& tree, const Scenario& s);

/// Percentage; 100 when no gap is traversed. R_avg = length / n.
double convergence_likelihood(const std::vector<GapTraversal>& gaps, double length, int n);
double convergence_likelihood(const GeoGraph& g, const SteinerTree& tree, const Scenario& s, int n);

/// n relays spread over the branches in proportion to length (largest
/// remainder), evenly spaced inside each branch.
NetworkState seed_relays(const NetworkGeometry& net, const Scenario& s, int n);
NetworkState seed_relays(const GeoGraph& g, const SteinerTree& tree, const Scenario& s, int n);

struct PrescanConfig {
  int relays = 30;
  double cl_threshold = 10.0;  // percent, strict
  HomGenOptions homgen;
  GraphOptions graph;
  OptimizerConfig optimizer;
  int threads = 1;
};

struct EvolvedResult {
  int candidate = -1;  // -1: obstacle-free solution accepted directly
  NetworkState state;
  std::vector<TreeEdge> mst;
  HVector hvector;
  double cost = 0.0;
  int steps = 0;
};

struct FailedRun {
  int candidate = 0;
  bool feasible = false;
  bool converged = false;
};

struct DiscardedCandidate {
  int candidate = 0;
  double cl = 0.0;
};

struct PrescanResult {
  std::vector<HomotopyCandidate> candidates;
  std::vector<double> cl;  // per candidate
  std::vector<EvolvedResult> evolved;  // ranked
  std::vector<DiscardedCandidate> discarded;
  std::vector<FailedRun> failed;
  HomGenStats homgen_stats;
  bool obstacle_free_solution = false;

  /// Distinct final hvectors.
  int final_classes() const;
};

/// Full pre-scan: enumerate, filter by CL, evolve. Throws no_solution when the terminals cannot be joined in the
/// augmented graph.
PrescanResult prescan(const Scenario& s, const PrescanConfig& cfg);

/// Header n,generations,s_pre,cl_pass,s_fin,min_cost.
std::string prescan_summary_csv(const std::vector<std::pair<const PrescanConfig*, const PrescanResult*>>& rows);
/// One row per candidate: id,generation,parent,hvector,length,cl,status,cost,final_hvector.
/// Evolved rows come first in ranking order, the rest follow by id.
std::string prescan_candidates_csv(const PrescanResult& r);

}  // namespace relaynet
