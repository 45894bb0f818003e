#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "relaynet/geometry.hpp"
#include "relaynet/network.hpp"
#include "relaynet/visgraph.hpp"

namespace relaynet {

/// Drawn network: nodes plus links carrying their geometry (from u to v).
struct NetworkGeometry {
  struct Link {
    int u = 0;
    int v = 0;
    PathElement geometry;
  };
  std::vector<Point2> nodes;
  std::vector<Link> links;
  std::vector<int> terminals;  // node ids

  /// Tree given as edge ids of a graph; node ids are the graph's.
  static NetworkGeometry from_graph(const GeoGraph& g, const std::vector<int>& edge_ids);
  /// Straight-line network over the global node ids of a relay network.
  static NetworkGeometry from_network(const Scenario& s, const NetworkState& st,
                                      const std::vector<TreeEdge>& tree);
};

/// Node sequence whose interior nodes have degree 2 and are not terminals.
using Branch = std::vector<int>;

/// Edge-disjoint decomposition of a tree into branches. Ends are nodes with
/// degree other than 2, or any node listed in `terminals`.
/// Throws not_a_tree when the edges contain a cycle.
std::vector<Branch> branches(const std::vector<TreeEdge>& edges, const std::vector<int>& terminals = {});

/// One PolyPath per branch, oriented along the branch node order.
std::vector<PolyPath> branch_paths(const NetworkGeometry& net);

/// Four rays (N, E, S, W) per obstacle, ending at twice the scene diameter.
struct CardinalRays {
  std::vector<std::array<Segment, 4>> rays;

  static CardinalRays make(const std::vector<Disk>& obstacles, const std::vector<Point2>& terminals);
};

struct HVector {
  std::vector<std::uint8_t> h1;  // pairs (i<j) in lexicographic order
  std::vector<std::uint8_t> h2;  // N,E,S,W per obstacle

  /// "h1;NESW_1;...;NESW_phi".
  std::string to_string() const;
  std::size_t dimension() const { return h1.size() + h2.size(); }

  friend auto operator<=>(const HVector&, const HVector&) = default;
};

HVector classify(const std::vector<PolyPath>& branch_geometry, const std::vector<Disk>& obstacles,
                 const CardinalRays& rays);
HVector classify(const NetworkGeometry& net, const std::vector<Disk>& obstacles, const CardinalRays& rays);

/// f^phi.
std::uint64_t max_homotopies(int f, int phi);
/// Usable faces of a tree over m terminals in convex position.
int face_count(int m);
std::uint64_t bell_number(int phi);

/// Groups obstacles lying in the same face of the network closed by the
/// terminals' convex hull. Blocks are sorted; ids are obstacle indices.
std::vector<std::vector<int>> partition_of(const NetworkGeometry& net, const std::vector<Disk>& obstacles);

/// Ray-casting parity test for a closed curve.
bool inside_closed(const PolyPath& closed, Point2 p);

}  // namespace relaynet
