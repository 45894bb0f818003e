#pragma once

#include <set>
#include <vector>

#include "relaynet/visgraph.hpp"

namespace relaynet {

struct SteinerTree {
  std::vector<int> edges;  // sorted edge ids
  double total_length = 0.0;
  std::set<int> terminal_set;  // node ids
};

struct SteinerOptions {
  int max_terminals = 8;
  double max_states = 1e8;
};

/// Exact Steiner tree in a graph (subset dynamic programming). Edges listed
/// in `removed` are treated as absent.
/// Errors: no_tree when terminals are disconnected, budget_exceeded past the
/// terminal or state limits, degenerate_input for fewer than two terminals.
SteinerTree solve_stpg(const GeoGraph& g, const std::set<int>& terminals,
                       const std::set<int>& removed = {}, const SteinerOptions& options = {});

}  // namespace relaynet
