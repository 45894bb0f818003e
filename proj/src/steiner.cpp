#include "relaynet/steiner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "relaynet/error.hpp"

namespace relaynet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// How dp[mask][v] was reached: a split of `mask` at v, or an edge from a
// neighbour holding the same mask, or the base case (v is the terminal).
struct Back {
  int split = 0;
  int edge = -1;
};

class DreyfusWagner {
 public:
  DreyfusWagner(const GeoGraph& g, std::vector<int> terms, const std::set<int>& removed)
      : g_(g), terms_(std::move(terms)), removed_(removed), n_(static_cast<std::size_t>(g.node_count())) {}

  std::vector<int> solve() {
    // The last terminal acts as root; subsets range over the others.
    const int k = static_cast<int>(terms_.size()) - 1;
    const std::size_t full = (std::size_t{1} << k);
    dp_.assign(full, std::vector<double>(n_, kInf));
    back_.assign(full, std::vector<Back>(n_));

    for (int i = 0; i < k; ++i) {
      const std::size_t mask = std::size_t{1} << i;
      dp_[mask][static_cast<std::size_t>(terms_[static_cast<std::size_t>(i)])] = 0.0;
      relax(mask);
    }
    for (std::size_t mask = 1; mask < full; ++mask) {
      if (std::popcount(mask) < 2) continue;
      auto& row = dp_[mask];
      for (std::size_t v = 0; v < n_; ++v) {
        // Proper sub-masks containing the lowest bit, so each split is seen once.
        const std::size_t low = mask & (~mask + 1);
        for (std::size_t sub = (mask - 1) & mask; sub > 0; sub = (sub - 1) & mask) {
          if (!(sub & low)) continue;
          const double c = dp_[sub][v] + dp_[mask ^ sub][v];
          if (c < row[v]) {
            row[v] = c;
            back_[mask][v] = {static_cast<int>(sub), -1};
          }
        }
      }
      relax(mask);
    }

    const int root = terms_.back();
    if (!std::isfinite(dp_[full - 1][static_cast<std::size_t>(root)])) {
      throw Error(ErrorKind::no_tree, "terminals are not connected");
    }
    std::set<int> edges;
    collect(full - 1, root, edges);
    return {edges.begin(), edges.end()};
  }

 private:
  // Dijkstra-style closure of dp[mask] over graph edges.
  void relax(std::size_t mask) {
    auto& row = dp_[mask];
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (std::size_t v = 0; v < n_; ++v) {
      if (std::isfinite(row[v])) queue.push({row[v], static_cast<int>(v)});
    }
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > row[static_cast<std::size_t>(u)]) continue;
      for (int eid : g_.incident(u)) {
        if (removed_.count(eid)) continue;
        const GeoEdge& e = g_.edge(eid);
        const auto v = static_cast<std::size_t>(e.other(u));
        const double nd = d + e.weight;
        if (nd < row[v]) {
          row[v] = nd;
          back_[mask][v] = {0, eid};
          queue.push({nd, static_cast<int>(v)});
        }
      }
    }
  }

  void collect(std::size_t mask, int v, std::set<int>& out) const {
    const auto vv = static_cast<std::size_t>(v);
    const Back b = back_[mask][vv];
    if (b.edge >= 0) {
      out.insert(b.edge);
      collect(mask, g_.edge(b.edge).other(v), out);
    } else if (b.split != 0) {
      const auto sub = static_cast<std::size_t>(b.split);
      collect(sub, v, out);
      collect(mask ^ sub, v, out);
    }
  }

  const GeoGraph& g_;
  std::vector<int> terms_;
  const std::set<int>& removed_;
  std::size_t n_;
  std::vector<std::vector<double>> dp_;
  std::vector<std::vector<Back>> back_;
};

int find(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

// Drops cycle edges (heaviest first to go) and non-terminal leaves.
std::vector<int> clean_tree(const GeoGraph& g, std::vector<int> edges, const std::set<int>& terminals) {
  std::sort(edges.begin(), edges.end(), [&](int a, int b) {
    const double wa = g.edge(a).weight;
    const double wb = g.edge(b).weight;
    return wa != wb ? wa < wb : a < b;
  });
  std::vector<int> parent(static_cast<std::size_t>(g.node_count()));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> kept;
  for (int eid : edges) {
    const GeoEdge& e = g.edge(eid);
    const int a = find(parent, e.u);
    const int b = find(parent, e.v);
    if (a == b) continue;
    parent[static_cast<std::size_t>(a)] = b;
    kept.push_back(eid);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> degree(static_cast<std::size_t>(g.node_count()), 0);
    for (int eid : kept) {
      ++degree[static_cast<std::size_t>(g.edge(eid).u)];
      ++degree[static_cast<std::size_t>(g.edge(eid).v)];
    }
    auto is_loose_leaf = [&](int node) {
      return degree[static_cast<std::size_t>(node)] == 1 && !terminals.count(node);
    };
    const auto before = kept.size();
    std::erase_if(kept, [&](int eid) { return is_loose_leaf(g.edge(eid).u) || is_loose_leaf(g.edge(eid).v); });
    changed = kept.size() != before;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

SteinerTree solve_stpg(const GeoGraph& g, const std::set<int>& terminals, const std::set<int>& removed,
                       const SteinerOptions& options) {
  if (terminals.size() < 2) throw Error(ErrorKind::degenerate_input, "need at least two terminals");
  for (int t : terminals) {
    if (t < 0 || t >= g.node_count()) throw Error(ErrorKind::degenerate_input, fmt::format("unknown node {}", t));
  }
  const int k = static_cast<int>(terminals.size());
  if (k > options.max_terminals) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("{} terminals exceed the exact limit of {}", k, options.max_terminals));
  }
  const double states = std::ldexp(1.0, k) * g.node_count();
  if (states > options.max_states) {
    throw Error(ErrorKind::budget_exceeded, fmt::format("{:.3g} states exceed the memory guard", states));
  }

  DreyfusWagner dw(g, {terminals.begin(), terminals.end()}, removed);
  SteinerTree tree;
  tree.edges = clean_tree(g, dw.solve(), terminals);
  tree.terminal_set = terminals;
  for (int eid : tree.edges) tree.total_length += g.edge(eid).weight;
  return tree;
}

}  // namespace relaynet
