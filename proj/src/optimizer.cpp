#include "relaynet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "relaynet/analytic.hpp"
#include "relaynet/error.hpp"
#include "relaynet/homotopy.hpp"

namespace relaynet {

void OptimizerConfig::validate() const {
  auto rate_ok = [](double r) { return r > 0.0 && r <= 1.0; };
  if (max_steps < 1) throw Error(ErrorKind::invalid_scenario, "max_steps must be positive");
  if (stability_window < 1) throw Error(ErrorKind::invalid_scenario, "stability_window must be at least 1");
  if (!rate_ok(leaf_steer_rate) || !rate_ok(neighbor_move_rate)) {
    throw Error(ErrorKind::invalid_scenario, "movement rates must lie in (0, 1]");
  }
  if (stuck_steps_before_radial < 0) throw Error(ErrorKind::invalid_scenario, "stuck_steps_before_radial must be >= 0");
}

namespace {

using Adjacency = std::vector<std::vector<int>>;

Adjacency adjacency(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst) {
  Adjacency adj(static_cast<std::size_t>(node_count(s, st)));
  for (const auto& e : mst) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

bool is_relay(const Scenario& s, int id) { return id >= s.terminal_count(); }

Point2& relay_ref(const Scenario& s, NetworkState& st, int id) {
  return st.relays[static_cast<std::size_t>(id - s.terminal_count())];
}

std::vector<int> terminal_ids(const Scenario& s) {
  std::vector<int> ids(static_cast<std::size_t>(s.terminal_count()));
  for (int i = 0; i < s.terminal_count(); ++i) ids[static_cast<std::size_t>(i)] = i;
  return ids;
}

// Cost of the state after reassigning radii from its own MST.
CostResult mst_cost(const Scenario& s, NetworkState st) {
  assign_mst_radii(s, st);
  return cost(s, st);
}

bool strictly_better(const CostResult& after, const CostResult& before) {
  if (after.feasible != before.feasible) return after.feasible;
  return after.area < before.area * (1.0 - 1e-12);
}

int overlap_count(Point2 p, double r, const std::vector<Disk>& obstacles) {
  int count = 0;
  for (const Disk& o : obstacles) {
    if (distance(p, o.center) < o.radius + r - kGeomTol) ++count;
  }
  return count;
}

std::vector<bool> clear_nodes(const Scenario& s, const NetworkState& st) {
  std::vector<bool> clear(static_cast<std::size_t>(node_count(s, st)));
  for (int v = 0; v < node_count(s, st); ++v) {
    clear[static_cast<std::size_t>(v)] =
        disk_feasible(node_position(s, st, v), node_radius(s, st, v), s.obstacles);
  }
  return clear;
}

// Moves are checked one relay at a time against a snapshot, but applied
// together. Undo those that still leave a previously clear node
// overlapping, along with the moves of the relays it links to.
std::vector<TreeEdge> revert_new_overlaps(const Scenario& s, NetworkState& st, const NetworkState& before,
                                          const std::vector<bool>& clear_before) {
  std::vector<TreeEdge> mst = assign_mst_radii(s, st);
  const int m = s.terminal_count();
  for (int round = 0; round < 16; ++round) {
    const Adjacency adj = adjacency(s, st, mst);
    bool reverted = false;
    auto revert = [&](int id) {
      if (!is_relay(s, id)) return;
      const auto i = static_cast<std::size_t>(id - m);
      if (st.relays[i] == before.relays[i]) return;
      st.relays[i] = before.relays[i];
      reverted = true;
    };
    bool overlap = false;
    for (int v = 0; v < node_count(s, st); ++v) {
      if (!clear_before[static_cast<std::size_t>(v)] || !node_active(s, st, v)) continue;
      if (disk_feasible(node_position(s, st, v), node_radius(s, st, v), s.obstacles)) continue;
      overlap = true;
      revert(v);
      for (int u : adj[static_cast<std::size_t>(v)]) revert(u);
    }
    if (!overlap) return mst;
    if (!reverted) break;
    mst = assign_mst_radii(s, st);
  }
  st.relays = before.relays;
  return assign_mst_radii(s, st);
}

}  // namespace

// Movement rules -----------------------------------------------------------

std::vector<Move> steer_leaf_relays(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                                    const OptimizerConfig& cfg) {
  const Adjacency adj = adjacency(s, st, mst);
  std::vector<Move> moves;
  for (const Branch& b : branches(mst, terminal_ids(s))) {
    const int first = b.front();
    const int last = b.back();
    const bool first_leaf = is_relay(s, first) && adj[static_cast<std::size_t>(first)].size() == 1;
    const bool last_leaf = is_relay(s, last) && adj[static_cast<std::size_t>(last)].size() == 1;
    if (first_leaf == last_leaf) continue;  // not a leaf branch, or an isolated relay pair
    const Point2 target = node_position(s, st, first_leaf ? last : first);
    for (int id : b) {
      if (id == (first_leaf ? last : first) || !is_relay(s, id)) continue;
      moves.push_back({id, cfg.leaf_steer_rate * (target - node_position(s, st, id))});
    }
  }
  std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.node < b.node; });
  return moves;
}

Point2 average_neighbor_move(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst, int node,
                             const OptimizerConfig& cfg) {
  Point2 sum;
  int count = 0;
  for (const auto& e : mst) {
    if (e.u != node && e.v != node) continue;
    sum = sum + node_position(s, st, e.u == node ? e.v : e.u);
    ++count;
  }
  if (count == 0) return {};
  return cfg.neighbor_move_rate * (sum / count - node_position(s, st, node));
}

// Obstacle avoidance -------------------------------------------------------

double link_radius(Point2 p, const std::vector<Point2>& neighbours) {
  double r = 0.0;
  for (Point2 q : neighbours) r = std::max(r, distance(p, q));
  return r;
}

Point2 no_overlap_adjust(Point2 proposed, Point2 position, const std::vector<Point2>& neighbours,
                         const std::vector<Disk>& obstacles, const OverlapHistory& history, int stuck_threshold) {
  auto overlaps_at = [&](Point2 p) { return overlap_count(p, link_radius(p, neighbours), obstacles); };
  const double radius = link_radius(position, neighbours);
  const int now = overlap_count(position, radius, obstacles);
  if (now == 0) {
    return overlaps_at(position + proposed) > 0 ? Point2{} : proposed;
  }
  Point2 radial;
  double depth = 0.0;
  for (const Disk& o : obstacles) {
    const double gap = distance(position, o.center) - o.radius - radius;
    if (gap >= -kGeomTol) continue;
    const Point2 away = position - o.center;
    radial = radial + (norm(away) > 0.0 ? unit(away) : Point2{1.0, 0.0});
    depth = std::max(depth, -gap);
  }
  if (norm(radial) == 0.0) radial = {1.0, 0.0};
  const Point2 escape = (depth + kGeomTol) * unit(radial);
  if (overlaps_at(position + escape) > now) {
    return history.steps_without_move >= stuck_threshold ? escape : Point2{};
  }
  return escape;
}

// Equilibration ------------------------------------------------------------

std::vector<BranchStats> branch_stats(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst) {
  std::vector<BranchStats> out;
  int id = 0;
  for (const Branch& b : branches(mst, terminal_ids(s))) {
    BranchStats bs;
    bs.id = id++;
    bs.nodes = b;
    for (std::size_t i = 1; i < b.size(); ++i) bs.length += distance(node_position(s, st, b[i - 1]), node_position(s, st, b[i]));
    bs.interior = static_cast<int>(b.size()) - 2;
    bs.avg_radius = bs.length / (bs.interior + 1);
    out.push_back(std::move(bs));
  }
  return out;
}

double migration_delta(double ls, int ns, double ll, int nl) {
  return ls * ls / ns + ll * ll / (nl + 2) - ls * ls / (ns + 1) - ll * ll / (nl + 1);
}

bool migration_criterion(const BranchStats& sml, const BranchStats& lrg) {
  return std::ceil(lrg.length / lrg.avg_radius - 1e-9) < std::ceil(sml.length / sml.avg_radius - 1e-9);
}

namespace {

// Terminals of degree 2: try a star through a relay neighbour, otherwise even
// out the two incident link lengths.
bool terminal_star_or_balance(const Scenario& s, NetworkState& st, const Adjacency& adj, int t,
                              const OptimizerConfig& cfg, EquilibrateReport& report) {
  const auto& nb = adj[static_cast<std::size_t>(t)];
  const Point2 tp = node_position(s, st, t);
  const CostResult before = mst_cost(s, st);

  std::optional<NetworkState> best;
  CostResult best_cost = before;
  for (int k = 0; k < 2; ++k) {
    const int x = nb[static_cast<std::size_t>(k)];
    const int y = nb[static_cast<std::size_t>(1 - k)];
    if (!is_relay(s, x) || adj[static_cast<std::size_t>(x)].size() != 2) continue;
    const auto& xn = adj[static_cast<std::size_t>(x)];
    const int x2 = xn[0] == t ? xn[1] : xn[0];
    const TriRelaySolution star = three_terminal_one_relay(tp, node_position(s, st, x2), node_position(s, st, y));
    if (!star.relay_position) continue;
    NetworkState trial = st;
    relay_ref(s, trial, x) = *star.relay_position;
    const CostResult c = mst_cost(s, trial);
    if (strictly_better(c, best_cost)) {
      best_cost = c;
      best = std::move(trial);
    }
  }
  if (best) {
    st = std::move(*best);
    ++report.stars;
    return true;
  }

  const double target = 0.5 * (distance(tp, node_position(s, st, nb[0])) + distance(tp, node_position(s, st, nb[1])));
  bool moved = false;
  for (int x : nb) {
    if (!is_relay(s, x)) continue;
    Point2& p = relay_ref(s, st, x);
    Point2 dir = p - tp;
    if (norm(dir) <= 1e-9) {
      // Stacked on the terminal: leave on the side away from the other link.
      dir = tp - node_position(s, st, x == nb[0] ? nb[1] : nb[0]);
      if (norm(dir) <= 1e-9) continue;
    }
    const Point2 goal = tp + target * unit(dir);
    p = p + cfg.neighbor_move_rate * (goal - p);
    moved = true;
  }
  return moved;
}

// Minimiser of sum |x - n_i|^2 / |j - n_i|, i.e. one Weiszfeld step toward
// the point with equal pull from every incident link.
bool junction_balance(const Scenario& s, NetworkState& st, const Adjacency& adj, int j, const OptimizerConfig& cfg) {
  if (!is_relay(s, j)) return false;
  const Point2 p = node_position(s, st, j);
  Point2 num;
  double den = 0.0;
  for (int v : adj[static_cast<std::size_t>(j)]) {
    const Point2 q = node_position(s, st, v);
    const double w = 1.0 / std::max(distance(p, q), 1e-12);
    num = num + w * q;
    den += w;
  }
  relay_ref(s, st, j) = p + cfg.neighbor_move_rate * (num / den - p);
  return true;
}

// Moves one relay from a dense branch to a sparse neighbouring branch.
bool migrate(const Scenario& s, NetworkState& st, const std::vector<TreeEdge>& mst) {
  const auto stats = branch_stats(s, st, mst);
  double best_delta = 0.0;
  int best_from = -1;
  Point2 best_target;
  for (std::size_t a = 0; a < stats.size(); ++a) {
    for (std::size_t b = a + 1; b < stats.size(); ++b) {
      for (int end_a : {stats[a].nodes.front(), stats[a].nodes.back()}) {
        for (int end_b : {stats[b].nodes.front(), stats[b].nodes.back()}) {
          if (end_a != end_b) continue;
          const bool a_dense = stats[a].avg_radius < stats[b].avg_radius;
          const BranchStats& sml = a_dense ? stats[a] : stats[b];
          const BranchStats& lrg = a_dense ? stats[b] : stats[a];
          if (sml.interior == 0 || !migration_criterion(sml, lrg)) continue;
          const double delta = migration_delta(sml.length, sml.interior, lrg.length, lrg.interior);
          if (delta >= best_delta) continue;
          const int common = end_a;
          const int from = sml.nodes.front() == common ? sml.nodes[1] : sml.nodes[sml.nodes.size() - 2];
          const int toward = lrg.nodes.front() == common ? lrg.nodes[1] : lrg.nodes[lrg.nodes.size() - 2];
          best_delta = delta;
          best_from = from;
          best_target = 0.5 * (node_position(s, st, common) + node_position(s, st, toward));
        }
      }
    }
  }
  if (best_from < 0) return false;
  relay_ref(s, st, best_from) = best_target;
  return true;
}

// A relay leaf that has collapsed onto its only neighbour carries no load;
// reinsert it at the midpoint of the longest tree link.
bool reinsert_collapsed_leaf(const Scenario& s, NetworkState& st, const std::vector<TreeEdge>& mst) {
  const Adjacency adj = adjacency(s, st, mst);
  int leaf = -1;
  for (int v = s.terminal_count(); v < node_count(s, st) && leaf < 0; ++v) {
    const auto& nb = adj[static_cast<std::size_t>(v)];
    if (node_active(s, st, v) && nb.size() == 1 &&
        distance(node_position(s, st, v), node_position(s, st, nb[0])) < 1e-6) {
      leaf = v;
    }
  }
  if (leaf < 0) return false;
  const TreeEdge* longest = nullptr;
  double best = 0.0;
  for (const auto& e : mst) {
    if (e.u == leaf || e.v == leaf) continue;
    const double len = distance(node_position(s, st, e.u), node_position(s, st, e.v));
    if (len > best) {
      best = len;
      longest = &e;
    }
  }
  if (!longest) return false;
  relay_ref(s, st, leaf) = 0.5 * (node_position(s, st, longest->u) + node_position(s, st, longest->v));
  return true;
}

}  // namespace

EquilibrateReport equilibrate(const Scenario& s, NetworkState& st, const std::vector<TreeEdge>& mst,
                              const OptimizerConfig& cfg) {
  EquilibrateReport report;
  const Adjacency adj = adjacency(s, st, mst);
  for (int node = 0; node < node_count(s, st); ++node) {
    if (!node_active(s, st, node)) continue;
    const auto degree = adj[static_cast<std::size_t>(node)].size();
    if (!is_relay(s, node) && degree == 2) {
      report.moved |= terminal_star_or_balance(s, st, adj, node, cfg, report);
    } else if (degree == 3 && junction_balance(s, st, adj, node, cfg)) {
      report.moved = true;
      report.balanced_junctions.push_back(node);
    }
  }
  std::vector<TreeEdge> fresh = mst;
  if (report.moved) {
    NetworkState tmp = st;
    fresh = assign_mst_radii(s, tmp);
  }
  if (migrate(s, st, fresh)) {
    ++report.migrations;
    report.moved = true;
  } else if (reinsert_collapsed_leaf(s, st, fresh)) {
    report.moved = true;
  }
  return report;
}

// Driver -------------------------------------------------------------------

OptimizeResult optimize(const Scenario& s, NetworkState initial, const OptimizerConfig& cfg) {
  s.validate();
  cfg.validate();
  OptimizeResult out;
  NetworkState& st = out.state;
  st = std::move(initial);
  st.active.resize(st.relays.size(), true);
  std::vector<OverlapHistory> history(st.relays.size());
  const int m = s.terminal_count();
  const int deactivate_after = 10 * std::max(cfg.stuck_steps_before_radial, 1);

  std::vector<TreeEdge> mst = assign_mst_radii(s, st);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const NetworkState before = st;
    // Once feasible, a step may not break feasibility.
    const bool guard = !s.obstacles.empty() && cost(s, st).feasible;
    const std::vector<bool> clear_before = guard ? clear_nodes(s, st) : std::vector<bool>{};
    std::vector<bool> steered(st.relays.size(), false);
    if (cfg.equilibration_enabled) {
      const EquilibrateReport rep = equilibrate(s, st, mst, cfg);
      out.trace.stars_created += rep.stars;
      out.trace.migrations += rep.migrations;
      if (rep.moved) mst = assign_mst_radii(s, st);
    }

    // Proposals are computed from one snapshot, then applied together.
    const Adjacency adj = adjacency(s, st, mst);
    std::vector<Point2> proposal(st.relays.size());
    for (const Move& mv : steer_leaf_relays(s, st, mst, cfg)) {
      proposal[static_cast<std::size_t>(mv.node - m)] = mv.delta;
      steered[static_cast<std::size_t>(mv.node - m)] = true;
    }
    for (std::size_t i = 0; i < st.relays.size(); ++i) {
      if (!st.active[i] || steered[i]) continue;
      const int id = m + static_cast<int>(i);
      Point2 mv = average_neighbor_move(s, st, mst, id, cfg);
      if (!s.obstacles.empty()) {
        std::vector<Point2> nb;
        for (int v : adj[static_cast<std::size_t>(id)]) nb.push_back(node_position(s, st, v));
        mv = no_overlap_adjust(mv, st.relays[i], nb, s.obstacles, history[i], cfg.stuck_steps_before_radial);
      }
      proposal[i] = mv;
    }
    for (std::size_t i = 0; i < st.relays.size(); ++i) {
      if (st.active[i]) st.relays[i] = st.relays[i] + proposal[i];
    }
    mst = guard ? revert_new_overlaps(s, st, before, clear_before) : assign_mst_radii(s, st);
    for (std::size_t i = 0; i < st.relays.size(); ++i) {
      auto& h = history[i];
      h.steps_without_move = st.relays[i] == before.relays[i] ? h.steps_without_move + 1 : 0;
    }
    bool deactivated = false;
    for (std::size_t i = 0; i < st.relays.size(); ++i) {
      if (!st.active[i]) continue;
      auto& h = history[i];
      // Trapped: no positive radius fits at the current position.
      const bool trapped = max_feasible_radius(st.relays[i], s.obstacles) <= kGeomTol;
      h.steps_trapped = trapped ? h.steps_trapped + 1 : 0;
      if (h.steps_trapped >= deactivate_after) {
        st.active[i] = false;
        ++out.trace.deactivated;
        deactivated = true;
      }
    }
    if (deactivated) mst = assign_mst_radii(s, st);

    const CostResult c = cost(s, st);
    out.trace.steps.push_back({step, c.area, c.feasible, st.active_relay_count()});
    if (cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0) out.trace.snapshots.push_back({step, mst});

    const auto& steps = out.trace.steps;
    const auto w = static_cast<std::size_t>(cfg.stability_window);
    // Infeasible states have infinite cost and are never stable.
    if (steps.size() > w && c.feasible && steps[steps.size() - 1 - w].feasible) {
      const double old = steps[steps.size() - 1 - w].cost;
      const bool stable = std::abs(c.area - old) <= cfg.stability_rel_tol * std::max(c.area, 1e-300);
      if (stable) {
        out.trace.converged = c.feasible && is_strongly_connected(st, s);
        break;
      }
    }
  }
  out.mst = mst;
  return out;
}

NetworkState random_initial_state(const Scenario& s, int n, std::uint64_t seed) {
  double lo_x = s.terminals.front().x, hi_x = lo_x, lo_y = s.terminals.front().y, hi_y = lo_y;
  for (Point2 t : s.terminals) {
    lo_x = std::min(lo_x, t.x);
    hi_x = std::max(hi_x, t.x);
    lo_y = std::min(lo_y, t.y);
    hi_y = std::max(hi_y, t.y);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo_x, hi_x);
  std::uniform_real_distribution<double> uy(lo_y, hi_y);
  std::vector<Point2> relays;
  for (int i = 0; i < n; ++i) {
    Point2 p{ux(rng), uy(rng)};
    for (int attempt = 0; attempt < 1000 && max_feasible_radius(p, s.obstacles) <= 0.0; ++attempt) p = {ux(rng), uy(rng)};
    relays.push_back(p);
  }
  return NetworkState::with_relays(s, std::move(relays));
}

std::vector<Junction> relay_junctions(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                                      int hops) {
  const Adjacency adj = adjacency(s, st, mst);
  std::vector<Junction> out;
  for (int v = s.terminal_count(); v < node_count(s, st); ++v) {
    const auto& nb = adj[static_cast<std::size_t>(v)];
    if (nb.size() < 3) continue;
    const Point2 pv = node_position(s, st, v);
    std::vector<double> dirs;
    for (int first : nb) {
      int prev = v, cur = first;
      for (int k = 1; k < hops; ++k) {
        const auto& next = adj[static_cast<std::size_t>(cur)];
        if (next.size() != 2 || !is_relay(s, cur)) break;
        const int nxt = next[0] == prev ? next[1] : next[0];
        prev = cur;
        cur = nxt;
      }
      const Point2 d = node_position(s, st, cur) - pv;
      dirs.push_back(std::atan2(d.y, d.x) * 180.0 / std::numbers::pi);
    }
    std::sort(dirs.begin(), dirs.end());
    Junction j{v, {}};
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      j.angles_deg.push_back((i + 1 < dirs.size() ? dirs[i + 1] : dirs[0] + 360.0) - dirs[i]);
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string trace_csv(const OptimizerTrace& trace) {
  std::string out = "step,cost,feasible,n_active_relays\n";
  for (const auto& t : trace.steps) {
    out += fmt::format("{},{:.9f},{},{}\n", t.step, t.cost, t.feasible ? 1 : 0, t.active_relays);
  }
  return out;
}

}  // namespace relaynet
