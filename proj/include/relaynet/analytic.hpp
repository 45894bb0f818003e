#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "relaynet/geometry.hpp"

namespace relaynet {

/// Chain of n relays joining terminals at (-d,0) and (d,0) around a unit
/// obstacle at the origin.
struct ChainSolution {
  double d = 0.0;
  std::vector<Point2> relay_positions;
  /// Radii along the chain: left terminal, relays, right terminal.
  std::vector<double> radii;
  double common_radius = 0.0;
  double cost = 0.0;
  bool feasible = true;
};

/// Terminal separation at which the semicircle layout is optimal. n >= 3.
double d_min(int n);

/// Closed-form chain for d >= d_min(n); throws out_of_closed_form below.
ChainSolution semicircle_chain(int n, double d);

struct ChainOptimizerOptions {
  int max_outer = 60;
  int max_inner = 400;
  double tolerance = 1e-11;
};

/// Numeric optimum of the chain problem (positions and all radii free),
/// solved with an augmented Lagrangian and BFGS. Valid for any d > 1;
/// `feasible` is false when no chain of n relays spans d.
ChainSolution optimize_chain(int n, double d, const ChainOptimizerOptions& options = {});

/// Symmetric two-relay construction: relays at distance d-1 from their
/// terminals, at angle theta above the axis.
struct TwoRelayCheck {
  bool relays_link = false;     // relays reach each other without touching the obstacle
  bool terminals_link = false;  // each relay reaches its terminal
};
TwoRelayCheck two_relay_regions(double d, double theta);

enum class TriCandidate { midpoint_second_edge, quarter_bisector, circumcenter, no_relay };
const char* to_string(TriCandidate c);

struct TriRelaySolution {
  std::optional<Point2> relay_position;  // empty for no_relay
  TriCandidate candidate_kind = TriCandidate::no_relay;
  std::array<double, 4> radii{};  // A, B, C, relay
  double cost = 0.0;
};

/// Relay forwarding along the shortest side; D on the side sharing vertex
/// `a` with it. a: shared vertex, c: far end of the shortest side, b: far end
/// of the side carrying D.
double line_cost(Point2 a, Point2 b, Point2 c, Point2 d);
/// Relay transmitting to all three terminals.
double star_cost(Point2 a, Point2 b, Point2 c, Point2 d);

/// All candidates of the three-terminal/one-relay case, cheapest first.
std::vector<TriRelaySolution> three_terminal_candidates(Point2 a, Point2 b, Point2 c);
TriRelaySolution three_terminal_one_relay(Point2 a, Point2 b, Point2 c);

}  // namespace relaynet
