#include "relaynet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "relaynet/error.hpp"

namespace relaynet {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double d_min(int n) {
  if (n < 3) throw Error(ErrorKind::no_solution, fmt::format("a chain around the obstacle needs at least 3 relays, got {}", n));
  return 1.0 / (1.0 - 2.0 * std::sin(kPi / (2.0 + 2.0 * n)));
}

// Semicircle / bent-line chain --------------------------------------------

namespace {

// Next relay at chord s from p, as far round the top as the clearance circle
// of radius c allows: straight toward the tangent point while the chord cannot
// reach the circle, then along it.
Point2 next_relay(Point2 p, double s, double c) {
  const double dist = norm(p);
  const double angle = std::atan2(p.y, p.x);
  if (dist <= c + 1e-12) return polar(c, angle - 2.0 * std::asin(std::min(1.0, s / (2.0 * c))));
  auto progress = [&](Point2 q) { return wrap_angle(angle - std::atan2(q.y, q.x)); };
  if (dist - s <= c) {
    const double a = (dist * dist + c * c - s * s) / (2.0 * dist);
    const double h = std::sqrt(std::max(0.0, c * c - a * a));
    const Point2 u = p / dist;
    const Point2 q1 = a * u + h * perp(u);
    const Point2 q2 = a * u - h * perp(u);
    return progress(q1) < progress(q2) ? q1 : q2;
  }
  const auto tps = tangent_points(p, Disk{{0.0, 0.0}, c});
  const Point2 t = progress(tps[0]) < progress(tps[1]) ? tps[0] : tps[1];
  return p + s * unit(t - p);
}

// Relays after n chords of length s from the left terminal, or nullopt when
// the chain already runs past the right terminal.
std::optional<std::vector<Point2>> lay_chords(double d, double c, int n, double s) {
  std::vector<Point2> pts;
  Point2 p{-d, 0.0};
  for (int k = 0; k < n; ++k) {
    p = next_relay(p, s, c);
    if (p.y < 0.0 || p.x >= d) return std::nullopt;
    pts.push_back(p);
  }
  return pts;
}

double equal_chord(double d, double c, int n) {
  const Point2 right{d, 0.0};
  double lo = 0.0;
  double hi = 2.0 * d;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double s = 0.5 * (lo + hi);
    const auto pts = lay_chords(d, c, n, s);
    const bool too_long = !pts || distance(pts->back(), right) < s;
    (too_long ? hi : lo) = s;
  }
  return 0.5 * (lo + hi);
}

ChainSolution finish_chain(double d, std::vector<Point2> relays, double r) {
  ChainSolution sol;
  sol.d = d;
  sol.relay_positions = std::move(relays);
  sol.common_radius = r;
  sol.radii.assign(sol.relay_positions.size() + 2, r);
  sol.cost = static_cast<double>(sol.radii.size()) * r * r;
  return sol;
}

}  // namespace

ChainSolution semicircle_chain(int n, double d) {
  const double dm = d_min(n);
  if (d < dm * (1.0 - 1e-12)) {
    throw Error(ErrorKind::out_of_closed_form,
                fmt::format("d = {} is below d_min({}) = {}; use the numeric chain optimizer", d, n, dm));
  }
  if (d <= dm * (1.0 + 1e-12)) {
    const double step = kPi / (n + 1);
    std::vector<Point2> relays;
    for (int k = 1; k <= n; ++k) relays.push_back(polar(d, kPi - k * step));
    return finish_chain(d, std::move(relays), 2.0 * d * std::sin(step / 2.0));
  }

  // The arc radius must equal 1 + s for relays on it to touch the obstacle.
  double s = d - 1.0;
  for (int it = 0; it < 200; ++it) {
    const double next = equal_chord(d, std::min(d, 1.0 + s), n);
    const bool done = std::abs(next - s) <= 1e-14 * d;
    s = next;
    if (done) break;
  }
  ChainSolution layout = finish_chain(d, *lay_chords(d, std::min(d, 1.0 + s), n, s), s);
  // Far from d_min the greedy walk is not optimal; polish numerically and keep
  // the cheaper chain.
  ChainSolution polished = optimize_chain(n, d);
  if (polished.feasible && polished.cost < layout.cost) {
    polished.common_radius = std::sqrt(polished.cost / static_cast<double>(polished.radii.size()));
    return polished;
  }
  return layout;
}

// Numeric chain optimizer -------------------------------------------------

namespace {

using Vec = Eigen::VectorXd;

// Unknowns: relay coordinates (2n) followed by all n+2 radii.
class ChainProblem {
 public:
  ChainProblem(int n, double d) : n_(n), d_(d) {}

  int size() const { return 3 * n_ + 2; }
  int constraint_count() const { return 2 * (n_ + 1) + 2 * (n_ + 2); }

  Point2 node(const Vec& x, int i) const {
    if (i == 0) return {-d_, 0.0};
    if (i == n_ + 1) return {d_, 0.0};
    return {x[2 * (i - 1)], x[2 * (i - 1) + 1]};
  }
  double& radius(Vec& x, int i) const { return x[2 * n_ + i]; }
  double radius(const Vec& x, int i) const { return x[2 * n_ + i]; }

  double objective(const Vec& x, Vec& grad) const {
    grad.setZero(size());
    double f = 0.0;
    for (int i = 0; i < n_ + 2; ++i) {
      f += radius(x, i) * radius(x, i);
      grad[2 * n_ + i] = 2.0 * radius(x, i);
    }
    return f;
  }

  // Calls visit(j, g_j, add_grad) where add_grad(scale, grad) accumulates
  // scale * dg_j/dx.
  void constraints(const Vec& x, const std::function<void(int, double, const std::function<void(double, Vec&)>&)>& visit) const {
    int j = 0;
    for (int i = 0; i <= n_; ++i) {
      const Point2 e = node(x, i + 1) - node(x, i);
      const double len2 = norm2(e);
      for (int who : {i, i + 1}) {
        const double r = radius(x, who);
        visit(j++, len2 - r * r, [&, i, who, e, r](double w, Vec& g) {
          add_point(g, i + 1, w * 2.0 * e);
          add_point(g, i, -w * 2.0 * e);
          g[2 * n_ + who] += w * -2.0 * r;
        });
      }
    }
    for (int i = 0; i < n_ + 2; ++i) {
      const Point2 p = node(x, i);
      const double r = radius(x, i);
      visit(j++, (1.0 + r) * (1.0 + r) - norm2(p), [&, i, p, r](double w, Vec& g) {
        g[2 * n_ + i] += w * 2.0 * (1.0 + r);
        add_point(g, i, -w * 2.0 * p);
      });
      visit(j++, -r, [&, i](double w, Vec& g) { g[2 * n_ + i] -= w; });
    }
  }

 private:
  void add_point(Vec& g, int i, Point2 v) const {
    if (i == 0 || i == n_ + 1) return;
    g[2 * (i - 1)] += v.x;
    g[2 * (i - 1) + 1] += v.y;
  }

  int n_;
  double d_;
};

// Powell-Hestenes-Rockafellar augmented Lagrangian value and gradient.
double lagrangian(const ChainProblem& p, const Vec& x, const Vec& lambda, double mu, Vec& grad) {
  double value = p.objective(x, grad);
  p.constraints(x, [&](int j, double g, const std::function<void(double, Vec&)>& add_grad) {
    const double t = lambda[j] + mu * g;
    if (t > 0.0) {
      value += (t * t - lambda[j] * lambda[j]) / (2.0 * mu);
      add_grad(t, grad);
    } else {
      value -= lambda[j] * lambda[j] / (2.0 * mu);
    }
  });
  return value;
}

void bfgs(const ChainProblem& p, Vec& x, const Vec& lambda, double mu, int max_iter, double tol) {
  const int dim = p.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
  Vec g(dim);
  double f = lagrangian(p, x, lambda, mu, g);
  Vec g_new(dim);
  for (int it = 0; it < max_iter && g.lpNorm<Eigen::Infinity>() > tol; ++it) {
    Vec dir = -h * g;
    if (dir.dot(g) >= 0.0) {
      h.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Vec x_new = x + dir;
    double f_new = lagrangian(p, x_new, lambda, mu, g_new);
    while (f_new > f + 1e-4 * step * dir.dot(g) && step > 1e-20) {
      step *= 0.5;
      x_new = x + step * dir;
      f_new = lagrangian(p, x_new, lambda, mu, g_new);
    }
    if (step <= 1e-20) break;
    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = x_new;
    g = g_new;
    const double drop = f - f_new;
    f = f_new;
    if (s.lpNorm<Eigen::Infinity>() < 1e-16 && drop <= 0.0) break;
  }
}

}  // namespace

ChainSolution optimize_chain(int n, double d, const ChainOptimizerOptions& options) {
  if (n < 1 || d <= 1.0) throw Error(ErrorKind::degenerate_input, "chain needs n >= 1 relays and d > 1");
  const ChainProblem problem(n, d);
  Vec x(problem.size());
  const double r0 = n >= 3 ? std::max(d, d_min(n)) : std::max(d, 3.0);
  for (int k = 1; k <= n; ++k) {
    const Point2 p = polar(r0, kPi - k * kPi / (n + 1));
    x[2 * (k - 1)] = p.x;
    x[2 * (k - 1) + 1] = p.y;
  }
  for (int i = 0; i < n + 2; ++i) {
    double r = 0.0;
    if (i > 0) r = std::max(r, distance(problem.node(x, i), problem.node(x, i - 1)));
    if (i < n + 1) r = std::max(r, distance(problem.node(x, i), problem.node(x, i + 1)));
    problem.radius(x, i) = r;
  }

  Vec lambda = Vec::Zero(problem.constraint_count());
  double mu = 10.0;
  double last_violation = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < options.max_outer; ++outer) {
    bfgs(problem, x, lambda, mu, options.max_inner, options.tolerance);
    double violation = 0.0;
    problem.constraints(x, [&](int j, double g, const std::function<void(double, Vec&)>&) {
      violation = std::max(violation, std::max(g, -lambda[j] / mu));
      lambda[j] = std::max(0.0, lambda[j] + mu * g);
    });
    if (violation < options.tolerance) break;
    if (violation > 0.25 * last_violation) mu = std::min(mu * 10.0, 1e10);
    last_violation = violation;
  }

  ChainSolution sol;
  sol.d = d;
  for (int k = 1; k <= n; ++k) sol.relay_positions.push_back(problem.node(x, k));
  for (int i = 0; i < n + 2; ++i) {
    sol.radii.push_back(problem.radius(x, i));
    sol.cost += sol.radii.back() * sol.radii.back();
  }
  sol.common_radius = *std::max_element(sol.radii.begin(), sol.radii.end());
  double worst = 0.0;
  problem.constraints(x, [&](int, double g, const std::function<void(double, Vec&)>&) { worst = std::max(worst, g); });
  sol.feasible = worst <= 1e-7;
  return sol;
}

TwoRelayCheck two_relay_regions(double d, double theta) {
  // Right relay; the left one is its mirror image.
  const Point2 relay = Point2{d, 0.0} + (d - 1.0) * Point2{-std::cos(theta), std::sin(theta)};
  const double reach = norm(relay) - 1.0;  // largest radius clear of the obstacle
  TwoRelayCheck out;
  out.relays_link = 2.0 * relay.x <= reach;
  out.terminals_link = d - 1.0 <= reach;
  return out;
}

// Three terminals, one relay ----------------------------------------------

const char* to_string(TriCandidate c) {
  switch (c) {
    case TriCandidate::midpoint_second_edge: return "midpoint_second_edge";
    case TriCandidate::quarter_bisector: return "quarter_bisector";
    case TriCandidate::circumcenter: return "circumcenter";
    case TriCandidate::no_relay: return "no_relay";
  }
  return "unknown";
}

double line_cost(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double ac = distance2(a, c);
  const double ad = distance2(a, d);
  const double bd = distance2(b, d);
  return ac + std::max(ad, ac) + bd + std::max(ad, bd);
}

double star_cost(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double ad = distance2(a, d);
  const double bd = distance2(b, d);
  const double cd = distance2(c, d);
  return ad + bd + cd + std::max({ad, bd, cd});
}

namespace {

struct Side {
  int i = 0;
  int j = 0;
  double length = 0.0;
};

TriRelaySolution star_solution(const std::array<Point2, 3>& p, Point2 d, TriCandidate kind) {
  TriRelaySolution s;
  s.relay_position = d;
  s.candidate_kind = kind;
  for (int i = 0; i < 3; ++i) s.radii[static_cast<std::size_t>(i)] = distance(p[static_cast<std::size_t>(i)], d);
  s.radii[3] = std::max({s.radii[0], s.radii[1], s.radii[2]});
  s.cost = star_cost(p[0], p[1], p[2], d);
  return s;
}

// Exact optimum over radii drawn from the pairwise distances.
TriRelaySolution no_relay_solution(const std::array<Point2, 3>& p) {
  TriRelaySolution best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int choice = 0; choice < 8; ++choice) {
    std::array<double, 3> r{};
    for (int i = 0; i < 3; ++i) {
      const int other = (choice >> i & 1) ? (i + 2) % 3 : (i + 1) % 3;
      r[static_cast<std::size_t>(i)] = distance(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(other)]);
    }
    auto reaches = [&](int u, int v) {
      return distance(p[static_cast<std::size_t>(u)], p[static_cast<std::size_t>(v)]) <= r[static_cast<std::size_t>(u)] + kGeomTol;
    };
    // Three nodes are strongly connected iff every node reaches and is reached
    // and some node reaches both others or the reach relation forms a cycle.
    bool connected = true;
    for (int u = 0; u < 3 && connected; ++u) {
      for (int v = 0; v < 3 && connected; ++v) {
        if (u == v) continue;
        const int w = 3 - u - v;
        connected = reaches(u, v) || (reaches(u, w) && reaches(w, v));
      }
    }
    const double c = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if (connected && c < best.cost) {
      best.cost = c;
      best.radii = {r[0], r[1], r[2], 0.0};
    }
  }
  best.candidate_kind = TriCandidate::no_relay;
  return best;
}

}  // namespace

std::vector<TriRelaySolution> three_terminal_candidates(Point2 a, Point2 b, Point2 c) {
  const std::array<Point2, 3> p{a, b, c};
  std::array<Side, 3> sides{Side{0, 1, distance(a, b)}, Side{1, 2, distance(b, c)}, Side{0, 2, distance(a, c)}};
  std::stable_sort(sides.begin(), sides.end(), [](const Side& x, const Side& y) { return x.length < y.length; });
  const double scale = sides[2].length;
  if (scale <= 0.0) throw Error(ErrorKind::degenerate_input, "coincident terminals");

  std::vector<TriRelaySolution> out;

  {
    // Shortest side (shared, far_c); relay on the middle side (shared, far_b).
    const Side& s0 = sides[0];
    const Side& s1 = sides[1];
    const int shared = (s0.i == s1.i || s0.i == s1.j) ? s0.i : s0.j;
    const int far_c = s0.i == shared ? s0.j : s0.i;
    const int far_b = s1.i == shared ? s1.j : s1.i;
    const auto P = [&](int i) { return p[static_cast<std::size_t>(i)]; };
    const Point2 d = 0.5 * (P(shared) + P(far_b));
    TriRelaySolution s;
    s.relay_position = d;
    s.candidate_kind = TriCandidate::midpoint_second_edge;
    s.radii[static_cast<std::size_t>(far_c)] = distance(P(shared), P(far_c));
    s.radii[static_cast<std::size_t>(shared)] = std::max(distance(P(shared), d), distance(P(shared), P(far_c)));
    s.radii[static_cast<std::size_t>(far_b)] = distance(P(far_b), d);
    s.radii[3] = std::max(distance(P(shared), d), distance(P(far_b), d));
    s.cost = line_cost(P(shared), P(far_b), P(far_c), d);
    out.push_back(s);
  }

  const Side& longest = sides[2];
  const Point2 pa = p[static_cast<std::size_t>(longest.i)];
  const Point2 pb = p[static_cast<std::size_t>(longest.j)];
  const Point2 apex = p[static_cast<std::size_t>(3 - longest.i - longest.j)];
  const Point2 u = (pb - pa) / scale;
  const double height = cross(u, apex - pa);  // signed, unnormalized
  const bool collinear = std::abs(height) <= 1e-12 * scale;

  // With the longest side mapped onto (0,0)-(1,0) this is (1/2, q/4).
  out.push_back(star_solution(p, 0.5 * (pa + pb) + (height / 4.0) * perp(u), TriCandidate::quarter_bisector));

  if (!collinear) {
    const Point2 ab = b - a;
    const Point2 ac = c - a;
    const double den = 2.0 * cross(ab, ac);
    const Point2 rel{(ac.y * norm2(ab) - ab.y * norm2(ac)) / den, (ab.x * norm2(ac) - ac.x * norm2(ab)) / den};
    out.push_back(star_solution(p, a + rel, TriCandidate::circumcenter));
  }

  out.push_back(no_relay_solution(p));
  std::stable_sort(out.begin(), out.end(),
                   [](const TriRelaySolution& x, const TriRelaySolution& y) { return x.cost < y.cost; });
  return out;
}

TriRelaySolution three_terminal_one_relay(Point2 a, Point2 b, Point2 c) {
  return three_terminal_candidates(a, b, c).front();
}

}  // namespace relaynet
