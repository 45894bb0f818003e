#include "relaynet/geometry.hpp"

#include <algorithm>

#include "relaynet/error.hpp"

namespace relaynet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_scenario: return "invalid-scenario";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::no_path: return "no-path";
    case ErrorKind::no_tree: return "no-tree";
    case ErrorKind::budget_exceeded: return "budget-exceeded";
    case ErrorKind::not_a_tree: return "not-a-tree";
    case ErrorKind::no_solution: return "no-solution";
    case ErrorKind::out_of_closed_form: return "out-of-closed-form";
    case ErrorKind::parse_error: return "parse-error";
  }
  return "unknown";
}

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

Point2 rotate_about(Point2 p, Point2 pivot, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Point2 v = p - pivot;
  return pivot + Point2{c * v.x - s * v.y, s * v.x + c * v.y};
}

// Arc --------------------------------------------------------------------

double Arc::sweep() const {
  const double raw = orientation == Orientation::ccw ? wrap_angle(end_angle - start_angle)
                                                     : wrap_angle(start_angle - end_angle);
  return raw <= 1e-15 ? kTwoPi : raw;
}

Point2 Arc::at(double t) const {
  const double sign = orientation == Orientation::ccw ? 1.0 : -1.0;
  return disk.center + polar(disk.radius, start_angle + sign * t * sweep());
}

Arc Arc::reversed() const {
  return Arc{disk, end_angle, start_angle,
             orientation == Orientation::ccw ? Orientation::cw : Orientation::ccw};
}

double Arc::param_of_angle(double angle) const {
  const double delta = orientation == Orientation::ccw ? wrap_angle(angle - start_angle)
                                                       : wrap_angle(start_angle - angle);
  return delta / sweep();
}

// Elements ---------------------------------------------------------------

double element_length(const PathElement& e) {
  return std::visit([](const auto& g) { return g.length(); }, e);
}

Point2 element_start(const PathElement& e) {
  if (const auto* s = std::get_if<Segment>(&e)) return s->a;
  return std::get<Arc>(e).start();
}

Point2 element_end(const PathElement& e) {
  if (const auto* s = std::get_if<Segment>(&e)) return s->b;
  return std::get<Arc>(e).end();
}

PathElement reversed(const PathElement& e) {
  return std::visit([](const auto& g) -> PathElement { return g.reversed(); }, e);
}

Point2 element_at(const PathElement& e, double t) {
  return std::visit([t](const auto& g) { return g.at(t); }, e);
}

double PolyPath::length() const {
  double total = 0.0;
  for (const auto& e : elements) total += element_length(e);
  return total;
}

bool PolyPath::is_continuous(double tol) const {
  for (std::size_t i = 1; i < elements.size(); ++i) {
    if (!near(element_end(elements[i - 1]), element_start(elements[i]), tol)) return false;
  }
  return true;
}

PolyPath PolyPath::reversed() const {
  PolyPath out;
  out.elements.reserve(elements.size());
  for (auto it = elements.rbegin(); it != elements.rend(); ++it) {
    out.elements.push_back(relaynet::reversed(*it));
  }
  return out;
}

void PolyPath::append(const PolyPath& other) {
  elements.insert(elements.end(), other.elements.begin(), other.elements.end());
}

Point2 PolyPath::point_at_length(double s) const {
  if (elements.empty()) return {};
  if (s <= 0.0) return start();
  for (const auto& e : elements) {
    const double len = element_length(e);
    if (s <= len) return element_at(e, len > 0.0 ? s / len : 0.0);
    s -= len;
  }
  return end();
}

std::vector<Point2> PolyPath::sample(int count) const {
  std::vector<Point2> out;
  if (elements.empty() || count < 2) return out;
  const double total = length();
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(point_at_length(total * i / (count - 1)));
  }
  return out;
}

// Tangency ---------------------------------------------------------------

std::vector<Point2> tangent_points(Point2 p, const Disk& d) {
  const Point2 v = p - d.center;
  const double dist = norm(v);
  if (dist < d.radius - kGeomTol) return {};
  if (std::abs(dist - d.radius) <= kGeomTol) return {p};
  const double alpha = std::acos(d.radius / dist);
  const double base = std::atan2(v.y, v.x);
  return {d.center + polar(d.radius, base + alpha), d.center + polar(d.radius, base - alpha)};
}

DiskRelation classify_disks(const Disk& d1, const Disk& d2) {
  const double d = distance(d1.center, d2.center);
  if (d <= std::abs(d1.radius - d2.radius) + kGeomTol) return DiskRelation::contained;
  if (d <= d1.radius + d2.radius + kGeomTol) return DiskRelation::overlapping;
  return DiskRelation::disjoint;
}

std::vector<Segment> bitangents(const Disk& d1, const Disk& d2) {
  const DiskRelation rel = classify_disks(d1, d2);
  if (rel == DiskRelation::contained) return {};

  const Point2 v = d2.center - d1.center;
  const double d = norm(v);
  const Point2 vhat = v / d;
  const Point2 w = perp(vhat);
  std::vector<Segment> out;

  // Tangent line n·x = k with unit normal n; n·vhat is fixed by the radii.
  auto emit = [&](double c, bool internal) {
    c = std::clamp(c, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (double sign : {1.0, -1.0}) {
      const Point2 n = c * vhat + (sign * s) * w;
      const Point2 a = d1.center - d1.radius * n;
      const Point2 b = internal ? d2.center + d2.radius * n : d2.center - d2.radius * n;
      out.push_back({a, b});
    }
  };

  emit((d2.radius - d1.radius) / d, false);
  if (rel == DiskRelation::disjoint) emit(-(d1.radius + d2.radius) / d, true);
  return out;
}

// Clearance --------------------------------------------------------------

double distance_to_segment(Point2 p, const Segment& s) {
  const Point2 ab = s.b - s.a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, ab) / len2, 0.0, 1.0);
  return distance(p, s.at(t));
}

double distance_to_arc(Point2 p, const Arc& a) {
  const Point2 v = p - a.disk.center;
  const double d = norm(v);
  if (d < 1e-15) return a.disk.radius;
  const double t = a.param_of_angle(std::atan2(v.y, v.x));
  if (t <= 1.0) return std::abs(d - a.disk.radius);
  return std::min(distance(p, a.start()), distance(p, a.end()));
}

namespace {

bool skipped(std::span<const int> skip, int i) {
  return std::find(skip.begin(), skip.end(), i) != skip.end();
}

}  // namespace

bool segment_clear(const Segment& s, std::span<const Disk> obstacles, std::span<const int> skip) {
  for (int i = 0; i < static_cast<int>(obstacles.size()); ++i) {
    if (skipped(skip, i)) continue;
    const Disk& o = obstacles[static_cast<std::size_t>(i)];
    if (distance_to_segment(o.center, s) < o.radius - kGeomTol) return false;
  }
  return true;
}

bool arc_clear(const Arc& a, std::span<const Disk> obstacles, std::span<const int> skip) {
  for (int i = 0; i < static_cast<int>(obstacles.size()); ++i) {
    if (skipped(skip, i)) continue;
    const Disk& o = obstacles[static_cast<std::size_t>(i)];
    if (near(o.center, a.disk.center) && std::abs(o.radius - a.disk.radius) <= kGeomTol) continue;
    if (distance_to_arc(o.center, a) < o.radius - kGeomTol) return false;
  }
  return true;
}

bool element_clear(const PathElement& e, std::span<const Disk> obstacles, std::span<const int> skip) {
  if (const auto* s = std::get_if<Segment>(&e)) return segment_clear(*s, obstacles, skip);
  return arc_clear(std::get<Arc>(e), obstacles, skip);
}

// Crossings --------------------------------------------------------------

namespace {

int segment_crossings(const Segment& e, const Segment& s, bool include_end) {
  const Point2 d = e.b - e.a;
  const Point2 f = s.b - s.a;
  const double denom = cross(d, f);
  if (std::abs(denom) <= 1e-14 * norm(d) * norm(f)) return 0;
  const Point2 ap = s.a - e.a;
  const double t = cross(ap, f) / denom;
  const double u = cross(ap, d) / denom;
  if (u < 0.0 || u > 1.0) return 0;
  if (t < 0.0 || t > 1.0 || (t == 1.0 && !include_end)) return 0;
  return 1;
}

int arc_crossings(const Arc& e, const Segment& s, bool include_end) {
  const Point2 f = s.b - s.a;
  const double flen = norm(f);
  if (flen == 0.0) return 0;
  const Point2 c = e.disk.center;
  const double r = e.disk.radius;
  const double h = std::abs(cross(f, c - s.a)) / flen;
  if (h >= r - 1e-12 * std::max(1.0, r)) return 0;  // miss or tangent touch
  const double a2 = dot(f, f);
  const double b = 2.0 * dot(f, s.a - c);
  const double cc = norm2(s.a - c) - r * r;
  const double disc = std::max(0.0, b * b - 4.0 * a2 * cc);
  const double sq = std::sqrt(disc);
  int count = 0;
  for (double u : {(-b - sq) / (2.0 * a2), (-b + sq) / (2.0 * a2)}) {
    if (u < 0.0 || u > 1.0) continue;
    const Point2 p = s.at(u);
    const double t = e.param_of_angle(std::atan2(p.y - c.y, p.x - c.x));
    if (t > 1.0 || (t == 1.0 && !include_end)) continue;
    ++count;
  }
  return count;
}

}  // namespace

int element_crossings(const PathElement& e, const Segment& s, bool include_end) {
  if (const auto* seg = std::get_if<Segment>(&e)) return segment_crossings(*seg, s, include_end);
  return arc_crossings(std::get<Arc>(e), s, include_end);
}

int count_crossings(const PolyPath& path, const Segment& s) {
  int total = 0;
  for (std::size_t i = 0; i < path.elements.size(); ++i) {
    total += element_crossings(path.elements[i], s, i + 1 == path.elements.size());
  }
  return total;
}

int crossing_parity(const PolyPath& path, const Segment& s) {
  if (path.empty()) return 0;
  if (distance_to_segment(path.start(), s) <= kGeomTol ||
      distance_to_segment(path.end(), s) <= kGeomTol) {
    throw Error(ErrorKind::degenerate_input, "path endpoint lies on the crossing segment");
  }
  return count_crossings(path, s);
}

// Gaps -------------------------------------------------------------------

double pair_clearance(const Disk& d1, const Disk& d2) {
  return distance(d1.center, d2.center) - d1.radius - d2.radius;
}

double terminal_clearance(Point2 t, const Disk& d) { return distance(t, d.center) - d.radius; }

}  // namespace relaynet
