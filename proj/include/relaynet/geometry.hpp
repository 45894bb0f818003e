#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace relaynet {

/// Absolute tolerance used by every geometric predicate (scene units).
inline constexpr double kGeomTol = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend Point2 operator/(Point2 p, double s) { return {p.x / s, p.y / s}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double norm2(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double distance2(Point2 a, Point2 b) { return norm2(a - b); }
inline Point2 perp(Point2 p) { return {-p.y, p.x}; }
inline Point2 unit(Point2 p) { return p / norm(p); }
inline Point2 polar(double r, double angle) { return {r * std::cos(angle), r * std::sin(angle)}; }
inline bool near(Point2 a, Point2 b, double tol = kGeomTol) { return distance(a, b) <= tol; }
Point2 rotate_about(Point2 p, Point2 pivot, double angle);

/// Maps an angle into [0, 2pi).
double wrap_angle(double a);

struct Disk {
  Point2 center;
  double radius = 1.0;

  bool contains_strictly(Point2 p, double tol = kGeomTol) const {
    return distance(p, center) < radius - tol;
  }
  bool on_boundary(Point2 p, double tol = kGeomTol) const {
    return std::abs(distance(p, center) - radius) <= tol;
  }
  friend bool operator==(const Disk&, const Disk&) = default;
};

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
  Point2 at(double t) const { return a + t * (b - a); }
  Segment reversed() const { return {b, a}; }
};

enum class Orientation { ccw, cw };

/// Boundary arc of a disk. The swept angle lies in (0, 2pi]; a full turn is
/// never produced by the graph builder.
struct Arc {
  Disk disk;
  double start_angle = 0.0;
  double end_angle = 0.0;
  Orientation orientation = Orientation::ccw;

  double sweep() const;
  double length() const { return disk.radius * sweep(); }
  Point2 at(double t) const;
  Point2 start() const { return at(0.0); }
  Point2 end() const { return at(1.0); }
  Arc reversed() const;
  /// Parameter in [0,1] of the boundary point at `angle`, or a value outside
  /// [0,1] when the angle is not covered by the arc.
  double param_of_angle(double angle) const;
};

using PathElement = std::variant<Segment, Arc>;

double element_length(const PathElement& e);
Point2 element_start(const PathElement& e);
Point2 element_end(const PathElement& e);
PathElement reversed(const PathElement& e);
/// Point at parameter t in [0,1] along the element.
Point2 element_at(const PathElement& e, double t);

/// Chain of segments and arcs joined end to start.
struct PolyPath {
  std::vector<PathElement> elements;

  double length() const;
  bool empty() const { return elements.empty(); }
  Point2 start() const { return element_start(elements.front()); }
  Point2 end() const { return element_end(elements.back()); }
  /// Consecutive elements share endpoints within `tol`.
  bool is_continuous(double tol = 1e-9) const;
  PolyPath reversed() const;
  void append(const PolyPath& other);
  /// Uniformly spaced (by arc length) sample points, including both ends.
  std::vector<Point2> sample(int count) const;
  /// Point at arc-length `s` from the start (clamped).
  Point2 point_at_length(double s) const;
};

// Tangency ---------------------------------------------------------------

/// Tangency points on `d` seen from `p`: two points outside, {p} on the
/// boundary, nothing strictly inside.
std::vector<Point2> tangent_points(Point2 p, const Disk& d);

enum class DiskRelation { disjoint, overlapping, contained };
DiskRelation classify_disks(const Disk& d1, const Disk& d2);

/// Bitangent segments from d1 to d2 (a on d1, b on d2). External pair first.
std::vector<Segment> bitangents(const Disk& d1, const Disk& d2);

// Clearance --------------------------------------------------------------

double distance_to_segment(Point2 p, const Segment& s);
/// Minimum distance from `p` to any point of the arc.
double distance_to_arc(Point2 p, const Arc& a);

/// True iff the segment does not enter the interior of any obstacle whose
/// index is not listed in `skip`. Tangency is clear.
bool segment_clear(const Segment& s, std::span<const Disk> obstacles,
                   std::span<const int> skip = {});

/// True iff no point of the arc lies strictly inside an obstacle other than
/// the arc's own disk (and those listed in `skip`).
bool arc_clear(const Arc& a, std::span<const Disk> obstacles,
               std::span<const int> skip = {});

bool element_clear(const PathElement& e, std::span<const Disk> obstacles,
                   std::span<const int> skip = {});

// Crossings --------------------------------------------------------------

/// Transversal crossings of `s` by one element, counted on the half-open
/// element parameter range [0,1) (closed at 1 when `include_end`).
int element_crossings(const PathElement& e, const Segment& s, bool include_end);

/// Transversal crossings of `s` by the whole path. Throws
/// ErrorKind::degenerate_input when a path endpoint lies on `s`.
int crossing_parity(const PolyPath& path, const Segment& s);

/// Same count without the endpoint precondition.
int count_crossings(const PolyPath& path, const Segment& s);

// Gaps -------------------------------------------------------------------

/// ‖O−O′‖ − R_O − R_O′; negative when the disks overlap.
double pair_clearance(const Disk& d1, const Disk& d2);
/// ‖T−O‖ − R_O.
double terminal_clearance(Point2 t, const Disk& d);

}  // namespace relaynet
