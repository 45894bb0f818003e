#include <doctest.h>

#include <random>
#include <set>

#include "relaynet/error.hpp"
#include "relaynet/homotopy.hpp"
#include "relaynet/io.hpp"

using namespace relaynet;

namespace {

// Straight-line network from a polyline per branch; consecutive points
// become nodes, shared points are matched exactly.
NetworkGeometry polyline_network(const std::vector<std::vector<Point2>>& lines, const std::vector<Point2>& terminals) {
  NetworkFile f;
  auto id_of = [&](Point2 p) {
    for (std::size_t i = 0; i < f.nodes.size(); ++i)
      if (f.nodes[i] == p) return static_cast<int>(i);
    f.nodes.push_back(p);
    return static_cast<int>(f.nodes.size() - 1);
  };
  for (Point2 t : terminals) f.terminals.push_back(id_of(t));
  for (const auto& line : lines)
    for (std::size_t i = 1; i < line.size(); ++i) f.links.push_back({id_of(line[i - 1]), id_of(line[i])});
  return to_geometry(f);
}

HVector classify_lines(const std::vector<std::vector<Point2>>& lines, const std::vector<Point2>& terminals,
                       const std::vector<Disk>& obstacles) {
  return classify(polyline_network(lines, terminals), obstacles, CardinalRays::make(obstacles, terminals));
}

bool has_forbidden_pattern(const HVector& h) {
  for (std::size_t k = 0; k + 3 < h.h2.size(); k += 4) {
    const std::string s{char('0' + h.h2[k]), char('0' + h.h2[k + 1]), char('0' + h.h2[k + 2]),
                        char('0' + h.h2[k + 3])};
    if (s == "0101" || s == "1010") return true;
  }
  return false;
}

}  // namespace

TEST_CASE("class counting") {
  CHECK(max_homotopies(2, 2) == 4);
  CHECK(max_homotopies(5, 4) == 625);
  CHECK(max_homotopies(3, 0) == 1);
  CHECK(face_count(5) == 5);
  CHECK(face_count(3) == 3);
  CHECK(face_count(2) == 2);
  const std::vector<std::uint64_t> bell{1, 1, 2, 5, 15, 52, 203, 877};
  for (int i = 0; i < static_cast<int>(bell.size()); ++i) CHECK(bell_number(i) == bell[static_cast<std::size_t>(i)]);
}

TEST_CASE("branch decomposition") {
  CHECK(branches({{0, 1}, {1, 2}, {2, 3}}).size() == 1);
  const auto star = branches({{0, 3}, {1, 3}, {2, 3}});
  CHECK(star.size() == 3);
  for (const Branch& b : star) CHECK((b.front() == 3 || b.back() == 3));
  // a terminal of degree 2 splits its path
  CHECK(branches({{0, 1}, {1, 2}}, {0, 1, 2}).size() == 2);
  CHECK_THROWS_AS(branches({{0, 1}, {1, 2}, {0, 2}}), Error);
}

TEST_CASE("cardinal rays end outside the scene") {
  const std::vector<Disk> obs{{{0, 0}, 1}, {{5, 2}, 0.5}};
  const std::vector<Point2> terms{{-4, 0}, {8, 1}};
  const CardinalRays rays = CardinalRays::make(obs, terms);
  REQUIRE(rays.rays.size() == 2);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& r = rays.rays[i];
    CHECK(r[0].b.y > 4.0);  // N
    CHECK(r[1].b.x > 10.0);  // E
    CHECK(r[2].b.y < -4.0);  // S
    CHECK(r[3].b.x < -6.0);  // W
    for (const auto& seg : r) CHECK(near(seg.a, obs[i].center));
  }
}

TEST_CASE("straight path far from obstacles classifies to zeros") {
  const std::vector<Disk> obs{{{0, 5}, 1}, {{4, 6}, 1}};
  const HVector h = classify_lines({{{10, -5}, {12, -5.5}}}, {{10, -5}, {12, -5.5}}, obs);
  CHECK(h.dimension() == 2u * (2 + 7) / 2);
  for (auto b : h.h1) CHECK(b == 0);
  for (auto b : h.h2) CHECK(b == 0);
}

TEST_CASE("four detours around two obstacles give distinct classes") {
  const std::vector<Disk> obs{{{-2, 0}, 1}, {{2, 0}, 1}};
  const Point2 t1{-6, 0.3}, t2{6, -0.3};
  const Point2 ul{-2.5, 2}, ur{2.5, 2}, ll{-2.5, -2}, lr{2.5, -2};
  const std::vector<std::vector<Point2>> paths{{t1, ul, ur, t2}, {t1, ul, lr, t2}, {t1, ll, lr, t2}, {t1, ll, ur, t2}};
  std::set<std::string> seen;
  std::vector<int> h1;
  for (const auto& p : paths) {
    const HVector h = classify_lines({p}, {t1, t2}, obs);
    seen.insert(h.to_string());
    h1.push_back(h.h1.at(0));
    CHECK_FALSE(has_forbidden_pattern(h));
  }
  CHECK(seen.size() == 4);
  CHECK(h1 == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("a loop crossing a ray twice is not told apart from no crossing") {
  const std::vector<Disk> obs{{{0, 0}, 1}};
  const Point2 t1{-5, 3}, t2{5, 3};
  const HVector plain = classify_lines({{t1, t2}}, {t1, t2}, obs);
  // dips down past the N ray and comes back on the same side
  const HVector looped = classify_lines({{t1, {-1, 2}, {1, 2}, {1, 2.5}, {-0.5, 2.5}, {-0.5, 2.8}, t2}}, {t1, t2}, obs);
  CHECK(plain.to_string() == looped.to_string());
}

TEST_CASE("h1 alone misses a pair that h2 separates") {
  const std::vector<Disk> obs{{{-3, 0}, 0.5}, {{3, 0}, 0.5}};
  const Point2 t1{-6, 1}, t2{6, 1};
  const HVector above = classify_lines({{t1, t2}}, {t1, t2}, obs);
  const HVector below = classify_lines({{t1, {-6, -1}, {6, -1}, t2}}, {t1, t2}, obs);
  CHECK(above.h1 == below.h1);
  CHECK(above.h2 != below.h2);
  CHECK(above != below);
}

TEST_CASE("h2 alone misses a pair that h1 separates") {
  // Every ray is crossed by some branch in both trees, so h2 saturates; only
  // the tree with the middle branch crosses the centre-to-centre segment.
  const std::vector<Disk> obs{{{-3, 0}, 0.5}, {{3, 0}, 0.5}};
  const Point2 t1{-6, 1}, t2{-6, 0.5}, t3{0, -1};
  const std::vector<Point2> terms{t1, t2, t3};
  const HVector through = classify_lines(
      {{t1, {-6, 2}, {0, 2}}, {{0, 2}, {5, 2}, {5, -2}, {-6, -2}, t2}, {{0, 2}, t3}}, terms, obs);
  const HVector around = classify_lines(
      {{t1, {-6, 2}, {5, 2}, {5, -2}, {0, -2}}, {{0, -2}, {-6, -2}, t2}, {{0, -2}, t3}}, terms, obs);
  CHECK(through.h2 == around.h2);
  CHECK(through.h1 != around.h1);
  CHECK(through != around);
}

TEST_CASE("NESW never reads 0101 or 1010 on random relay trees") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10, 10), ur(0.5, 1.5);
  int checked = 0;
  while (checked < 150) {
    Scenario s;
    for (int i = 0; i < 4; ++i) s.terminals.push_back({u(rng), u(rng)});
    for (int i = 0; i < 3; ++i) s.obstacles.push_back({{u(rng), u(rng)}, ur(rng)});
    bool ok = true;
    for (Point2 t : s.terminals)
      for (const Disk& d : s.obstacles) ok = ok && distance(t, d.center) > d.radius + 0.1;
    if (!ok) continue;
    std::vector<Point2> relays;
    for (int i = 0; i < 12; ++i) relays.push_back({u(rng), u(rng)});
    NetworkState st = NetworkState::with_relays(s, relays);
    const auto mst = assign_mst_radii(s, st);
    const HVector h = classify(NetworkGeometry::from_network(s, st, mst), s.obstacles,
                               CardinalRays::make(s.obstacles, s.terminals));
    CHECK(h.dimension() == 3u * 10 / 2);
    CHECK_FALSE(has_forbidden_pattern(h));
    ++checked;
  }
}

TEST_CASE("obstacle partition by faces") {
  const std::vector<Disk> obs{{{-2, 0}, 1}, {{2, 0}, 1}};
  const Point2 t1{-6, 0.3}, t2{6, -0.3};
  const auto same_side = partition_of(polyline_network({{t1, {-2.5, 2}, {2.5, 2}, t2}}, {t1, t2}), obs);
  CHECK(same_side == std::vector<std::vector<int>>{{0, 1}});
  const auto split = partition_of(polyline_network({{t1, {-2.5, 2}, {2.5, -2}, t2}}, {t1, t2}), obs);
  CHECK(split == std::vector<std::vector<int>>{{0}, {1}});
}

TEST_CASE("inside_closed matches a point-in-polygon oracle") {
  PolyPath square;
  const std::vector<Point2> v{{0, 0}, {4, 0}, {4, 3}, {0, 3}};
  for (std::size_t i = 0; i < v.size(); ++i) square.elements.push_back(Segment{v[i], v[(i + 1) % v.size()]});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 5);
  for (int i = 0; i < 500; ++i) {
    const Point2 p{u(rng), u(rng)};
    if (std::abs(p.x) < 1e-6 || std::abs(p.y) < 1e-6 || std::abs(p.x - 4) < 1e-6 || std::abs(p.y - 3) < 1e-6) continue;
    CHECK(inside_closed(square, p) == (p.x > 0 && p.x < 4 && p.y > 0 && p.y < 3));
  }
}
