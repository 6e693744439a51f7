#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

using namespace coverage;
using fixtures::rect;

namespace {

// Crossing-number point-in-polygon, kept separate from the library's winding test.
bool inside_by_crossings(const std::vector<Point2>& poly, Point2 p) {
    bool in = false;
    for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
        const Point2 u = poly[a], v = poly[b];
        if ((u.y > p.y) != (v.y > p.y) && p.x < (v.x - u.x) * (p.y - u.y) / (v.y - u.y) + u.x) in = !in;
    }
    return in;
}

// Visibility by dense sampling: no sample strictly inside an obstacle.
bool sampled_visible(const MissionSpace& space, Point2 a, Point2 b, int samples = 4000) {
    for (int k = 1; k < samples; ++k) {
        const Point2 q = a + (b - a) * (static_cast<double>(k) / samples);
        if (!inside_by_crossings(space.outer().vertices(), q)) return false;
        for (const auto& ob : space.obstacles())
            if (inside_by_crossings(ob.vertices(), q) && ob.boundary_distance(q) > 1e-9) return false;
    }
    return true;
}

// Anchors by brute force: visible obstacle vertices within delta whose
// continuation ray past the vertex enters free space.
int oracle_anchor_count(const MissionSpace& space, Point2 s, double delta) {
    int count = 0;
    for (const auto& ob : space.obstacles())
        for (const auto& v : ob.vertices()) {
            if (distance(s, v) >= delta) continue;
            if (!sampled_visible(space, s, v)) continue;
            const Point2 u = (v - s) * (1.0 / distance(s, v));
            const Point2 beyond = v + u * 1e-3;
            if (!inside_by_crossings(ob.vertices(), beyond)) ++count;
        }
    return count;
}

double polygon_area(const Polygon& p) { return p.area(); }

}  // namespace

TEST_CASE("contains") {
    const MissionSpace unit(rect(0, 0, 1, 1), {});
    CHECK(contains(unit, {0.5, 0.5}));
    CHECK_FALSE(contains(unit, {1.5, 0.5}));
    const auto space = fixtures::square_with_block();
    CHECK(contains(space, {20, 25}));  // on an obstacle edge
    CHECK(contains(space, {20, 20}));  // obstacle corner
    CHECK_FALSE(contains(space, {25, 25}));
}

TEST_CASE("polygon validation") {
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), GeometryError);
    try {
        Polygon({{0, 0}, {2, 2}, {2, 0}, {0, 2}});
        FAIL("bow-tie accepted");
    } catch (const GeometryError& e) {
        CHECK(e.kind() == GeometryError::Kind::SelfIntersection);
    }
    try {
        Polygon({{0, 0}, {1e-200, 0}, {0, 1e-200}});
        FAIL("degenerate polygon accepted");
    } catch (const GeometryError& e) {
        CHECK(e.kind() == GeometryError::Kind::ZeroArea);
    }
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {NAN, 1}}), GeometryError);
    // Clockwise input is normalized.
    const Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(cw.signed_area() == doctest::Approx(1.0));
}

TEST_CASE("mission space validation") {
    try {
        MissionSpace(rect(0, 0, 10, 10), {rect(8, 8, 12, 12)});
        FAIL("obstacle outside accepted");
    } catch (const GeometryError& e) {
        CHECK(e.kind() == GeometryError::Kind::ObstacleOutside);
    }
    try {
        MissionSpace(rect(0, 0, 10, 10), {rect(1, 1, 4, 4), rect(3, 3, 6, 6)});
        FAIL("overlapping obstacles accepted");
    } catch (const GeometryError& e) {
        CHECK(e.kind() == GeometryError::Kind::ObstacleOverlap);
    }
    const auto space = fixtures::square_with_block();
    CHECK(space.feasible_area() == doctest::Approx(2400.0));
    CHECK(space.reflex_vertices().size() == 4);
}

TEST_CASE("reflex vertices of a nonconvex outer boundary") {
    // L-shaped room: only the inner corner is reflex.
    const MissionSpace L(Polygon({{0, 0}, {10, 0}, {10, 4}, {4, 4}, {4, 10}, {0, 10}}), {});
    REQUIRE(L.reflex_vertices().size() == 1);
    CHECK(L.reflex_vertices()[0].p == Point2{4, 4});
}

TEST_CASE("line of sight") {
    const auto empty = fixtures::square(50);
    CHECK(line_of_sight(empty, {1, 1}, {49, 49}));
    CHECK(line_of_sight(empty, {7, 3}, {7, 3}));
    const auto space = fixtures::square_with_block();
    CHECK_FALSE(line_of_sight(space, {10, 25}, {40, 25}));
    CHECK(line_of_sight(space, {10, 20}, {40, 20}));  // grazing along the bottom edge
    CHECK(line_of_sight(space, {10, 10}, {40, 40}) == sampled_visible(space, {10, 10}, {40, 40}));
    CHECK_THROWS_AS(line_of_sight(space, {25, 25}, {1, 1}), GeometryError);

    std::mt19937_64 rng(7);
    for (int k = 0; k < 200; ++k) {
        const Point2 a = fixtures::random_feasible(space, rng), b = fixtures::random_feasible(space, rng);
        CHECK(line_of_sight(space, a, b) == sampled_visible(space, a, b));
    }
}

TEST_CASE("cast_ray") {
    const auto space = fixtures::square_with_block();
    CHECK(cast_ray(space, {10, 25}, {1, 0}) == doctest::Approx(10.0));
    CHECK(cast_ray(space, {10, 25}, {-1, 0}) == doctest::Approx(10.0));
}

TEST_CASE("visibility region: disk and full square") {
    const auto big = fixtures::square(50);
    const auto disk = visibility_region(big, {25, 25}, 5.0, 512);
    CHECK(std::abs(polygon_area(disk.polygon) - M_PI * 25.0) < 0.01 * M_PI * 25.0);
    CHECK(disk.anchors.empty());
    const auto all = visibility_region(big, {10, 30}, 200.0);
    CHECK(polygon_area(all.polygon) == doctest::Approx(2500.0).epsilon(1e-6));
}

TEST_CASE("visibility region invariants") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Point2 s = fixtures::random_feasible(space, rng);
        const double delta = 12.0;
        const auto vr = visibility_region(space, s, delta);
        for (const auto& v : vr.polygon.vertices()) {
            CHECK(distance(v, s) <= delta * (1 + 1e-9));
            CHECK(contains(space, v));
        }
        // Star-shaped about s.
        const auto box = vr.polygon.bbox();
        std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
        int checked = 0;
        while (checked < 100) {
            const Point2 q{ux(rng), uy(rng)};
            if (!vr.polygon.strictly_contains(q, 1e-6)) continue;
            ++checked;
            CHECK(line_of_sight(space, s, q));
        }
        for (const auto& a : vr.anchors) {
            CHECK(a.D < delta);
            CHECK(line_of_sight(space, s, a.v));
            CHECK(a.z >= 0.0);
            CHECK(a.theta >= 0.0);
            CHECK(a.theta <= M_PI / 2);
        }
        // Area grows with delta.
        const double a1 = visibility_region(space, s, 6.0).polygon.area();
        const double a2 = visibility_region(space, s, 12.0).polygon.area();
        CHECK(a1 <= a2 * 1.01);
    }
}

TEST_CASE("anchors against the ray-casting oracle") {
    const auto space = fixtures::square_with_block();
    // Facing the left side of the block: its two near corners.
    const Point2 s{12, 25};
    const auto anchors = compute_anchors(space, s, 15.0);
    CHECK(anchors.size() == 2);
    CHECK(static_cast<int>(anchors.size()) == oracle_anchor_count(space, s, 15.0));
    for (const auto& a : anchors) CHECK(a.v.x == 20.0);

    // Diagonal view of a corner: the two adjacent corners cast shadows.
    CHECK(compute_anchors(space, {12, 12}, 20.0).size() == 2);
    // Out of range.
    CHECK(compute_anchors(space, {2, 25}, 10.0).empty());

    std::mt19937_64 rng(3);
    for (int k = 0; k < 40; ++k) {
        const Point2 q = fixtures::random_feasible(space, rng);
        if (space.obstacles()[0].boundary_distance(q) < 0.5) continue;
        CHECK(static_cast<int>(compute_anchors(space, q, 15.0).size()) == oracle_anchor_count(space, q, 15.0));
    }

    const auto empty = fixtures::square(50);
    for (int k = 0; k < 20; ++k) CHECK(compute_anchors(empty, fixtures::random_feasible(empty, rng), 30.0).empty());
}

TEST_CASE("anchor impact points lie on the boundary") {
    const auto space = fixtures::square_with_block();
    for (const auto& a : compute_anchors(space, {12, 25}, 15.0)) {
        double best = 1e9;
        for (const auto& e : space.edges()) best = std::min(best, distance_to_segment(a.impact, e.a, e.b));
        CHECK(best < 1e-7);
        CHECK(a.z == doctest::Approx(std::min(a.d, 15.0 - a.D)));
    }
}

TEST_CASE("reflex vertex position is pathological") {
    const auto space = fixtures::square_with_block();
    CHECK_THROWS_AS(compute_anchors(space, {20, 20}, 10.0), PathologicalPosition);
}

TEST_CASE("clip_move") {
    const auto space = fixtures::square_with_block();
    CHECK(clip_move(space, {5, 5}, {8, 9}) == Point2{8, 9});
    CHECK(clip_move(space, {5, 5}, {5, 5}) == Point2{5, 5});
    const auto r = clip_move_detail(space, {15, 25}, {25, 25});
    CHECK(r.blocked);
    CHECK(r.point.x < 20.0);
    CHECK(r.point.x > 20.0 - 1e-6);
    CHECK(contains(space, r.point));
    CHECK(contains(space, clip_move(space, {45, 45}, {55, 60})));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30, 30);
    for (int k = 0; k < 300; ++k) {
        const Point2 a = fixtures::random_feasible(space, rng);
        CHECK(contains(space, clip_move(space, a, a + Point2{u(rng), u(rng)})));
    }
}
