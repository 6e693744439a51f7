#pragma once
// Shared geometry and fleets for the test suites.

#include <random>
#include <vector>

#include "coverage/geom.hpp"
#include "coverage/sense.hpp"

namespace fixtures {

using coverage::MissionSpace;
using coverage::Point2;
using coverage::Polygon;

inline Polygon rect(double x0, double y0, double x1, double y1) {
    return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

inline MissionSpace square(double side) { return MissionSpace(rect(0, 0, side, side), {}); }

/// 50 x 50 square with one 10 x 10 block in the middle.
inline MissionSpace square_with_block() { return MissionSpace(rect(0, 0, 50, 50), {rect(20, 20, 30, 30)}); }

/// 50 x 50 square with two convex obstacles.
inline MissionSpace two_obstacles() {
    return MissionSpace(rect(0, 0, 50, 50), {Polygon({{10, 22}, {22, 18}, {26, 30}, {14, 34}}),
                                             Polygon({{30, 8}, {42, 10}, {40, 22}, {32, 20}})});
}

inline coverage::SensorParams sensor(double delta = 10.0, double p0 = 0.9, double lambda = 0.1) {
    return {delta, p0, lambda};
}

inline coverage::Fleet fleet_at(const std::vector<Point2>& positions, coverage::SensorParams p = sensor()) {
    coverage::Fleet f;
    for (const auto& q : positions) f.nodes.push_back({q, p});
    return f;
}

/// Uniform point of F by rejection sampling.
inline Point2 random_feasible(const MissionSpace& space, std::mt19937_64& rng) {
    const auto box = space.bbox();
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
    for (;;) {
        const Point2 p{ux(rng), uy(rng)};
        if (coverage::contains(space, p)) return p;
    }
}

}  // namespace fixtures
