#include <cmath>
#include <random>

#include "coverage/gradient.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "polar_oracle.hpp"

using namespace coverage;
using fixtures::fleet_at;
using fixtures::sensor;

namespace {
const DensityField kUnit = DensityField::uniform(1.0);

double rel_error(Point2 a, Point2 b) { return norm(a - b) / std::max(norm(b), 1e-6); }
}  // namespace

TEST_CASE("w1 and w2") {
    const auto space = fixtures::square(50);
    const Fleet f = fleet_at({{10, 10}}, {5.0, 1.0, 0.5});
    CHECK(weight_w1(space, f, kUnit, 0, {12, 10}) == doctest::Approx(0.183940).epsilon(1e-5));
    CHECK(weight_w2(space, f, kUnit, 0, {12, 10}) == doctest::Approx(std::exp(-1.0)));
    CHECK(weight_w1(space, f, DensityField::uniform(0.0), 0, {12, 10}) == 0.0);
    CHECK(weight_w2(space, fleet_at({{10, 10}}, {5.0, 0.0, 0.5}), kUnit, 0, {12, 10}) == 0.0);

    // A neighbor that detects with certainty zeroes the weights.
    Fleet g = fleet_at({{10, 10}, {11, 10}}, {5.0, 1.0, 0.5});
    g.nodes[1].params = {5.0, 1.0, 0.0};
    CHECK(weight_w1(space, g, kUnit, 0, {12, 10}) == 0.0);

    std::mt19937_64 rng(3);
    const auto obs = fixtures::two_obstacles();
    Fleet h;
    for (int k = 0; k < 4; ++k) h.nodes.push_back({fixtures::random_feasible(obs, rng), sensor(12.0, 0.9, 0.2)});
    for (int k = 0; k < 50; ++k) {
        const Point2 x = fixtures::random_feasible(obs, rng);
        CHECK(weight_w2(obs, h, kUnit, 0, x) * 0.2 == doctest::Approx(weight_w1(obs, h, kUnit, 0, x)));
    }
}

TEST_CASE("interior term") {
    const auto space = fixtures::square(50);
    const SensorParams p = sensor(10.0, 0.9, 0.1);
    const Point2 centered = interior_term(space, fleet_at({{25, 25}}, p), kUnit, 0);
    const Point2 off = interior_term(space, fleet_at({{5, 25}}, p), kUnit, 0);
    CHECK(norm(off) > 1.0);
    CHECK(norm(centered) < 1e-3 * norm(off));

    // Far-apart nodes do not interact.
    const Fleet pair = fleet_at({{5, 20}, {45, 40}}, p);
    const Point2 alone = interior_term(space, fleet_at({{5, 20}}, p), kUnit, 0);
    CHECK(interior_term(space, pair, kUnit, 0) == alone);

    // With the sensing disk inside the square both the gradient and its
    // finite difference vanish.
    const Fleet inside = fleet_at({{18, 31}}, p);
    const Point2 fd = oracle::fd_gradient(space, inside, kUnit, 0, 1e-4 * space.diameter());
    GradientOptions no_arc;
    no_arc.include_arc = false;
    const auto g = local_gradient(space, inside, kUnit, 0, no_arc);
    CHECK(norm(g.value()) < 1e-6 * norm(off));
    CHECK(norm(fd) < 1e-6 * norm(off));

    // With the disk clipped by a wall the interior term is nonzero and the
    // full gradient still matches.
    const Fleet clipped = fleet_at({{6, 31}}, p);
    const auto gc = local_gradient(space, clipped, kUnit, 0);
    const Point2 fdc = oracle::fd_gradient(space, clipped, kUnit, 0, 1e-4 * space.diameter());
    CHECK(rel_error(gc.value(), fdc) < 0.01);
}

TEST_CASE("boundary term") {
    const auto empty = fixtures::square(50);
    CHECK(boundary_term(empty, fleet_at({{10, 10}}), kUnit, 0, compute_anchors(empty, {10, 10}, 10.0)) == Point2{});
    const auto space = fixtures::square_with_block();
    // Every reflex vertex is farther than delta.
    const Fleet far = fleet_at({{5, 25}}, sensor(10.0));
    CHECK(compute_anchors(space, {5, 25}, 10.0).empty());
    CHECK(local_gradient(space, far, kUnit, 0).shadow == Point2{});
}

TEST_CASE("gradient near an obstacle corner matches finite differences") {
    const auto space = fixtures::square_with_block();
    for (Point2 s : {Point2{12.3, 24.1}, Point2{25.7, 13.2}, Point2{33.2, 25.9}}) {
        const Fleet f = fleet_at({s}, sensor(12.0, 0.9, 0.1));
        const auto g = local_gradient(space, f, kUnit, 0);
        CHECK(norm(g.shadow) > 0.0);
        const auto c = oracle::check_gradient(space, f, kUnit, 0, 1e-4 * space.diameter(), 0.02);
        CHECK_MESSAGE(c.pass, "error ", c.error, " at (", s.x, ", ", s.y, ")");
    }
}

TEST_CASE("gradient components add up") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(5);
    Fleet f;
    for (int k = 0; k < 5; ++k) f.nodes.push_back({fixtures::random_feasible(space, rng), sensor(10.0)});
    const auto fleet = oracle::random_placement(space, f, rng, 0.5);
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto g = local_gradient(space, fleet, kUnit, i);
        CHECK(g.ex == g.interior.x + g.boundary.x);
        CHECK(g.ey == g.interior.y + g.boundary.y);
        CHECK(g.boundary.x == g.shadow.x + g.arc.x);
        CHECK(g.boundary.y == g.shadow.y + g.arc.y);
    }
}

TEST_CASE("gradient scales linearly with density") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(13);
    Fleet base;
    for (int k = 0; k < 4; ++k) base.nodes.push_back({{0, 0}, sensor(10.0)});
    const auto f = oracle::random_placement(space, base, rng, 0.5);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto g1 = local_gradient(space, f, kUnit, i).value();
        const auto g2 = local_gradient(space, f, DensityField::uniform(2.0), i).value();
        const auto g3 = local_gradient(space, f, DensityField::uniform(3.0), i).value();
        CHECK(g2 == g1 * 2.0);
        CHECK(g3.x == doctest::Approx(3.0 * g1.x).epsilon(1e-12));
        CHECK(g3.y == doctest::Approx(3.0 * g1.y).epsilon(1e-12));
    }
}

TEST_CASE("random multi-node configurations match finite differences") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(21);
    Fleet base;
    for (int k = 0; k < 4; ++k) base.nodes.push_back({{0, 0}, sensor(10.0, 0.9, 0.05)});
    int failures = 0;
    for (int t = 0; t < 6; ++t) {
        const auto f = oracle::random_placement(space, base, rng, 0.5);
        const auto c = oracle::check_gradient(space, f, kUnit, rng() % f.size(), 1e-4 * space.diameter());
        if (!c.pass) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("boost identities") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(17);
    Fleet base;
    for (int k = 0; k < 5; ++k) base.nodes.push_back({{0, 0}, sensor(10.0, 0.9, 0.05)});
    const auto f = oracle::random_placement(space, base, rng, 0.5);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto plain = local_gradient(space, f, kUnit, i);
        CHECK(boosted_gradient(space, f, kUnit, i, BoostSpec::none(), 3) == plain);
        const auto p1 = boosted_gradient(space, f, kUnit, i, BoostSpec::p_boost(1.0, 0), 3);
        CHECK(p1.value() == plain.value());
        // Boosts act on w1 only.
        for (const auto& b : {BoostSpec::p_boost(100, 2), BoostSpec::phi_boost(1000, 2),
                              BoostSpec::neighbor_boost(300, 1, KjScheme::Closest), BoostSpec::random_perturb(1.0, 4)}) {
            const auto g = boosted_gradient(space, f, kUnit, i, b, 3);
            CHECK(g.boundary == plain.boundary);
        }
    }
    // Empty neighbor set: Phi is identically 1.
    const Fleet lone = fleet_at({{8, 40}, {45, 5}}, sensor(10.0, 0.9, 0.05));
    REQUIRE(neighbor_set(lone, 0).empty());
    for (int gamma : {1, 2, 4})
        CHECK(boosted_gradient(space, lone, kUnit, 0, BoostSpec::phi_boost(1.0, gamma), 0).value() ==
              local_gradient(space, lone, kUnit, 0).value());
}

TEST_CASE("boosted gradients") {
    const auto space = fixtures::square(50);
    const Fleet pair = fleet_at({{20, 25}, {24, 25}}, sensor(10.0, 0.9, 0.05));
    const auto plain = local_gradient(space, pair, kUnit, 0);
    const auto nb = boosted_gradient(space, pair, kUnit, 0, BoostSpec::neighbor_boost(300, 1, KjScheme::Closest));
    // Repulsion of 300 / 4 along -x.
    CHECK(nb.ex == doctest::Approx(plain.ex - 75.0));
    CHECK(nb.ey == doctest::Approx(plain.ey));

    const auto rp1 = boosted_gradient(space, pair, kUnit, 0, BoostSpec::random_perturb(2.0, 9), 4);
    const auto rp2 = boosted_gradient(space, pair, kUnit, 0, BoostSpec::random_perturb(2.0, 9), 4);
    const auto rp3 = boosted_gradient(space, pair, kUnit, 0, BoostSpec::random_perturb(2.0, 9), 5);
    CHECK(rp1 == rp2);
    CHECK_FALSE(rp1 == rp3);
    CHECK(std::abs(rp1.perturbation.x) <= 2.0);
    CHECK(std::abs(rp1.perturbation.y) <= 2.0);
    CHECK(rp1.ex == doctest::Approx(plain.ex + rp1.perturbation.x));

    const auto pb = boosted_gradient(space, pair, kUnit, 0, BoostSpec::p_boost(100, 2));
    CHECK(pb.amplification > 1.0);
}

TEST_CASE("weights stay nonnegative") {
    reset_weight_checks();
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(23);
    Fleet base;
    for (int k = 0; k < 6; ++k) base.nodes.push_back({{0, 0}, sensor(10.0, 0.9, 0.05)});
    const auto f = oracle::random_placement(space, base, rng, 0.5);
    for (const auto& b : {BoostSpec::none(), BoostSpec::p_boost(100, 4), BoostSpec::phi_boost(1000, 2)})
        all_gradients(space, f, kUnit, b, 0);
    CHECK(weight_evaluation_count() > 0);
    CHECK(negative_weight_count() == 0);
}

TEST_CASE("pathological positions") {
    const auto space = fixtures::square_with_block();
    const Fleet on_vertex = fleet_at({{20, 20}, {5, 5}}, sensor(10.0));
    CHECK_THROWS_AS(local_gradient(space, on_vertex, kUnit, 0), PathologicalPosition);
    const auto snap = GradientSnapshot::build(space, on_vertex, kUnit);
    CHECK(snap.pathological[0]);
    bool nudged = false;
    const auto g = snapshot_gradient(snap, 0, BoostSpec::none(), 0, {}, &nudged);
    CHECK(nudged);
    CHECK(std::isfinite(g.ex));
    CHECK(std::isfinite(g.ey));
}

TEST_CASE("snapshot gradients match direct evaluation") {
    const auto space = fixtures::two_obstacles();
    std::mt19937_64 rng(29);
    Fleet base;
    for (int k = 0; k < 5; ++k) base.nodes.push_back({{0, 0}, sensor(10.0)});
    const auto f = oracle::random_placement(space, base, rng, 0.5);
    const auto all = all_gradients(space, f, kUnit, BoostSpec::none(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(all[i] == local_gradient(space, f, kUnit, i));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
    for (int n : {2, 4, 8}) {
        const auto& rule = gauss_legendre(n);
        double s = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) s += rule.w[k] * std::pow(rule.x[k], 2 * n - 2);
        CHECK(s == doctest::Approx(2.0 / (2 * n - 1)));
    }
}
