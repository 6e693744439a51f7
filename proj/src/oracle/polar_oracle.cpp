#include "polar_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace coverage::oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double first_hit(const MissionSpace& space, Point2 s, Point2 u) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : space.edges()) {
        const Point2 d = e.b - e.a;
        const double den = cross(u, d);
        if (den == 0.0) continue;
        const Point2 w = e.a - s;
        const double t = cross(w, d) / den;
        const double q = cross(w, u) / den;
        if (t > 0.0 && q >= 0.0 && q <= 1.0) best = std::min(best, t);
    }
    return best;
}

bool segment_intersection(Point2 a, Point2 b, Point2 c, Point2 d, Point2& out) {
    const Point2 r = b - a, q = d - c;
    const double den = cross(r, q);
    if (den == 0.0) return false;
    const double t = cross(c - a, q) / den, u = cross(c - a, r) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
    out = a + t * r;
    return true;
}

// Points where segment ab meets the circle (c, r).
void circle_hits(Point2 c, double r, Point2 a, Point2 b, std::vector<Point2>& out) {
    const Point2 e = b - a, f = a - c;
    const double A = dot(e, e), B = 2.0 * dot(f, e), C = dot(f, f) - r * r;
    if (A == 0.0) return;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return;
    for (double sgn : {-1.0, 1.0}) {
        const double w = (-B + sgn * std::sqrt(disc)) / (2.0 * A);
        if (w >= 0.0 && w <= 1.0) out.push_back(a + w * e);
    }
}

struct Shadow {
    Point2 a, b;
};

}  // namespace

double local_H_polar(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const OracleOptions& opts) {
    const Node& me = fleet.nodes.at(i);
    const Point2 s = me.position;
    const double delta = me.params.delta;
    const auto nb = neighbor_set(fleet, i);

    // Every potential shadow line of every neighbor, clipped to its disk.
    std::vector<Shadow> shadows;
    for (std::size_t k : nb) {
        const Node& n = fleet.nodes[k];
        for (const auto& v : space.all_vertices()) {
            const double D = distance(v, n.position);
            if (D <= 0.0 || D >= n.params.delta) continue;
            const Point2 u = (v - n.position) * (1.0 / D);
            shadows.push_back({v, v + (n.params.delta - D) * u});
        }
    }

    std::vector<Point2> events;
    for (const auto& v : space.all_vertices()) events.push_back(v);
    for (const auto& e : space.edges()) circle_hits(s, delta, e.a, e.b, events);
    for (const auto& sh : shadows) {
        events.push_back(sh.a);
        events.push_back(sh.b);
        circle_hits(s, delta, sh.a, sh.b, events);
    }
    // Where the radial cut structure changes: rays tangent to a neighbor
    // circle, neighbor circles meeting edges or shadows, shadows meeting
    // edges or each other.
    Point2 hit;
    for (std::size_t k : nb) {
        const Node& n = fleet.nodes[k];
        const double d = distance(s, n.position), r = n.params.delta;
        if (d > r) {
            const double base = std::atan2(n.position.y - s.y, n.position.x - s.x);
            const double off = std::asin(r / d);
            for (double a : {base - off, base + off}) events.push_back(s + Point2{std::cos(a), std::sin(a)});
        }
        for (const auto& e : space.edges()) circle_hits(n.position, r, e.a, e.b, events);
        for (const auto& sh : shadows) circle_hits(n.position, r, sh.a, sh.b, events);
    }
    for (std::size_t a = 0; a < shadows.size(); ++a) {
        for (const auto& e : space.edges())
            if (segment_intersection(shadows[a].a, shadows[a].b, e.a, e.b, hit)) events.push_back(hit);
        for (std::size_t b = a + 1; b < shadows.size(); ++b)
            if (segment_intersection(shadows[a].a, shadows[a].b, shadows[b].a, shadows[b].b, hit))
                events.push_back(hit);
    }
    for (std::size_t k : nb) {
        const Node& n = fleet.nodes[k];
        const double d = distance(s, n.position);
        const double r1 = delta, r2 = n.params.delta;
        if (d > 0.0 && d < r1 + r2 && d > std::abs(r1 - r2)) {
            const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
            const double h = std::sqrt(std::max(0.0, r1 * r1 - a * a));
            const Point2 u = (n.position - s) * (1.0 / d);
            events.push_back(s + a * u + h * Point2{-u.y, u.x});
            events.push_back(s + a * u - h * Point2{-u.y, u.x});
        }
    }
    std::vector<double> angles;
    for (const auto& p : events) {
        if (distance(p, s) < 1e-12) continue;
        double a = std::atan2(p.y - s.y, p.x - s.x);
        if (a < 0.0) a += kTwoPi;
        angles.push_back(a);
    }
    angles.push_back(0.0);
    angles.push_back(kTwoPi);
    std::sort(angles.begin(), angles.end());

    const auto& ga = gauss_legendre(opts.angular_points);
    const auto& gr = gauss_legendre(opts.radial_points);
    const double max_width = kTwoPi / opts.panels;
    const double max_piece = delta / opts.radial_splits;

    double total = 0.0;
    std::vector<double> cuts;
    for (std::size_t q = 0; q + 1 < angles.size(); ++q) {
        const double a0 = angles[q], a1 = angles[q + 1];
        if (a1 - a0 <= 1e-14) continue;
        const int m = std::max(1, static_cast<int>(std::ceil((a1 - a0) / max_width)));
        const double w = (a1 - a0) / m;
        for (int j = 0; j < m; ++j) {
            for (std::size_t g = 0; g < ga.x.size(); ++g) {
                const double th = a0 + (j + 0.5) * w + 0.5 * w * ga.x[g];
                const Point2 u{std::cos(th), std::sin(th)};
                const double rho = std::min(first_hit(space, s, u), delta);
                cuts.assign({0.0, rho});
                for (std::size_t k : nb) {
                    const Node& n = fleet.nodes[k];
                    const Point2 f = s - n.position;
                    const double b = dot(u, f), c = dot(f, f) - n.params.delta * n.params.delta;
                    if (b * b - c > 0.0) {
                        for (double sg : {-1.0, 1.0}) {
                            const double r = -b + sg * std::sqrt(b * b - c);
                            if (r > 0.0 && r < rho) cuts.push_back(r);
                        }
                    }
                }
                for (const auto& sh : shadows) {
                    const Point2 e = sh.b - sh.a;
                    const double den = cross(u, e);
                    if (den == 0.0) continue;
                    const Point2 ps = sh.a - s;
                    const double r = cross(ps, e) / den;
                    const double t = cross(ps, u) / den;
                    if (t >= 0.0 && t <= 1.0 && r > 0.0 && r < rho) cuts.push_back(r);
                }
                std::sort(cuts.begin(), cuts.end());
                double ray = 0.0;
                for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                    const double r0 = cuts[c], r1 = cuts[c + 1];
                    if (r1 - r0 <= 0.0) continue;
                    const Point2 mid = s + (0.5 * (r0 + r1)) * u;
                    std::vector<const Node*> members;
                    for (std::size_t k : nb) {
                        const Node& n = fleet.nodes[k];
                        if (distance(mid, n.position) <= n.params.delta && segment_clear(space, n.position, mid))
                            members.push_back(&n);
                    }
                    const int ms = std::max(1, static_cast<int>(std::ceil((r1 - r0) / max_piece)));
                    const double len = (r1 - r0) / ms;
                    for (int z = 0; z < ms; ++z) {
                        for (std::size_t h = 0; h < gr.x.size(); ++h) {
                            const double r = r0 + (z + 0.5) * len + 0.5 * len * gr.x[h];
                            const Point2 x = s + r * u;
                            double phi = 1.0;
                            for (const Node* n : members)
                                phi *= 1.0 - n->params.p0 * std::exp(-n->params.lambda * distance(x, n->position));
                            const double pi = me.params.p0 * std::exp(-me.params.lambda * r);
                            ray += 0.5 * len * gr.w[h] * density(x) * phi * pi * r;
                        }
                    }
                }
                total += 0.5 * w * ga.w[g] * ray;
            }
        }
    }
    return total;
}

Point2 fd_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                   double step, const OracleOptions& opts) {
    auto at = [&](Point2 offset) {
        Fleet f = fleet;
        f.nodes[i].position += offset;
        return local_H_polar(space, f, density, i, opts);
    };
    const double gx = (at({step, 0.0}) - at({-step, 0.0})) / (2.0 * step);
    const double gy = (at({0.0, step}) - at({0.0, -step})) / (2.0 * step);
    return {gx, gy};
}

GradCheck check_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                         double step, double tol, const GradientOptions& gopts, const OracleOptions& oopts) {
    GradCheck c;
    c.analytic = local_gradient(space, fleet, density, i, gopts).value();
    c.fd = fd_gradient(space, fleet, density, i, step, oopts);
    const double fd_norm = norm(c.fd);
    c.error = norm(c.analytic - c.fd) / std::max(fd_norm, 1e-6);
    c.pass = fd_norm < 1e-6 ? norm(c.analytic - c.fd) <= 1e-6 : c.error < tol;
    return c;
}

bool well_separated(const MissionSpace& space, Point2 s, double clearance) {
    if (!contains(space, s)) return false;
    for (const auto& v : space.all_vertices())
        if (distance(v, s) < clearance) return false;
    for (const auto& e : space.edges())
        if (distance_to_segment(s, e.a, e.b) < clearance) return false;
    // Stay off the extensions of edges through reflex vertices.
    for (const auto& rv : space.reflex_vertices()) {
        for (Point2 other : {rv.prev, rv.next}) {
            const Point2 d = rv.p - other;
            const double len = norm(d);
            if (len == 0.0) continue;
            const double off = std::abs(cross(d, s - rv.p)) / len;
            if (off < clearance) return false;
        }
    }
    return true;
}

Fleet random_placement(const MissionSpace& space, const Fleet& base, std::mt19937_64& rng, double clearance) {
    const BoundingBox b = space.bbox();
    std::uniform_real_distribution<double> ux(b.lo.x, b.hi.x), uy(b.lo.y, b.hi.y);
    Fleet f = base;
    for (auto& n : f.nodes) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > 100000) throw std::runtime_error("could not place a node away from degeneracies");
            const Point2 p{ux(rng), uy(rng)};
            if (well_separated(space, p, clearance)) {
                n.position = p;
                break;
            }
        }
    }
    return f;
}

}  // namespace coverage::oracle
