#include "coverage/geom.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "coverage/kernels.hpp"

namespace coverage {

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

bool segments_cross_properly(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double d1 = orient(c, d, a);
    const double d2 = orient(c, d, b);
    const double d3 = orient(a, b, c);
    const double d4 = orient(a, b, d);
    return ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
}

namespace {

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (segments_cross_properly(a, b, c, d)) return true;
    auto on_segment = [](Point2 p, Point2 q, Point2 r) {
        return orient(p, q, r) == 0.0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    return on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b);
}

}  // namespace

double signed_area(const std::vector<Point2>& loop) {
    double acc = 0.0;
    for (std::size_t i = 0, n = loop.size(); i < n; ++i) acc += cross(loop[i], loop[(i + 1) % n]);
    return 0.5 * acc;
}

std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(const std::vector<Point2>& loop) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Point2 a = loop[i], b = loop[(i + 1) % n], c = loop[j], d = loop[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex; folding back onto each other is invalid.
                const Point2 shared = (j == i + 1) ? b : a;
                const Point2 p = (j == i + 1) ? a : b;
                const Point2 q = (j == i + 1) ? d : c;
                if (orient(p, shared, q) == 0.0 && dot(p - shared, q - shared) > 0.0) return std::pair{i, j};
                continue;
            }
            if (segments_touch(a, b, c, d)) return std::pair{i, j};
        }
    }
    return std::nullopt;
}

Polygon::Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw GeometryError(GeometryError::Kind::TooFewVertices, "polygon needs at least 3 vertices");
    for (const auto& p : vertices_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw GeometryError(GeometryError::Kind::NonFinite, "polygon vertex is not finite");
    }
    if (auto hit = find_self_intersection(vertices_)) {
        std::ostringstream msg;
        msg << "polygon edges " << hit->first << " and " << hit->second << " intersect";
        throw GeometryError(GeometryError::Kind::SelfIntersection, msg.str(), *hit);
    }
    const double a = coverage::signed_area(vertices_);
    if (a == 0.0) throw GeometryError(GeometryError::Kind::ZeroArea, "polygon has zero area");
    if (a < 0.0) std::reverse(vertices_.begin(), vertices_.end());
}

Polygon Polygon::unchecked(std::vector<Point2> vertices) {
    Polygon p;
    p.vertices_ = std::move(vertices);
    if (coverage::signed_area(p.vertices_) < 0.0) std::reverse(p.vertices_.begin(), p.vertices_.end());
    return p;
}

double Polygon::signed_area() const { return coverage::signed_area(vertices_); }

BoundingBox Polygon::bbox() const {
    BoundingBox box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                    {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const auto& p : vertices_) {
        box.lo.x = std::min(box.lo.x, p.x);
        box.lo.y = std::min(box.lo.y, p.y);
        box.hi.x = std::max(box.hi.x, p.x);
        box.hi.y = std::max(box.hi.y, p.y);
    }
    return box;
}

double Polygon::boundary_distance(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) best = std::min(best, distance_to_segment(p, vertices_[i], next(i)));
    return best;
}

bool Polygon::winding_inside(Point2 p) const {
    int winding = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        const Point2 a = vertices_[i], b = next(i);
        if (a.y <= p.y) {
            if (b.y > p.y && orient(a, b, p) > 0.0) ++winding;
        } else if (b.y <= p.y && orient(a, b, p) < 0.0) {
            --winding;
        }
    }
    return winding != 0;
}

bool Polygon::contains(Point2 p, double tol) const {
    if (boundary_distance(p) <= tol) return true;
    return winding_inside(p);
}

bool Polygon::strictly_contains(Point2 p, double tol) const {
    if (boundary_distance(p) <= tol) return false;
    return winding_inside(p);
}

MissionSpace::MissionSpace(Polygon outer, std::vector<Polygon> obstacles)
    : outer_(std::move(outer)), obstacles_(std::move(obstacles)) {
    diameter_ = outer_.bbox().diagonal();
    const double tol = eps();

    for (std::size_t j = 0; j < obstacles_.size(); ++j) {
        const auto& ob = obstacles_[j];
        for (const auto& v : ob.vertices()) {
            if (!outer_.contains(v, tol))
                throw GeometryError(GeometryError::Kind::ObstacleOutside,
                                    "obstacle " + std::to_string(j) + " extends outside the mission space", {j, j});
        }
        for (std::size_t a = 0; a < ob.size(); ++a)
            for (std::size_t b = 0; b < outer_.size(); ++b)
                if (segments_cross_properly(ob[a], ob.next(a), outer_[b], outer_.next(b)))
                    throw GeometryError(GeometryError::Kind::ObstacleOutside,
                                        "obstacle " + std::to_string(j) + " crosses the mission boundary", {j, j});
    }
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
        for (std::size_t j = i + 1; j < obstacles_.size(); ++j) {
            const auto& A = obstacles_[i];
            const auto& B = obstacles_[j];
            bool overlap = false;
            for (std::size_t a = 0; a < A.size() && !overlap; ++a)
                for (std::size_t b = 0; b < B.size() && !overlap; ++b)
                    overlap = segments_cross_properly(A[a], A.next(a), B[b], B.next(b));
            for (const auto& v : A.vertices()) overlap = overlap || B.strictly_contains(v, tol);
            for (const auto& v : B.vertices()) overlap = overlap || A.strictly_contains(v, tol);
            if (overlap)
                throw GeometryError(GeometryError::Kind::ObstacleOverlap,
                                    "obstacles " + std::to_string(i) + " and " + std::to_string(j) + " overlap", {i, j});
        }
    }

    auto add_loop = [&](const Polygon& poly, int owner) {
        for (std::size_t k = 0; k < poly.size(); ++k) {
            edges_.push_back({poly[k], poly.next(k), owner, k});
            vertices_.push_back(poly[k]);
            // Outer polygon and obstacles are both stored CCW; a convex turn
            // (orient > 0) is an interior angle below pi.
            const double turn = orient(poly.prev(k), poly[k], poly.next(k));
            const bool reflex = owner < 0 ? turn < 0.0 : turn > 0.0;
            if (reflex) reflex_.push_back({poly[k], poly.prev(k), poly.next(k), owner, k});
        }
    };
    add_loop(outer_, -1);
    for (std::size_t j = 0; j < obstacles_.size(); ++j) add_loop(obstacles_[j], static_cast<int>(j));

    for (const auto& e : edges_) {
        edge_arrays_.ax.push_back(e.a.x);
        edge_arrays_.ay.push_back(e.a.y);
        edge_arrays_.bx.push_back(e.b.x);
        edge_arrays_.by.push_back(e.b.y);
        edge_arrays_.ex.push_back(e.b.x - e.a.x);
        edge_arrays_.ey.push_back(e.b.y - e.a.y);
    }
}

double MissionSpace::feasible_area() const {
    double a = outer_.area();
    for (const auto& ob : obstacles_) a -= ob.area();
    return a;
}

bool contains(const MissionSpace& space, Point2 p) {
    const double tol = space.eps();
    if (!space.outer().contains(p, tol)) return false;
    for (const auto& ob : space.obstacles())
        if (ob.strictly_contains(p, tol)) return false;
    return true;
}

bool segment_clear(const MissionSpace& space, Point2 a, Point2 b) {
    for (const auto& e : space.edges())
        if (segments_cross_properly(a, b, e.a, e.b)) return false;

    // No proper crossing: the segment can only enter an obstacle (or leave the
    // outer polygon) through a vertex. Split at every vertex it touches and
    // probe each piece at its midpoint.
    const Point2 ab = b - a;
    const double len = norm(ab);
    if (len == 0.0) return true;
    const double tol = space.eps();
    std::vector<double> cuts{0.0, 1.0};
    for (const auto& v : space.all_vertices()) {
        const double t = dot(v - a, ab) / (len * len);
        if (t <= 0.0 || t >= 1.0) continue;
        if (std::abs(orient(a, b, v)) / len <= tol) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] <= 0.0) continue;
        const Point2 mid = a + (0.5 * (cuts[k] + cuts[k + 1])) * ab;
        if (!contains(space, mid)) return false;
    }
    return true;
}

bool line_of_sight(const MissionSpace& space, Point2 a, Point2 b) {
    if (!contains(space, a) || !contains(space, b))
        throw GeometryError(GeometryError::Kind::InfeasiblePoint, "line_of_sight endpoint outside the feasible region");
    return segment_clear(space, a, b);
}

double cast_ray(const MissionSpace& space, Point2 origin, Point2 dir, double t_min) {
    double t = 0.0;
    kernels::scalar::ray_hits(origin.x, origin.y, &dir.x, &dir.y, 1, kernels::view(space.edge_arrays()), t_min, &t);
    return t;
}

namespace {

int sign_of(double v, double tol) {
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

bool visible_within(const MissionSpace& space, Point2 s, double delta, Point2 q) {
    return distance(s, q) <= delta && contains(space, q) && segment_clear(space, s, q);
}

}  // namespace

std::vector<AnchorInfo> compute_anchors(const MissionSpace& space, Point2 s, double delta) {
    const double eps = space.eps();
    const double probe = 1e-6 * space.diameter();
    std::vector<AnchorInfo> anchors;
    for (const auto& rv : space.reflex_vertices()) {
        const Point2 v = rv.p;
        const double D = distance(s, v);
        if (D <= eps) throw PathologicalPosition("sensor coincides with a reflex vertex");
        if (D >= delta) continue;
        if (!segment_clear(space, s, v)) continue;

        const Point2 u = (v - s) * (1.0 / D);
        const Point2 e1 = rv.prev - v;
        const Point2 e2 = rv.next - v;
        // Offset of each incident edge's far end from the line through s and v.
        const double c1 = cross(u, e1);
        const double c2 = cross(u, e2);
        if (std::abs(c1) <= eps || std::abs(c2) <= eps) {
            // The line of sight runs along an edge; only pathological when that
            // edge would bound the shadow, i.e. it lies beyond v.
            if ((std::abs(c1) <= eps && dot(e1, u) > 0.0) || (std::abs(c2) <= eps && dot(e2, u) > 0.0))
                throw PathologicalPosition("sensor is collinear with an edge at an anchor");
            continue;
        }
        if ((c1 > 0.0) != (c2 > 0.0)) continue;  // ray beyond v enters the obstacle
        if (!contains(space, v + probe * u)) continue;

        const double d = cast_ray(space, v, u, eps);
        if (!std::isfinite(d) || d <= eps) continue;

        AnchorInfo a;
        a.v = v;
        a.impact = v + d * u;
        a.D = D;
        a.d = d;
        const Point2 sv = s - v;
        a.theta = std::clamp(std::atan2(std::abs(sv.y), std::abs(sv.x)), 0.0, std::numbers::pi / 2);
        a.z = std::min(d, delta - D);

        // Inward normal of V(s) along the shadow segment, found by probing
        // both sides of the segment midpoint.
        const Point2 n{-u.y, u.x};
        const Point2 mid = v + (0.5 * a.z) * u;
        const bool plus = visible_within(space, s, delta, mid + probe * n);
        const bool minus = visible_within(space, s, delta, mid - probe * n);
        Point2 inward{0.0, 0.0};
        if (plus != minus) {
            inward = plus ? n : n * -1.0;
        } else {
            // Fall back to the local rule: the visible side is opposite the obstacle.
            inward = c1 > 0.0 ? n * -1.0 : n;
        }
        a.sgn_nx = sign_of(inward.x, 1e-12);
        a.sgn_ny = sign_of(inward.y, 1e-12);
        anchors.push_back(a);
    }
    return anchors;
}

VisibilityRegion visibility_region(const MissionSpace& space, Point2 s, double delta, int angular_res, std::size_t owner) {
    if (!contains(space, s))
        throw GeometryError(GeometryError::Kind::InfeasiblePoint, "visibility origin outside the feasible region");
    if (!(delta > 0.0)) throw std::invalid_argument("sensing radius must be positive");
    if (angular_res < 64) throw std::invalid_argument("angular resolution must be at least 64");

    VisibilityRegion region;
    region.owner = owner;
    region.origin = s;
    region.delta = delta;
    region.anchors = compute_anchors(space, s, delta);

    constexpr double kEventOffset = 1e-9;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> angles;
    angles.reserve(static_cast<std::size_t>(angular_res) + 3 * space.all_vertices().size());
    for (int k = 0; k < angular_res; ++k) angles.push_back(two_pi * k / angular_res);
    for (const auto& v : space.all_vertices()) {
        if (distance(v, s) <= space.eps()) continue;
        const double th = std::atan2(v.y - s.y, v.x - s.x);
        for (double off : {-kEventOffset, 0.0, kEventOffset}) {
            double a = std::fmod(th + off + two_pi, two_pi);
            angles.push_back(a);
        }
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end()), angles.end());

    std::vector<double> dx(angles.size()), dy(angles.size()), t(angles.size());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        dx[k] = std::cos(angles[k]);
        dy[k] = std::sin(angles[k]);
    }
    kernels::active().ray_hits(s.x, s.y, dx.data(), dy.data(), angles.size(), kernels::view(space.edge_arrays()), 0.0,
                               t.data());
    std::vector<Point2> boundary;
    boundary.reserve(angles.size());
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double r = std::min(t[k], delta);
        boundary.push_back(s + r * Point2{dx[k], dy[k]});
    }
    region.polygon = Polygon::unchecked(std::move(boundary));
    return region;
}

ClipResult clip_move_detail(const MissionSpace& space, Point2 from, Point2 to) {
    if (from == to) return {from, false, std::nullopt};
    if (contains(space, to) && segment_clear(space, from, to)) return {to, false, std::nullopt};

    const Point2 dir = to - from;
    const double len = norm(dir);
    const double eps = space.eps();
    const auto& edges = space.edges();

    struct Hit {
        double t;
        std::size_t edge;
    };
    std::vector<Hit> hits;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Point2 e = edges[k].b - edges[k].a;
        const double denom = cross(dir, e);
        if (denom == 0.0) continue;
        const Point2 w = edges[k].a - from;
        const double t = cross(w, e) / denom;
        const double s = cross(w, dir) / denom;
        if (t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0) hits.push_back({t, k});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });

    const double step_beyond = std::max(4.0 * eps, 1e-7 * len) / len;
    for (const auto& h : hits) {
        const Point2 beyond = from + std::min(1.0, h.t + step_beyond) * dir;
        if (contains(space, beyond) && segment_clear(space, from, beyond)) continue;
        const double keep = std::max(0.0, h.t * len - eps) / len;
        Point2 p = from + keep * dir;
        if (!contains(space, p) || !segment_clear(space, from, p)) p = from;
        return {p, true, h.edge};
    }
    // No crossing found but the straight move was rejected (numerically
    // degenerate contact); stay put.
    return {from, true, std::nullopt};
}

Point2 clip_move(const MissionSpace& space, Point2 from, Point2 to) { return clip_move_detail(space, from, to).point; }

}  // namespace coverage
