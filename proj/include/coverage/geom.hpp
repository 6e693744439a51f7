#pragma once
/**
 * @file geom.hpp
 * @brief Planar geometry for polygonal mission spaces with obstacles.
 *
 * The feasible region F is the outer polygon minus the open interiors of the
 * obstacle polygons; obstacle boundaries are feasible. Visibility is "the
 * segment stays in F", with grazing contact counted as visible.
 *
 * All types here are immutable values once constructed and safe to share
 * across threads.
 */

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coverage {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2 operator+(Point2 r) const { return {x + r.x, y + r.y}; }
    constexpr Point2 operator-(Point2 r) const { return {x - r.x, y - r.y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
    friend constexpr Point2 operator*(double s, Point2 p) { return {p.x * s, p.y * s}; }
    constexpr Point2& operator+=(Point2 r) { x += r.x; y += r.y; return *this; }
    constexpr Point2& operator-=(Point2 r) { x -= r.x; y -= r.y; return *this; }
    constexpr bool operator==(const Point2&) const = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Orientation of c relative to the directed line a->b (twice the signed area).
constexpr double orient(Point2 a, Point2 b, Point2 c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double distance_to_segment(Point2 p, Point2 a, Point2 b);

/// True when the open segments ab and cd cross at a single interior point.
bool segments_cross_properly(Point2 a, Point2 b, Point2 c, Point2 d);

struct BoundingBox {
    Point2 lo;
    Point2 hi;
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double diagonal() const { return std::hypot(width(), height()); }
};

class GeometryError : public std::runtime_error {
public:
    enum class Kind { TooFewVertices, NonFinite, ZeroArea, SelfIntersection, ObstacleOutside, ObstacleOverlap, InfeasiblePoint };

    GeometryError(Kind kind, std::string what, std::pair<std::size_t, std::size_t> items = {0, 0})
        : std::runtime_error(std::move(what)), kind_(kind), items_(items) {}

    Kind kind() const { return kind_; }
    /// Offending pair: edge indices for SelfIntersection, obstacle indices for ObstacleOverlap.
    std::pair<std::size_t, std::size_t> items() const { return items_; }

private:
    Kind kind_;
    std::pair<std::size_t, std::size_t> items_;
};

/// Raised when a sensor sits on a configuration where the objective is not
/// differentiable (on a reflex vertex, or collinear with an edge at an anchor).
class PathologicalPosition : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Simple polygon stored counter-clockwise.
 *
 * The checked constructor rejects fewer than three vertices, non-finite
 * coordinates, zero area and crossing edges, and reverses clockwise input.
 */
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Point2> vertices);

    /// Orientation-normalized polygon without the self-intersection check.
    static Polygon unchecked(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const Point2& operator[](std::size_t i) const { return vertices_[i]; }
    Point2 prev(std::size_t i) const { return vertices_[(i + size() - 1) % size()]; }
    Point2 next(std::size_t i) const { return vertices_[(i + 1) % size()]; }

    double signed_area() const;
    double area() const { return std::abs(signed_area()); }
    BoundingBox bbox() const;

    double boundary_distance(Point2 p) const;
    /// Inside or within `tol` of the boundary.
    bool contains(Point2 p, double tol = 0.0) const;
    /// Inside and farther than `tol` from the boundary.
    bool strictly_contains(Point2 p, double tol = 0.0) const;

    bool operator==(const Polygon&) const = default;

private:
    bool winding_inside(Point2 p) const;
    std::vector<Point2> vertices_;
};

/// Signed area of a vertex loop (positive for counter-clockwise).
double signed_area(const std::vector<Point2>& loop);

/// First pair of non-adjacent crossing or touching edges, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(const std::vector<Point2>& loop);

struct BoundaryEdge {
    Point2 a;
    Point2 b;
    int owner = -1;  ///< -1 for the outer boundary, otherwise the obstacle index
    std::size_t index = 0;
};

struct ReflexVertex {
    Point2 p;
    Point2 prev;
    Point2 next;
    int owner = -1;
    std::size_t index = 0;
};

/// Edge list in structure-of-arrays form, as consumed by the batch kernels.
struct EdgeArrays {
    std::vector<double> ax, ay, bx, by, ex, ey;
    std::size_t size() const { return ax.size(); }
};

class MissionSpace {
public:
    MissionSpace() = default;
    MissionSpace(Polygon outer, std::vector<Polygon> obstacles);

    const Polygon& outer() const { return outer_; }
    const std::vector<Polygon>& obstacles() const { return obstacles_; }
    const std::vector<BoundaryEdge>& edges() const { return edges_; }
    const EdgeArrays& edge_arrays() const { return edge_arrays_; }
    const std::vector<ReflexVertex>& reflex_vertices() const { return reflex_; }
    const std::vector<Point2>& all_vertices() const { return vertices_; }

    BoundingBox bbox() const { return outer_.bbox(); }
    double diameter() const { return diameter_; }
    /// Length scale for degeneracy back-offs: 1e-9 * diameter.
    double eps() const { return 1e-9 * diameter_; }
    /// Exact area of F.
    double feasible_area() const;

    bool operator==(const MissionSpace& o) const { return outer_ == o.outer_ && obstacles_ == o.obstacles_; }

private:
    Polygon outer_;
    std::vector<Polygon> obstacles_;
    std::vector<BoundaryEdge> edges_;
    EdgeArrays edge_arrays_;
    std::vector<ReflexVertex> reflex_;
    std::vector<Point2> vertices_;
    double diameter_ = 0.0;
};

/// p in F: inside the outer polygon and not strictly inside any obstacle.
bool contains(const MissionSpace& space, Point2 p);

/// Segment test without endpoint validation; used on hot paths.
bool segment_clear(const MissionSpace& space, Point2 a, Point2 b);

/// Throws GeometryError(InfeasiblePoint) when either endpoint lies outside F.
bool line_of_sight(const MissionSpace& space, Point2 a, Point2 b);

/// Distance along the unit direction `dir` from `origin` to the first boundary
/// edge hit with parameter > t_min; +inf when nothing is hit.
double cast_ray(const MissionSpace& space, Point2 origin, Point2 dir, double t_min = 0.0);

struct AnchorInfo {
    Point2 v;       ///< reflex vertex
    Point2 impact;  ///< where the shadow ray through v meets the boundary
    double D = 0.0; ///< |s - v|
    double d = 0.0; ///< |impact - v|
    double theta = 0.0;
    int sgn_nx = 0;
    int sgn_ny = 0;
    double z = 0.0; ///< min(d, delta - D)
};

struct VisibilityRegion {
    std::size_t owner = 0;
    Point2 origin;
    double delta = 0.0;
    Polygon polygon;
    std::vector<AnchorInfo> anchors;
};

inline constexpr int kDefaultAngularRes = 720;

/// Anchors of a sensor at s with radius delta: visible reflex vertices closer
/// than delta whose shadow ray has positive feasible extent.
std::vector<AnchorInfo> compute_anchors(const MissionSpace& space, Point2 s, double delta);

VisibilityRegion visibility_region(const MissionSpace& space, Point2 s, double delta,
                                   int angular_res = kDefaultAngularRes, std::size_t owner = 0);

struct ClipResult {
    Point2 point;
    bool blocked = false;
    std::optional<std::size_t> edge;  ///< blocking edge index into MissionSpace::edges()
};

ClipResult clip_move_detail(const MissionSpace& space, Point2 from, Point2 to);

/// Moves from `from` toward `to`, stopping short of the first boundary crossing.
Point2 clip_move(const MissionSpace& space, Point2 from, Point2 to);

}  // namespace coverage
