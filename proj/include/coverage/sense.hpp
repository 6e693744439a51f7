#pragma once
// Sensing model: exponential detection probability gated by visibility, the
// joint detection probability, neighbor sets and the neighbor miss product.

#include <cstddef>
#include <variant>
#include <vector>

#include "coverage/geom.hpp"

namespace coverage {

struct SensorParams {
    double delta = 1.0;   ///< sensing radius
    double p0 = 1.0;      ///< detection probability at zero distance
    double lambda = 0.0;  ///< exponential decay rate

    void validate() const;
    bool operator==(const SensorParams&) const = default;
};

struct Node {
    Point2 position;
    SensorParams params;
    bool operator==(const Node&) const = default;
};

struct Fleet {
    std::vector<Node> nodes;

    std::size_t size() const { return nodes.size(); }
    bool homogeneous() const;
    std::vector<Point2> positions() const;
    /// Copy of this fleet placed at `positions` (same order and parameters).
    Fleet with_positions(const std::vector<Point2>& positions) const;
    bool operator==(const Fleet&) const = default;
};

/// Event density R(x): a constant, or samples on a regular grid with bilinear
/// interpolation (clamped at the grid border).
class DensityField {
public:
    struct Uniform {
        double value = 1.0;
        bool operator==(const Uniform&) const = default;
    };
    struct Grid {
        Point2 origin;
        double spacing = 1.0;
        std::size_t nx = 0, ny = 0;
        std::vector<double> values;  ///< row-major, values[iy * nx + ix]
        bool operator==(const Grid&) const = default;
    };

    DensityField() = default;
    static DensityField uniform(double value);
    static DensityField grid(Grid g);

    bool is_uniform() const { return std::holds_alternative<Uniform>(kind_); }
    const std::variant<Uniform, Grid>& kind() const { return kind_; }
    DensityField scaled(double c) const;

    /// R at a point assumed to be in F.
    double operator()(Point2 x) const;

    bool operator==(const DensityField&) const = default;

private:
    std::variant<Uniform, Grid> kind_ = Uniform{1.0};
};

/// p0 * exp(-lambda * dist), with no radius cutoff.
inline double detection_prob(const SensorParams& params, double dist) {
    return params.p0 * std::exp(-params.lambda * dist);
}

/// Detection probability of node i at x: zero outside V(s_i).
double hat_p(const MissionSpace& space, const Node& node, Point2 x);

double joint_detection(const MissionSpace& space, const Fleet& fleet, Point2 x);

/// Nodes k != i with |s_i - s_k| < 2 delta_i.
std::vector<std::size_t> neighbor_set(const Fleet& fleet, std::size_t i);

/// Nodes that are neither i nor in its neighbor set.
std::vector<std::size_t> complement_set(const Fleet& fleet, std::size_t i);

/// Probability that no neighbor of i detects an event at x.
double phi(const MissionSpace& space, const Fleet& fleet, std::size_t i, Point2 x);

}  // namespace coverage
