#include "coverage/sense.hpp"

#include <algorithm>
#include <stdexcept>

namespace coverage {

void SensorParams::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("sensing radius delta must be > 0");
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0, 1]");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
}

bool Fleet::homogeneous() const {
    return std::all_of(nodes.begin(), nodes.end(), [&](const Node& n) { return n.params == nodes.front().params; });
}

std::vector<Point2> Fleet::positions() const {
    std::vector<Point2> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(n.position);
    return out;
}

Fleet Fleet::with_positions(const std::vector<Point2>& positions) const {
    if (positions.size() != nodes.size()) throw std::invalid_argument("position count does not match fleet size");
    Fleet f = *this;
    for (std::size_t i = 0; i < positions.size(); ++i) f.nodes[i].position = positions[i];
    return f;
}

DensityField DensityField::uniform(double value) {
    if (!(value >= 0.0)) throw std::invalid_argument("density must be nonnegative");
    DensityField d;
    d.kind_ = Uniform{value};
    return d;
}

DensityField DensityField::grid(Grid g) {
    if (g.nx < 2 || g.ny < 2 || g.values.size() != g.nx * g.ny || !(g.spacing > 0.0))
        throw std::invalid_argument("density grid needs nx, ny >= 2, spacing > 0 and nx*ny values");
    for (double v : g.values)
        if (!(v >= 0.0)) throw std::invalid_argument("density must be nonnegative");
    DensityField d;
    d.kind_ = std::move(g);
    return d;
}

DensityField DensityField::scaled(double c) const {
    DensityField d = *this;
    if (auto* u = std::get_if<Uniform>(&d.kind_)) {
        u->value *= c;
    } else {
        for (double& v : std::get<Grid>(d.kind_).values) v *= c;
    }
    return d;
}

double DensityField::operator()(Point2 x) const {
    if (const auto* u = std::get_if<Uniform>(&kind_)) return u->value;
    const auto& g = std::get<Grid>(kind_);
    const double fx = std::clamp((x.x - g.origin.x) / g.spacing, 0.0, static_cast<double>(g.nx - 1));
    const double fy = std::clamp((x.y - g.origin.y) / g.spacing, 0.0, static_cast<double>(g.ny - 1));
    const std::size_t ix = std::min(static_cast<std::size_t>(fx), g.nx - 2);
    const std::size_t iy = std::min(static_cast<std::size_t>(fy), g.ny - 2);
    const double tx = fx - static_cast<double>(ix);
    const double ty = fy - static_cast<double>(iy);
    const double v00 = g.values[iy * g.nx + ix];
    const double v10 = g.values[iy * g.nx + ix + 1];
    const double v01 = g.values[(iy + 1) * g.nx + ix];
    const double v11 = g.values[(iy + 1) * g.nx + ix + 1];
    return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

double hat_p(const MissionSpace& space, const Node& node, Point2 x) {
    const double d = distance(x, node.position);
    if (d > node.params.delta) return 0.0;
    if (!segment_clear(space, node.position, x)) return 0.0;
    return detection_prob(node.params, d);
}

double joint_detection(const MissionSpace& space, const Fleet& fleet, Point2 x) {
    double miss = 1.0;
    for (const auto& n : fleet.nodes) miss *= 1.0 - hat_p(space, n, x);
    return 1.0 - miss;
}

std::vector<std::size_t> neighbor_set(const Fleet& fleet, std::size_t i) {
    std::vector<std::size_t> out;
    const auto& ni = fleet.nodes.at(i);
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        if (k == i) continue;
        if (distance(ni.position, fleet.nodes[k].position) < 2.0 * ni.params.delta) out.push_back(k);
    }
    return out;
}

std::vector<std::size_t> complement_set(const Fleet& fleet, std::size_t i) {
    const auto nb = neighbor_set(fleet, i);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < fleet.size(); ++k)
        if (k != i && !std::binary_search(nb.begin(), nb.end(), k)) out.push_back(k);
    return out;
}

double phi(const MissionSpace& space, const Fleet& fleet, std::size_t i, Point2 x) {
    double prod = 1.0;
    for (std::size_t k : neighbor_set(fleet, i)) prod *= 1.0 - hat_p(space, fleet.nodes[k], x);
    return prod;
}

}  // namespace coverage
