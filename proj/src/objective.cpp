#include "coverage/objective.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "coverage/kernels.hpp"

namespace coverage {

QuadratureGrid::QuadratureGrid(const MissionSpace& space, Point2 origin, double hx, double hy, std::size_t nx,
                               std::size_t ny)
    : origin_(origin), hx_(hx), hy_(hy), nx_(nx), ny_(ny), mask_(nx * ny, 0) {
    if (!(hx > 0.0) || !(hy > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const Point2 c = center(ix, iy);
            if (!contains(space, c)) continue;
            mask_[iy * nx + ix] = 1;
            index_.push_back(iy * nx + ix);
            cx_.push_back(c.x);
            cy_.push_back(c.y);
        }
    }
}

QuadratureGrid QuadratureGrid::with_spacing(const MissionSpace& space, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    const BoundingBox b = space.bbox();
    const auto nx = static_cast<std::size_t>(std::ceil(b.width() / h - 1e-9));
    const auto ny = static_cast<std::size_t>(std::ceil(b.height() / h - 1e-9));
    return QuadratureGrid(space, b.lo, h, h, std::max<std::size_t>(nx, 1), std::max<std::size_t>(ny, 1));
}

QuadratureGrid QuadratureGrid::with_shape(const MissionSpace& space, std::size_t nx, std::size_t ny) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("grid shape must be positive");
    const BoundingBox b = space.bbox();
    return QuadratureGrid(space, b.lo, b.width() / static_cast<double>(nx), b.height() / static_cast<double>(ny), nx,
                          ny);
}

double default_spacing(const Fleet& fleet) {
    if (fleet.nodes.empty()) throw std::invalid_argument("fleet is empty");
    double d = fleet.nodes.front().params.delta;
    for (const auto& n : fleet.nodes) d = std::min(d, n.params.delta);
    return d / 20.0;
}

double pairwise_sum(const double* values, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += values[k];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

std::vector<double> hat_p_cells(const MissionSpace& space, const Node& node, const QuadratureGrid& grid) {
    const std::size_t n = grid.feasible_count();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    std::vector<std::uint8_t> mask(n);
    const Point2 s = node.position;
    const double delta = node.params.delta;
    // Slightly generous radius in the kernel; the exact closed-disk test is redone below.
    kernels::active().visible_mask(s.x, s.y, delta * delta * (1.0 + 1e-12), grid.cx().data(), grid.cy().data(), n,
                                   kernels::view(space.edge_arrays()), mask.data());
    for (std::size_t c = 0; c < n; ++c) {
        if (!mask[c]) continue;
        const double d = distance(Point2{grid.cx()[c], grid.cy()[c]}, s);
        if (d <= delta) out[c] = detection_prob(node.params, d);
    }
    return out;
}

namespace {

std::vector<double> density_cells(const DensityField& density, const QuadratureGrid& grid) {
    std::vector<double> r(grid.feasible_count());
    for (std::size_t c = 0; c < r.size(); ++c) r[c] = density(Point2{grid.cx()[c], grid.cy()[c]});
    return r;
}

// Product of (1 - hat_p_k) over all nodes except `skip`, in node order.
std::vector<double> miss_product(const MissionSpace& space, const Fleet& fleet, const QuadratureGrid& grid,
                                 std::size_t skip) {
    std::vector<double> miss(grid.feasible_count(), 1.0);
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        if (k == skip) continue;
        const auto p = hat_p_cells(space, fleet.nodes[k], grid);
        for (std::size_t c = 0; c < miss.size(); ++c) miss[c] *= 1.0 - p[c];
    }
    return miss;
}

double covered_integral(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                        const QuadratureGrid& grid, std::size_t skip) {
    const auto miss = miss_product(space, fleet, grid, skip);
    const auto r = density_cells(density, grid);
    std::vector<double> terms(miss.size());
    for (std::size_t c = 0; c < terms.size(); ++c) terms[c] = r[c] * (1.0 - miss[c]);
    return pairwise_sum(terms) * grid.cell_area();
}

}  // namespace

double objective_H(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                   const QuadratureGrid& grid) {
    return covered_integral(space, fleet, density, grid, fleet.size());
}

double tilde_H(const MissionSpace& space, const Fleet& fleet, const DensityField& density, const QuadratureGrid& grid,
               std::size_t i) {
    if (i >= fleet.size()) throw std::out_of_range("node index out of range");
    return covered_integral(space, fleet, density, grid, i);
}

double local_H_i(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                 const QuadratureGrid& grid, std::size_t i) {
    if (i >= fleet.size()) throw std::out_of_range("node index out of range");
    const auto pi = hat_p_cells(space, fleet.nodes[i], grid);
    std::vector<double> phi(pi.size(), 1.0);
    for (std::size_t k : neighbor_set(fleet, i)) {
        const auto pk = hat_p_cells(space, fleet.nodes[k], grid);
        for (std::size_t c = 0; c < phi.size(); ++c) phi[c] *= 1.0 - pk[c];
    }
    const auto r = density_cells(density, grid);
    std::vector<double> terms(pi.size());
    for (std::size_t c = 0; c < terms.size(); ++c) terms[c] = r[c] * phi[c] * pi[c];
    return pairwise_sum(terms) * grid.cell_area();
}

Heatmap coverage_heatmap(const MissionSpace& space, const Fleet& fleet, const QuadratureGrid& grid) {
    Heatmap map{grid, std::vector<double>(grid.cell_count(), Heatmap::kInfeasible)};
    const auto miss = miss_product(space, fleet, grid, fleet.size());
    for (std::size_t c = 0; c < miss.size(); ++c) map.values[grid.feasible_index()[c]] = 1.0 - miss[c];
    return map;
}

namespace {

void write_pgm_raster(std::ostream& out, std::size_t nx, std::size_t ny, const std::vector<double>& values) {
    out << "P2\n" << nx << ' ' << ny << "\n255\n";
    for (std::size_t row = 0; row < ny; ++row) {
        const std::size_t iy = ny - 1 - row;
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double v = values[iy * nx + ix];
            const long g = v < 0.0 ? 0L : std::lround(255.0 * std::min(v, 1.0));
            out << g << (ix + 1 == nx ? '\n' : ' ');
        }
    }
}

}  // namespace

void write_pgm(std::ostream& out, const Heatmap& map) {
    write_pgm_raster(out, map.grid.nx(), map.grid.ny(), map.values);
}

void write_pgm(std::ostream& out, const HeatmapImage& image) {
    write_pgm_raster(out, image.nx, image.ny, image.values);
}

void write_csv(std::ostream& out, const Heatmap& map) {
    const auto old_precision = out.precision(17);
    out << "x,y,P\n";
    for (std::size_t iy = 0; iy < map.grid.ny(); ++iy) {
        for (std::size_t ix = 0; ix < map.grid.nx(); ++ix) {
            const Point2 c = map.grid.center(ix, iy);
            out << c.x << ',' << c.y << ',' << map.at(ix, iy) << '\n';
        }
    }
    out.precision(old_precision);
}

HeatmapImage read_heatmap_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,P", 0) != 0)
        throw std::runtime_error("heatmap CSV must start with header x,y,P");
    std::map<double, std::size_t> xs, ys;
    struct Row { double x, y, p; };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Row r{};
        char c1 = 0, c2 = 0;
        if (!(ss >> r.x >> c1 >> r.y >> c2 >> r.p) || c1 != ',' || c2 != ',')
            throw std::runtime_error("malformed heatmap CSV at line " + std::to_string(lineno));
        xs.emplace(r.x, 0);
        ys.emplace(r.y, 0);
        rows.push_back(r);
    }
    std::size_t k = 0;
    for (auto& [x, idx] : xs) idx = k++;
    k = 0;
    for (auto& [y, idx] : ys) idx = k++;
    HeatmapImage img{xs.size(), ys.size(), std::vector<double>(xs.size() * ys.size(), Heatmap::kInfeasible)};
    if (rows.size() != img.values.size()) throw std::runtime_error("heatmap CSV is not a complete grid");
    for (const auto& r : rows) img.values[ys[r.y] * img.nx + xs[r.x]] = r.p;
    return img;
}

}  // namespace coverage
