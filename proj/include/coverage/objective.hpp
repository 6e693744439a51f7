#pragma once
// Cell-center quadrature of the coverage objective over the feasible region.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "coverage/geom.hpp"
#include "coverage/sense.hpp"

namespace coverage {

/// Regular grid over the bounding box of the mission space. A cell counts
/// toward integrals iff its center lies in F.
class QuadratureGrid {
public:
    QuadratureGrid() = default;
    QuadratureGrid(const MissionSpace& space, Point2 origin, double hx, double hy, std::size_t nx, std::size_t ny);

    /// Square cells of side h covering the bounding box.
    static QuadratureGrid with_spacing(const MissionSpace& space, double h);
    /// nx by ny cells exactly spanning the bounding box.
    static QuadratureGrid with_shape(const MissionSpace& space, std::size_t nx, std::size_t ny);

    Point2 origin() const { return origin_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double cell_area() const { return hx_ * hy_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t cell_count() const { return nx_ * ny_; }

    Point2 center(std::size_t ix, std::size_t iy) const {
        return {origin_.x + (static_cast<double>(ix) + 0.5) * hx_, origin_.y + (static_cast<double>(iy) + 0.5) * hy_};
    }
    /// Feasibility bit per cell, row-major (iy * nx + ix).
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    /// Feasible cells: flat index and center coordinates, in row-major order.
    const std::vector<std::size_t>& feasible_index() const { return index_; }
    const std::vector<double>& cx() const { return cx_; }
    const std::vector<double>& cy() const { return cy_; }
    std::size_t feasible_count() const { return index_.size(); }
    double feasible_area() const { return static_cast<double>(index_.size()) * cell_area(); }

private:
    Point2 origin_;
    double hx_ = 1.0, hy_ = 1.0;
    std::size_t nx_ = 0, ny_ = 0;
    std::vector<std::uint8_t> mask_;
    std::vector<std::size_t> index_;
    std::vector<double> cx_, cy_;
};

/// min(delta_i) / 20.
double default_spacing(const Fleet& fleet);
inline constexpr std::size_t kHeatmapResolution = 200;

/// Order-fixed pairwise summation.
double pairwise_sum(const double* values, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

/// hat_p of `node` at every feasible cell of `grid`.
std::vector<double> hat_p_cells(const MissionSpace& space, const Node& node, const QuadratureGrid& grid);

/// H(s) = sum over cells of R * P * cell area.
double objective_H(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                   const QuadratureGrid& grid);

/// H_i(s): integral over V(s_i) of R * Phi_i * p_i.
double local_H_i(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                 const QuadratureGrid& grid, std::size_t i);

/// H computed with node i removed from the fleet.
double tilde_H(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
               const QuadratureGrid& grid, std::size_t i);

struct Heatmap {
    QuadratureGrid grid;
    /// Joint detection probability per cell (row-major); -1 marks infeasible cells.
    std::vector<double> values;

    static constexpr double kInfeasible = -1.0;
    double at(std::size_t ix, std::size_t iy) const { return values[iy * grid.nx() + ix]; }
};

Heatmap coverage_heatmap(const MissionSpace& space, const Fleet& fleet, const QuadratureGrid& grid);

/// Plain PGM (P2), maxval 255, value round(255 * P); infeasible cells are 0.
/// The first row written is the top (largest y) row of the grid.
void write_pgm(std::ostream& out, const Heatmap& map);
/// CSV with header "x,y,P", one row per cell in row-major order.
void write_csv(std::ostream& out, const Heatmap& map);

struct HeatmapImage {
    std::size_t nx = 0, ny = 0;
    std::vector<double> values;  ///< row-major from the bottom row, as in Heatmap
};
/// Reads the CSV produced by write_csv back into a raster.
HeatmapImage read_heatmap_csv(std::istream& in);
void write_pgm(std::ostream& out, const HeatmapImage& image);

}  // namespace coverage
