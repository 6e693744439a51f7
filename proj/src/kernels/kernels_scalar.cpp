#include <limits>

#include "coverage/kernels.hpp"

namespace coverage::kernels::scalar {

void visible_mask(double ox, double oy, double r2, const double* px, const double* py, std::size_t n,
                  EdgeView edges, std::uint8_t* mask) {
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = px[k] - ox;
        const double dy = py[k] - oy;
        if (!(dx * dx + dy * dy <= r2)) {
            mask[k] = 0;
            continue;
        }
        bool blocked = false;
        for (std::size_t e = 0; e < edges.n && !blocked; ++e) {
            const double ex = edges.ex[e], ey = edges.ey[e];
            const double d1 = ex * (oy - edges.ay[e]) - ey * (ox - edges.ax[e]);
            const double d2 = ex * (py[k] - edges.ay[e]) - ey * (px[k] - edges.ax[e]);
            const double d3 = dx * (edges.ay[e] - oy) - dy * (edges.ax[e] - ox);
            const double d4 = dx * (edges.by[e] - oy) - dy * (edges.bx[e] - ox);
            const bool split_edge = (d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0);
            const bool split_seg = (d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0);
            blocked = split_edge && split_seg;
        }
        mask[k] = blocked ? 0 : 1;
    }
}

void ray_hits(double ox, double oy, const double* dx, const double* dy, std::size_t n, EdgeView edges,
              double t_min, double* t) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        double best = inf;
        for (std::size_t e = 0; e < edges.n; ++e) {
            const double ex = edges.ex[e], ey = edges.ey[e];
            const double denom = dx[k] * ey - dy[k] * ex;
            if (denom == 0.0) continue;
            const double wx = edges.ax[e] - ox;
            const double wy = edges.ay[e] - oy;
            const double tt = (wx * ey - wy * ex) / denom;
            const double w = (wx * dy[k] - wy * dx[k]) / denom;
            if (tt > t_min && w >= 0.0 && w <= 1.0 && tt < best) best = tt;
        }
        t[k] = best;
    }
}

}  // namespace coverage::kernels::scalar
