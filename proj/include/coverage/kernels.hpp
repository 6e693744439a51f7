#pragma once
// Batch kernels for the quadrature and ray-casting inner loops.
//
// Every kernel has a scalar reference and, on x86-64, an AVX2 variant that
// evaluates the same expressions in the same order, so both produce identical
// results. The active backend is chosen once at startup from CPU support and
// the COVERAGE_KERNELS environment variable ("scalar" or "avx2").

#include <cstddef>
#include <cstdint>

#include "coverage/geom.hpp"

namespace coverage::kernels {

enum class Backend { Scalar, Avx2 };

struct EdgeView {
    const double* ax;
    const double* ay;
    const double* bx;
    const double* by;
    const double* ex;
    const double* ey;
    std::size_t n;
};

inline EdgeView view(const EdgeArrays& e) {
    return {e.ax.data(), e.ay.data(), e.bx.data(), e.by.data(), e.ex.data(), e.ey.data(), e.size()};
}

/// mask[k] = 1 iff |p_k - o|^2 <= r2 and the segment o-p_k crosses no edge properly.
using VisibleMaskFn = void (*)(double ox, double oy, double r2, const double* px, const double* py,
                               std::size_t n, EdgeView edges, std::uint8_t* mask);

/// t[k] = smallest t > t_min with o + t*dir_k on an edge, or +inf.
using RayHitsFn = void (*)(double ox, double oy, const double* dx, const double* dy, std::size_t n,
                           EdgeView edges, double t_min, double* t);

struct KernelTable {
    Backend backend;
    const char* name;
    VisibleMaskFn visible_mask;
    RayHitsFn ray_hits;
};

bool available(Backend b);
const KernelTable& table(Backend b);
const KernelTable& active();
void set_backend(Backend b);

namespace scalar {
void visible_mask(double ox, double oy, double r2, const double* px, const double* py, std::size_t n,
                  EdgeView edges, std::uint8_t* mask);
void ray_hits(double ox, double oy, const double* dx, const double* dy, std::size_t n, EdgeView edges,
              double t_min, double* t);
}  // namespace scalar

#if defined(COVERAGE_HAVE_AVX2)
namespace avx2 {
void visible_mask(double ox, double oy, double r2, const double* px, const double* py, std::size_t n,
                  EdgeView edges, std::uint8_t* mask);
void ray_hits(double ox, double oy, const double* dx, const double* dy, std::size_t n, EdgeView edges,
              double t_min, double* t);
}  // namespace avx2
#endif

}  // namespace coverage::kernels
