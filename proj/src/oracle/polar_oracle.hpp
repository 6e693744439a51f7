#pragma once
// Reference evaluator for the local objective H_i, used to check the
// analytic gradient by central differences. It integrates in polar
// coordinates around s_i with brute-force breakpoints (every vertex line of
// every neighbor) and plain scalar visibility tests, sharing no code with
// the gradient's sweep beyond the geometry predicates.

#include <cstdint>
#include <random>

#include "coverage/geom.hpp"
#include "coverage/gradient.hpp"
#include "coverage/sense.hpp"

namespace coverage::oracle {

struct OracleOptions {
    int panels = 2048;        ///< upper bound on angular panel width is 2*pi/panels
    int angular_points = 4;
    int radial_points = 8;
    int radial_splits = 4;
};

double local_H_polar(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const OracleOptions& opts = {});

/// Central difference of H_i (equivalently of H, since the remainder does not depend on s_i).
Point2 fd_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                   double step, const OracleOptions& opts = {});

struct GradCheck {
    Point2 analytic;
    Point2 fd;
    double error = 0.0;      ///< |analytic - fd| / max(|fd|, 1e-6)
    bool pass = false;
};

GradCheck check_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                         double step, double tol = 0.02, const GradientOptions& gopts = {},
                         const OracleOptions& oopts = {});

/// True when s is comfortably away from the degenerate configurations of the
/// objective: vertices, edges, and lines along edges through reflex vertices.
bool well_separated(const MissionSpace& space, Point2 s, double clearance);

/// Fleet with the same sensors as `base` placed uniformly at random in F,
/// each position satisfying well_separated(clearance).
Fleet random_placement(const MissionSpace& space, const Fleet& base, std::mt19937_64& rng, double clearance);

}  // namespace coverage::oracle
