#pragma once
// Analytic gradient of the local objective H_i with respect to s_i.
//
// The interior term integrates w1 * (x - s_i)/|x - s_i| over V(s_i) in polar
// coordinates around s_i: each ray is cut at the visibility boundary, at the
// neighbors' sensing circles and at the neighbors' shadow segments, so the
// integrand is smooth on every radial piece and Gauss-Legendre applies. The
// boundary term adds the shadow-segment integrals and the contribution of the
// visible part of the sensing circle, where w2 does not vanish.

#include <atomic>
#include <cstdint>
#include <vector>

#include "coverage/boost.hpp"
#include "coverage/geom.hpp"
#include "coverage/sense.hpp"

namespace coverage {

struct GradientVector {
    double ex = 0.0;
    double ey = 0.0;
    Point2 interior;      ///< E_i, including any boost terms
    Point2 boundary;      ///< shadow + arc
    Point2 shadow;        ///< shadow-segment part of the boundary term
    Point2 arc;           ///< sensing-circle part of the boundary term
    Point2 perturbation;  ///< random-perturbation share of `interior` (zero otherwise)
    /// Size of the boosted field relative to the plain one: the w1-weighted
    /// mean of alpha for weight boosts, 1 + |beta| / (p0 * delta) for the
    /// neighbor boost, 1 otherwise.
    double amplification = 1.0;

    Point2 value() const { return {ex, ey}; }
    double norm() const { return std::hypot(ex, ey); }
    bool operator==(const GradientVector&) const = default;
};

struct GradientOptions {
    int angular_res = 360;    ///< panels per full turn (upper bound on panel width 2*pi/angular_res)
    int angular_points = 2;   ///< Gauss points per angular panel
    int radial_points = 4;    ///< Gauss points per radial piece
    int radial_splits = 2;    ///< radial pieces are at most delta / radial_splits long
    int line_samples = 129;   ///< Simpson samples along each shadow segment (odd, >= 65)
    bool include_arc = true;  ///< include the sensing-circle boundary term

    void validate() const;
    bool operator==(const GradientOptions&) const = default;
};

/// Per-iteration cache: neighbor sets and anchors of every node for one
/// frozen fleet. Nodes at pathological positions have `pathological` set and
/// no anchors.
struct GradientSnapshot {
    const MissionSpace* space = nullptr;
    const Fleet* fleet = nullptr;
    const DensityField* density = nullptr;
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<std::vector<AnchorInfo>> anchors;
    std::vector<std::uint8_t> pathological;

    static GradientSnapshot build(const MissionSpace& space, const Fleet& fleet, const DensityField& density);
};

/// R * Phi_i * lambda_i * p_i at x.
double weight_w1(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i, Point2 x);
/// R * Phi_i * p_i at x.
double weight_w2(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i, Point2 x);

Point2 interior_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const GradientOptions& opts = {});

/// Sensing-circle contribution: integral of w2 * outward normal over the visible arc.
Point2 arc_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                const GradientOptions& opts = {});

/// Shadow-segment contribution summed over `anchors`.
Point2 boundary_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const std::vector<AnchorInfo>& anchors, int line_samples = 129);

/// dH/ds_i. Throws PathologicalPosition when s_i is on a degenerate configuration.
GradientVector local_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                              std::size_t i, const GradientOptions& opts = {});

/// Gradient with the boost family applied to w1. `iteration` keys the random
/// stream of the perturbation baseline.
GradientVector boosted_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                                std::size_t i, const BoostSpec& boost, std::uint64_t iteration = 0,
                                const GradientOptions& opts = {});

/// Gradient of node i from a snapshot. Pathological positions are nudged by
/// 10 * eps in a deterministic direction and retried; `nudged` reports it.
GradientVector snapshot_gradient(const GradientSnapshot& snap, std::size_t i, const BoostSpec& boost,
                                 std::uint64_t iteration, const GradientOptions& opts, bool* nudged = nullptr);

/// Gradients of all nodes against one snapshot (evaluated in parallel).
std::vector<GradientVector> all_gradients(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                                          const BoostSpec& boost, std::uint64_t iteration,
                                          const GradientOptions& opts = {});

/// Number of negative w1 / w2 values met at quadrature points since the last reset.
std::uint64_t negative_weight_count();
std::uint64_t weight_evaluation_count();
void reset_weight_checks();

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace coverage
