#include "coverage/gradient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "coverage/kernels.hpp"
#include "coverage/parallel.hpp"

namespace coverage {

namespace {

std::atomic<std::uint64_t> g_negative_weights{0};
std::atomic<std::uint64_t> g_weight_evals{0};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct NeighborData {
    Point2 s;
    SensorParams params;
    const std::vector<AnchorInfo>* anchors;
};

struct Alpha {
    BoostFamily family = BoostFamily::None;
    double k = 1.0;
    int gamma = 1;

    double operator()(double p_i, double phi) const {
        switch (family) {
            case BoostFamily::PBoost: return p_boost_alpha(1.0 - (1.0 - p_i) * phi, k, gamma);
            case BoostFamily::PhiBoost: return phi_boost_alpha(phi, k, gamma);
            default: return 1.0;
        }
    }
};

// Counts weight evaluations locally and publishes them once.
struct WeightTally {
    std::uint64_t evals = 0;
    std::uint64_t negative = 0;
    void check(double w) {
        ++evals;
        negative += w < 0.0;
    }
    ~WeightTally() {
        g_weight_evals.fetch_add(evals, std::memory_order_relaxed);
        g_negative_weights.fetch_add(negative, std::memory_order_relaxed);
    }
};

void check_weight(double w) {
    WeightTally t;
    t.check(w);
}

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

// Parameters w in [0, 1] where a + w (b - a) lies on the circle |x - c| = radius.
template <class F>
void circle_segment(Point2 c, double radius, Point2 a, Point2 b, F&& emit) {
    const Point2 e = b - a;
    const Point2 f = a - c;
    const double A = dot(e, e);
    if (A == 0.0) return;
    const double B = 2.0 * dot(f, e);
    const double C = dot(f, f) - radius * radius;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    for (double w : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)})
        if (w >= 0.0 && w <= 1.0) emit(a + w * e);
}

// Angles (around s) at which the polar integrand of node i can change form.
std::vector<double> angular_breakpoints(const MissionSpace& space, Point2 s, double delta,
                                        const std::vector<NeighborData>& nbs) {
    std::vector<double> out;
    const double eps = space.eps();
    auto add_point = [&](Point2 p) {
        if (distance(p, s) > eps) out.push_back(wrap_angle(std::atan2(p.y - s.y, p.x - s.x)));
    };
    for (const auto& v : space.all_vertices())
        if (distance(v, s) <= delta) add_point(v);
    for (const auto& e : space.edges()) circle_segment(s, delta, e.a, e.b, add_point);
    for (const auto& nb : nbs) {
        // Neighbor sensing circle against our sensing circle.
        const Point2 dc = nb.s - s;
        const double dist = norm(dc);
        const double r1 = delta, r2 = nb.params.delta;
        if (dist > 0.0 && dist < r1 + r2 && dist > std::abs(r1 - r2)) {
            const double a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist);
            const double h = std::sqrt(std::max(0.0, r1 * r1 - a * a));
            const Point2 u = dc * (1.0 / dist);
            const Point2 m = s + a * u;
            add_point(m + h * Point2{-u.y, u.x});
            add_point(m - h * Point2{-u.y, u.x});
        }
        for (const auto& an : *nb.anchors) {
            if (an.z <= 0.0) continue;
            const Point2 end = an.v + (an.z / an.d) * (an.impact - an.v);
            add_point(end);
            circle_segment(s, delta, an.v, end, add_point);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return b - a < 1e-12; }), out.end());
    return out;
}

struct Ray {
    double dx, dy, weight;
};

std::vector<Ray> build_rays(const std::vector<double>& bps, const GradientOptions& opts) {
    std::vector<std::pair<double, double>> panels;
    if (bps.empty()) {
        panels.emplace_back(0.0, kTwoPi);
    } else {
        for (std::size_t k = 0; k + 1 < bps.size(); ++k) panels.emplace_back(bps[k], bps[k + 1]);
        panels.emplace_back(bps.back(), bps.front() + kTwoPi);
    }
    const double max_width = kTwoPi / opts.angular_res;
    const GaussRule& g = gauss_legendre(opts.angular_points);
    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(opts.angular_res + 2 * bps.size()) * g.x.size());
    for (auto [a, b] : panels) {
        const double len = b - a;
        if (len <= 0.0) continue;
        const int m = std::max(1, static_cast<int>(std::ceil(len / max_width - 1e-9)));
        const double w = len / m;
        for (int q = 0; q < m; ++q) {
            const double mid = a + (q + 0.5) * w;
            for (std::size_t t = 0; t < g.x.size(); ++t) {
                const double th = mid + 0.5 * w * g.x[t];
                rays.push_back({std::cos(th), std::sin(th), 0.5 * w * g.w[t]});
            }
        }
    }
    return rays;
}

struct Piece {
    std::uint32_t ray;
    double r0, r1;
};

struct SweepResult {
    Point2 interior;
    Point2 arc;
    double boosted_mass = 0.0;
    double plain_mass = 0.0;
};

SweepResult polar_sweep(const MissionSpace& space, const DensityField& density, const Node& me,
                        const std::vector<NeighborData>& nbs, const Alpha& alpha, const GradientOptions& opts) {
    const Point2 s = me.position;
    const double delta = me.params.delta;
    const double lambda = me.params.lambda;
    const auto rays = build_rays(angular_breakpoints(space, s, delta, nbs), opts);
    const std::size_t nr = rays.size();

    std::vector<double> dx(nr), dy(nr), t(nr);
    for (std::size_t k = 0; k < nr; ++k) {
        dx[k] = rays[k].dx;
        dy[k] = rays[k].dy;
    }
    const auto edges = kernels::view(space.edge_arrays());
    const auto& kt = kernels::active();
    kt.ray_hits(s.x, s.y, dx.data(), dy.data(), nr, edges, 0.0, t.data());

    // Radial pieces on which neighbor membership is constant.
    const double max_piece = delta / opts.radial_splits;
    std::vector<Piece> pieces;
    std::vector<double> mx, my;
    std::vector<std::uint32_t> arc_rays;
    std::vector<double> ax, ay;
    pieces.reserve(nr * 3);
    std::vector<double> cuts;
    for (std::size_t k = 0; k < nr; ++k) {
        const Point2 u{dx[k], dy[k]};
        const double rho = std::min(t[k], delta);
        if (t[k] > delta) {
            arc_rays.push_back(static_cast<std::uint32_t>(k));
            ax.push_back(s.x + delta * u.x);
            ay.push_back(s.y + delta * u.y);
        }
        if (!(rho > 0.0)) continue;
        cuts.assign({0.0, rho});
        auto add_cut = [&](double r) {
            if (r > 0.0 && r < rho) cuts.push_back(r);
        };
        for (const auto& nb : nbs) {
            const Point2 f = s - nb.s;
            const double b = dot(u, f);
            const double c = dot(f, f) - nb.params.delta * nb.params.delta;
            const double disc = b * b - c;
            if (disc > 0.0) {
                const double sq = std::sqrt(disc);
                add_cut(-b - sq);
                add_cut(-b + sq);
            }
            for (const auto& an : *nb.anchors) {
                if (an.z <= 0.0) continue;
                const Point2 e = (an.impact - an.v) * (an.z / an.d);
                const double den = cross(u, e);
                if (den == 0.0) continue;
                const Point2 ps = an.v - s;
                const double w = cross(ps, u) / den;
                if (w < 0.0 || w > 1.0) continue;
                add_cut(cross(ps, e) / den);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
            const double a = cuts[q], b = cuts[q + 1];
            if (b - a <= 0.0) continue;
            const int m = std::max(1, static_cast<int>(std::ceil((b - a) / max_piece - 1e-9)));
            const double w = (b - a) / m;
            for (int j = 0; j < m; ++j) {
                const double r0 = a + j * w;
                const double r1 = j + 1 == m ? b : a + (j + 1) * w;
                const double rm = 0.5 * (r0 + r1);
                pieces.push_back({static_cast<std::uint32_t>(k), r0, r1});
                mx.push_back(s.x + rm * u.x);
                my.push_back(s.y + rm * u.y);
            }
        }
    }

    const std::size_t np = pieces.size();
    const std::size_t na = arc_rays.size();
    const bool want_arc = opts.include_arc && na > 0;
    std::vector<std::uint8_t> piece_mask(nbs.size() * np), arc_mask(want_arc ? nbs.size() * na : 0);
    for (std::size_t j = 0; j < nbs.size(); ++j) {
        const double r2 = nbs[j].params.delta * nbs[j].params.delta;
        kt.visible_mask(nbs[j].s.x, nbs[j].s.y, r2, mx.data(), my.data(), np, edges, piece_mask.data() + j * np);
        if (want_arc)
            kt.visible_mask(nbs[j].s.x, nbs[j].s.y, r2, ax.data(), ay.data(), na, edges, arc_mask.data() + j * na);
    }

    const GaussRule& g = gauss_legendre(opts.radial_points);
    WeightTally tally;
    std::vector<double> ray_acc(nr, 0.0), ray_plain(nr, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        const Piece& pc = pieces[p];
        const Point2 u{dx[pc.ray], dy[pc.ray]};
        const double half = 0.5 * (pc.r1 - pc.r0);
        const double mid = 0.5 * (pc.r0 + pc.r1);
        double acc = 0.0, plain = 0.0;
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double r = mid + half * g.x[q];
            const Point2 x = s + r * u;
            const double p_i = detection_prob(me.params, r);
            double phi = 1.0;
            for (std::size_t j = 0; j < nbs.size(); ++j)
                if (piece_mask[j * np + p]) phi *= 1.0 - detection_prob(nbs[j].params, distance(x, nbs[j].s));
            const double w1 = density(x) * phi * lambda * p_i;
            tally.check(w1);
            acc += half * g.w[q] * alpha(p_i, phi) * w1 * r;
            plain += half * g.w[q] * w1 * r;
        }
        ray_acc[pc.ray] += acc;
        ray_plain[pc.ray] += plain;
    }

    SweepResult out;
    for (std::size_t k = 0; k < nr; ++k) {
        const double c = rays[k].weight * ray_acc[k];
        out.interior += Point2{c * dx[k], c * dy[k]};
        out.boosted_mass += rays[k].weight * ray_acc[k];
        out.plain_mass += rays[k].weight * ray_plain[k];
    }
    if (want_arc) {
        const double p_edge = detection_prob(me.params, delta);
        for (std::size_t q = 0; q < na; ++q) {
            const std::size_t k = arc_rays[q];
            const Point2 x{ax[q], ay[q]};
            double phi = 1.0;
            for (std::size_t j = 0; j < nbs.size(); ++j)
                if (arc_mask[j * na + q]) phi *= 1.0 - detection_prob(nbs[j].params, distance(x, nbs[j].s));
            const double w2 = density(x) * phi * p_edge;
            tally.check(w2);
            const double c = rays[k].weight * w2 * delta;
            out.arc += Point2{c * dx[k], c * dy[k]};
        }
    }
    return out;
}

Point2 shadow_term(const MissionSpace& space, const DensityField& density, const Node& me,
                   const std::vector<NeighborData>& nbs, const std::vector<AnchorInfo>& anchors, int line_samples) {
    if (line_samples < 3) throw std::invalid_argument("line_samples must be at least 3");
    const int n = line_samples % 2 == 1 ? line_samples : line_samples + 1;
    const auto edges = kernels::view(space.edge_arrays());
    const auto& kt = kernels::active();
    std::vector<double> px(n), py(n), rr(n), f(n);
    std::vector<std::uint8_t> mask(n);
    WeightTally tally;
    Point2 out;
    for (const auto& a : anchors) {
        if (!(a.z > 0.0) || a.D >= me.params.delta) continue;
        const Point2 u = (a.impact - a.v) * (1.0 / a.d);
        for (int m = 0; m < n; ++m) {
            rr[m] = a.z * m / (n - 1);
            px[m] = a.v.x + rr[m] * u.x;
            py[m] = a.v.y + rr[m] * u.y;
        }
        std::vector<double> phi(n, 1.0);
        for (const auto& nb : nbs) {
            kt.visible_mask(nb.s.x, nb.s.y, nb.params.delta * nb.params.delta, px.data(), py.data(), n, edges,
                            mask.data());
            for (int m = 0; m < n; ++m)
                if (mask[m]) phi[m] *= 1.0 - detection_prob(nb.params, distance(Point2{px[m], py[m]}, nb.s));
        }
        for (int m = 0; m < n; ++m) {
            const double w2 = density(Point2{px[m], py[m]}) * phi[m] * detection_prob(me.params, a.D + rr[m]);
            tally.check(w2);
            f[m] = w2 * rr[m];
        }
        double sum = f[0] + f[n - 1];
        for (int m = 1; m < n - 1; ++m) sum += (m % 2 == 1 ? 4.0 : 2.0) * f[m];
        const double integral = sum * (a.z / (n - 1)) / 3.0;
        out.x += a.sgn_nx * std::sin(a.theta) / a.D * integral;
        out.y += a.sgn_ny * std::cos(a.theta) / a.D * integral;
    }
    return out;
}

std::vector<NeighborData> neighbor_data(const GradientSnapshot& snap, std::size_t i) {
    static const std::vector<AnchorInfo> kNone;
    std::vector<NeighborData> out;
    for (std::size_t k : snap.neighbors[i]) {
        const Node& nk = snap.fleet->nodes[k];
        out.push_back({nk.position, nk.params, snap.anchors[k].empty() ? &kNone : &snap.anchors[k]});
    }
    return out;
}

GradientSnapshot build_snapshot(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                                const std::vector<std::uint8_t>* need) {
    GradientSnapshot snap;
    snap.space = &space;
    snap.fleet = &fleet;
    snap.density = &density;
    const std::size_t n = fleet.size();
    snap.neighbors.resize(n);
    snap.anchors.resize(n);
    snap.pathological.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) snap.neighbors[k] = neighbor_set(fleet, k);
    for (std::size_t k = 0; k < n; ++k) {
        if (need && !(*need)[k]) continue;
        try {
            snap.anchors[k] = compute_anchors(space, fleet.nodes[k].position, fleet.nodes[k].params.delta);
        } catch (const PathologicalPosition&) {
            snap.pathological[k] = 1;
        }
    }
    return snap;
}

// Snapshot with anchors only for node i and its neighbors.
GradientSnapshot snapshot_for(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                              std::size_t i) {
    if (i >= fleet.size()) throw std::out_of_range("node index out of range");
    std::vector<std::uint8_t> need(fleet.size(), 0);
    need[i] = 1;
    for (std::size_t k : neighbor_set(fleet, i)) need[k] = 1;
    return build_snapshot(space, fleet, density, &need);
}

GradientVector evaluate(const GradientSnapshot& snap, std::size_t i, const BoostSpec& boost, std::uint64_t iteration,
                        const GradientOptions& opts) {
    const MissionSpace& space = *snap.space;
    const Fleet& fleet = *snap.fleet;
    const Node& me = fleet.nodes[i];
    const auto nbs = neighbor_data(snap, i);
    const Alpha alpha{boost.family, boost.k, boost.gamma};

    const SweepResult sweep = polar_sweep(space, *snap.density, me, nbs, alpha, opts);
    GradientVector g;
    g.interior = sweep.interior;
    g.arc = opts.include_arc ? sweep.arc : Point2{};
    g.shadow = shadow_term(space, *snap.density, me, nbs, snap.anchors[i], opts.line_samples);
    g.boundary = g.shadow + g.arc;

    if ((boost.family == BoostFamily::PBoost || boost.family == BoostFamily::PhiBoost) && sweep.plain_mass > 0.0)
        g.amplification = sweep.boosted_mass / sweep.plain_mass;
    if (boost.family == BoostFamily::NeighborBoost) {
        const auto gains = neighbor_gains(space, fleet, i, boost.k, boost.kj_scheme);
        const Point2 beta = neighbor_boost_vector(fleet, i, gains, boost.gamma, space.eps());
        g.interior += beta;
        const double scale = me.params.p0 * me.params.delta;
        if (scale > 0.0) g.amplification = 1.0 + norm(beta) / scale;
    } else if (boost.family == BoostFamily::RandomPerturb) {
        RandomStream rng(boost.seed, i, iteration);
        g.perturbation = random_perturbation(rng, boost.amplitude);
        g.interior += g.perturbation;
    }
    g.ex = g.interior.x + g.boundary.x;
    g.ey = g.interior.y + g.boundary.y;
    return g;
}

}  // namespace

void GradientOptions::validate() const {
    if (angular_res < 16) throw std::invalid_argument("angular_res must be at least 16");
    if (angular_points < 1 || radial_points < 1 || radial_splits < 1)
        throw std::invalid_argument("quadrature point counts must be positive");
    if (line_samples < 65) throw std::invalid_argument("line_samples must be at least 65");
}

const GaussRule& gauss_legendre(int n) {
    static std::array<GaussRule, 17> rules;
    static std::once_flag once;
    std::call_once(once, [] {
        for (int m = 1; m <= 16; ++m) {
            GaussRule& rule = rules[m];
            rule.x.resize(m);
            rule.w.resize(m);
            for (int k = 0; k < m; ++k) {
                double x = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
                double dp = 1.0;
                for (int it = 0; it < 100; ++it) {
                    double p0 = 1.0, p1 = x;
                    for (int j = 2; j <= m; ++j) {
                        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = m * (x * p1 - p0) / (x * x - 1.0);
                    const double dx = p1 / dp;
                    x -= dx;
                    if (std::abs(dx) < 1e-16) break;
                }
                rule.x[k] = x;
                rule.w[k] = 2.0 / ((1.0 - x * x) * dp * dp);
            }
        }
    });
    if (n < 1 || n > 16) throw std::invalid_argument("Gauss-Legendre order must be in [1, 16]");
    return rules[n];
}

GradientSnapshot GradientSnapshot::build(const MissionSpace& space, const Fleet& fleet, const DensityField& density) {
    return build_snapshot(space, fleet, density, nullptr);
}

double weight_w1(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i, Point2 x) {
    const Node& me = fleet.nodes.at(i);
    const double w = density(x) * phi(space, fleet, i, x) * me.params.lambda *
                     detection_prob(me.params, distance(x, me.position));
    check_weight(w);
    return w;
}

double weight_w2(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i, Point2 x) {
    const Node& me = fleet.nodes.at(i);
    const double w = density(x) * phi(space, fleet, i, x) * detection_prob(me.params, distance(x, me.position));
    check_weight(w);
    return w;
}

Point2 interior_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const GradientOptions& opts) {
    const auto snap = snapshot_for(space, fleet, density, i);
    const auto nbs = neighbor_data(snap, i);
    return polar_sweep(space, density, fleet.nodes[i], nbs, Alpha{}, opts).interior;
}

Point2 arc_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                const GradientOptions& opts) {
    const auto snap = snapshot_for(space, fleet, density, i);
    const auto nbs = neighbor_data(snap, i);
    GradientOptions o = opts;
    o.include_arc = true;
    return polar_sweep(space, density, fleet.nodes[i], nbs, Alpha{}, o).arc;
}

Point2 boundary_term(const MissionSpace& space, const Fleet& fleet, const DensityField& density, std::size_t i,
                     const std::vector<AnchorInfo>& anchors, int line_samples) {
    const auto snap = snapshot_for(space, fleet, density, i);
    return shadow_term(space, density, fleet.nodes[i], neighbor_data(snap, i), anchors, line_samples);
}

GradientVector local_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                              std::size_t i, const GradientOptions& opts) {
    return boosted_gradient(space, fleet, density, i, BoostSpec::none(), 0, opts);
}

GradientVector boosted_gradient(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                                std::size_t i, const BoostSpec& boost, std::uint64_t iteration,
                                const GradientOptions& opts) {
    const auto snap = snapshot_for(space, fleet, density, i);
    if (snap.pathological[i]) throw PathologicalPosition("node " + std::to_string(i) + " is at a pathological position");
    return evaluate(snap, i, boost, iteration, opts);
}

GradientVector snapshot_gradient(const GradientSnapshot& snap, std::size_t i, const BoostSpec& boost,
                                 std::uint64_t iteration, const GradientOptions& opts, bool* nudged) {
    if (nudged) *nudged = false;
    if (!snap.pathological[i]) return evaluate(snap, i, boost, iteration, opts);

    const MissionSpace& space = *snap.space;
    const Point2 s = snap.fleet->nodes[i].position;
    for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
        RandomStream rng(0x6e75646765ULL, i, attempt);
        const double angle = rng.symmetric(std::numbers::pi);
        const Point2 cand = s + (10.0 * space.eps()) * Point2{std::cos(angle), std::sin(angle)};
        if (!contains(space, cand) || !segment_clear(space, s, cand)) continue;
        Fleet moved = *snap.fleet;
        moved.nodes[i].position = cand;
        const auto snap2 = snapshot_for(space, moved, *snap.density, i);
        if (snap2.pathological[i]) continue;
        if (nudged) *nudged = true;
        return evaluate(snap2, i, boost, iteration, opts);
    }
    throw PathologicalPosition("node " + std::to_string(i) + " could not be moved off a pathological position");
}

std::vector<GradientVector> all_gradients(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                                          const BoostSpec& boost, std::uint64_t iteration,
                                          const GradientOptions& opts) {
    const auto snap = GradientSnapshot::build(space, fleet, density);
    std::vector<GradientVector> out(fleet.size());
    parallel_for(fleet.size(), [&](std::size_t i) { out[i] = snapshot_gradient(snap, i, boost, iteration, opts); });
    return out;
}

std::uint64_t negative_weight_count() { return g_negative_weights.load(); }
std::uint64_t weight_evaluation_count() { return g_weight_evals.load(); }
void reset_weight_checks() {
    g_negative_weights.store(0);
    g_weight_evals.store(0);
}

}  // namespace coverage
