#include "coverage/opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coverage/parallel.hpp"

namespace coverage {

std::string_view to_string(Trigger t) { return t == Trigger::Global ? "global" : "self"; }
std::string_view to_string(Phase p) { return p == Phase::Plain ? "plain" : "boosted"; }

Trigger parse_trigger(std::string_view t) {
    if (t == "global") return Trigger::Global;
    if (t == "self") return Trigger::Self;
    throw std::invalid_argument("unknown trigger '" + std::string(t) + "'");
}

void OptimizerConfig::validate() const {
    if (!(step >= 0.0)) throw std::invalid_argument("step must be >= 0");
    if (!(max_step_len >= 0.0)) throw std::invalid_argument("max_step_len must be >= 0");
    if (!(eps_grad >= 0.0)) throw std::invalid_argument("eps_grad must be >= 0");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (max_iters_per_phase < 1) throw std::invalid_argument("max_iters_per_phase must be >= 1");
    gradient.validate();
}

OptimizerConfig OptimizerConfig::resolved(const Fleet& fleet) const {
    OptimizerConfig c = *this;
    if (fleet.nodes.empty()) return c;
    double delta = fleet.nodes.front().params.delta, p0 = 0.0;
    for (const auto& n : fleet.nodes) {
        delta = std::min(delta, n.params.delta);
        p0 = std::max(p0, n.params.p0);
    }
    if (c.max_step_len == 0.0) c.max_step_len = delta / 10.0;
    if (c.eps_grad == 0.0) c.eps_grad = 1e-3 * std::max(p0, 1e-3) * delta;
    return c;
}

ProcessState ProcessState::start(const Fleet& fleet) {
    ProcessState s;
    s.positions = fleet.positions();
    s.best_positions = s.positions;
    return s;
}

Point2 project_on_walls(const MissionSpace& space, Point2 s, Point2 g) {
    const double tol = 1e-6 * space.diameter();
    for (const auto& e : space.edges()) {
        if (distance_to_segment(s, e.a, e.b) > tol) continue;
        const Point2 d = e.b - e.a;
        const double len = norm(d);
        if (len == 0.0) continue;
        // Unit normal pointing into F: left of outer edges, right of obstacle edges.
        Point2 n = Point2{-d.y, d.x} * (1.0 / len);
        if (e.owner >= 0) n = n * -1.0;
        const double into = dot(g, n);
        if (into < 0.0) g -= into * n;
    }
    return g;
}

Point2 min_norm_hull(const std::vector<Point2>& pts) {
    if (pts.empty()) return {};
    const std::size_t n = pts.size();
    // Origin inside some triangle: the hull contains zero.
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                const double o1 = cross(pts[b] - pts[a], Point2{} - pts[a]);
                const double o2 = cross(pts[c] - pts[b], Point2{} - pts[b]);
                const double o3 = cross(pts[a] - pts[c], Point2{} - pts[c]);
                if ((o1 >= 0 && o2 >= 0 && o3 >= 0) || (o1 <= 0 && o2 <= 0 && o3 <= 0)) {
                    if (orient(pts[a], pts[b], pts[c]) != 0.0) return {};
                }
            }
    Point2 best = pts[0];
    for (std::size_t a = 0; a < n; ++a) {
        if (norm(pts[a]) < norm(best)) best = pts[a];
        for (std::size_t b = a + 1; b < n; ++b) {
            const Point2 d = pts[b] - pts[a];
            const double dd = dot(d, d);
            if (dd == 0.0) continue;
            const double t = std::clamp(-dot(pts[a], d) / dd, 0.0, 1.0);
            const Point2 q = pts[a] + t * d;
            if (norm(q) < norm(best)) best = q;
        }
    }
    return best;
}

namespace {

// Direction for node i: its gradient, or the minimum-norm element of its
// recent gradients when those reverse.
Point2 bundle_direction(ProcessState& state, std::size_t i, Point2 pos, Point2 g, const OptimizerConfig& c,
                        double radius) {
    auto& b = state.bundle[i];
    b.emplace_back(pos, g);
    const std::size_t window = 2 * static_cast<std::size_t>(c.patience);
    if (b.size() > window) b.erase(b.begin(), b.end() - static_cast<std::ptrdiff_t>(window));
    std::vector<Point2> gs;
    for (const auto& [p, v] : b)
        if (distance(p, pos) <= radius) gs.push_back(v);
    bool reversal = false;
    for (std::size_t a = 0; a < gs.size() && !reversal; ++a)
        for (std::size_t k = a + 1; k < gs.size() && !reversal; ++k) reversal = dot(gs[a], gs[k]) < 0.0;
    return reversal ? min_norm_hull(gs) : g;
}

double equilibrium_threshold(const OptimizerConfig& c, const BoostSpec& b, const GradientVector& g) {
    switch (b.family) {
        case BoostFamily::None: return c.eps_grad;
        case BoostFamily::RandomPerturb: return std::max(c.eps_grad, b.amplitude);
        default: return c.eps_grad * std::max(1.0, g.amplification);
    }
}

// Gradients at the current positions and one history record.
void observe(const MissionSpace& space, const Fleet& fleet, const DensityField& density, const QuadratureGrid& grid,
             const OptimizerConfig& config, const std::vector<BoostSpec>& boosts, ProcessState& state) {
    const std::size_t n = fleet.size();
    if (boosts.size() != 1 && boosts.size() != n) throw std::invalid_argument("need one boost or one per node");
    const Fleet now = fleet.with_positions(state.positions);
    const auto snap = GradientSnapshot::build(space, now, density);
    std::vector<GradientVector> grads(n);
    parallel_for(n, [&](std::size_t i) {
        grads[i] = snapshot_gradient(snap, i, boosts.size() == 1 ? boosts[0] : boosts[i], state.iteration,
                                     config.gradient);
    });

    HistoryRecord rec;
    rec.iter = state.iteration;
    rec.phase = state.phase;
    rec.round = state.round;
    rec.H = objective_H(space, now, density, grid);
    rec.positions = state.positions;
    rec.eq_norms.resize(n);
    rec.eq_thresholds.resize(n);
    rec.pinned.assign(n, 0);
    state.pending.resize(n);
    state.pending_trust.resize(n);
    if (state.trust.size() != n) state.trust.assign(n, config.max_step_len);
    if (state.last_gradient.size() != n) state.last_gradient.assign(n, Point2{});
    if (state.last_move.size() != n) state.last_move.assign(n, 0.0);
    if (state.bundle.size() != n) state.bundle.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        const BoostSpec& b = boosts.size() == 1 ? boosts[0] : boosts[i];
        const Point2 raw = grads[i].value();
        rec.max_grad_norm = std::max(rec.max_grad_norm, norm(raw));
        // Components pushing into an adjacent wall cannot be followed.
        const Point2 free = project_on_walls(space, state.positions[i], raw);

        double trust = config.max_step_len;
        if (config.adaptive_step) {
            trust = dot(free, state.last_gradient[i]) < 0.0
                        ? 0.5 * std::min(state.trust[i], state.last_move[i])
                        : std::min(config.max_step_len, 1.1 * state.trust[i]);
        }
        state.pending_trust[i] = trust;

        const bool noisy = b.family == BoostFamily::RandomPerturb;
        const Point2 followed =
            noisy ? raw : bundle_direction(state, i, state.positions[i], free, config, std::max(trust, space.eps()));
        state.pending[i] = followed;
        const Point2 judged = noisy ? raw - grads[i].perturbation : followed;
        rec.eq_norms[i] = norm(project_on_walls(space, state.positions[i], judged));
        rec.eq_thresholds[i] = equilibrium_threshold(config, b, grads[i]);
        rec.pinned[i] = config.adaptive_step && trust < 1e-3 * fleet.nodes[i].params.delta;
    }
    state.history.push_back(std::move(rec));
}

// Moves every node along its pending gradient.
void advance(const MissionSpace& space, const OptimizerConfig& config, ProcessState& state) {
    const std::size_t n = state.positions.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 g = state.pending[i];
        state.trust[i] = state.pending_trust[i];
        state.last_gradient[i] = g;
        state.last_move[i] = 0.0;

        Point2 move = config.step * g;
        const double len = norm(move);
        if (len > state.trust[i]) move = move * (state.trust[i] / len);
        if (len == 0.0 || state.trust[i] == 0.0) continue;

        const Point2 from = state.positions[i];
        const ClipResult hit = clip_move_detail(space, from, from + move);
        Point2 to = hit.point;
        if (hit.blocked && hit.edge) {
            // Slide along the blocking edge with the remaining tangential motion.
            const auto& e = space.edges()[*hit.edge];
            const Point2 d = e.b - e.a;
            const double dl = norm(d);
            if (dl > 0.0) {
                const Point2 t = d * (1.0 / dl);
                const Point2 rest = (from + move) - to;
                const Point2 slide = dot(rest, t) * t;
                if (norm(slide) > space.eps()) to = clip_move(space, to, to + slide);
            }
        }
        state.last_move[i] = distance(from, to);
        state.positions[i] = to;
    }
    ++state.iteration;
}

std::size_t calm_run(const ProcessState& state, std::size_t from, std::optional<std::size_t> node) {
    std::size_t run = 0;
    for (std::size_t r = state.history.size(); r > from; --r) {
        const auto& rec = state.history[r - 1];
        bool calm = true;
        auto settled = [&](std::size_t i) {
            return rec.eq_norms[i] < rec.eq_thresholds[i] || (i < rec.pinned.size() && rec.pinned[i]);
        };
        if (node) {
            calm = settled(*node);
        } else {
            for (std::size_t i = 0; i < rec.eq_norms.size() && calm; ++i) calm = settled(i);
        }
        if (!calm) break;
        ++run;
    }
    return run;
}

void begin_phase(ProcessState& state, Phase phase, const OptimizerConfig& config) {
    state.phase = phase;
    state.phase_start = state.history.size();
    state.trust.assign(state.positions.size(), config.max_step_len);
    state.last_gradient.assign(state.positions.size(), Point2{});
    state.last_move.assign(state.positions.size(), 0.0);
    state.bundle.assign(state.positions.size(), {});
}

void validate_start(const MissionSpace& space, const Fleet& fleet) {
    for (std::size_t i = 0; i < fleet.size(); ++i)
        if (!contains(space, fleet.nodes[i].position))
            throw GeometryError(GeometryError::Kind::InfeasiblePoint,
                                "node " + std::to_string(i) + " starts outside the feasible region", {i, i});
}

}  // namespace

void step_once(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
               const QuadratureGrid& grid, const OptimizerConfig& config, const std::vector<BoostSpec>& boosts,
               ProcessState& state) {
    const OptimizerConfig c = config.resolved(fleet);
    observe(space, fleet, density, grid, c, boosts, state);
    advance(space, c, state);
}

bool detect_equilibrium(const ProcessState& state, const OptimizerConfig& config, std::optional<std::size_t> node) {
    if (state.history.empty()) return false;
    return calm_run(state, state.phase_start, node) >= static_cast<std::size_t>(config.patience);
}

PhaseResult run_to_equilibrium(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                               const QuadratureGrid& grid, const OptimizerConfig& config, Phase phase,
                               const BoostSpec& boost, ProcessState& state) {
    const OptimizerConfig c = config.resolved(fleet);
    begin_phase(state, phase, c);
    const std::vector<BoostSpec> boosts{phase == Phase::Boosted ? boost : BoostSpec::none()};
    PhaseResult res;
    for (int it = 0; it < c.max_iters_per_phase; ++it) {
        observe(space, fleet, density, grid, c, boosts, state);
        ++res.iterations;
        if (detect_equilibrium(state, c)) {
            res.converged = true;
            ++state.iteration;
            return res;
        }
        advance(space, c, state);
    }
    state.converged = false;
    return res;
}

namespace {

// One self-triggered round: each node boosts once it sees its own plain
// equilibrium and reverts at its own boosted equilibrium; the round ends at
// a global plain equilibrium after every node has reverted.
PhaseResult self_round(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                       const QuadratureGrid& grid, const OptimizerConfig& c, const BoostSpec& boost,
                       ProcessState& state) {
    enum Mode { Waiting, Boosting, Reverted };
    const std::size_t n = fleet.size();
    begin_phase(state, Phase::Boosted, c);
    std::vector<Mode> mode(n, Waiting);
    std::vector<std::size_t> mode_start(n, state.history.size());
    std::vector<BoostSpec> boosts(n, BoostSpec::none());
    PhaseResult res;
    const int budget = 3 * c.max_iters_per_phase;
    for (int it = 0; it < budget; ++it) {
        for (std::size_t i = 0; i < n; ++i) boosts[i] = mode[i] == Boosting ? boost : BoostSpec::none();
        observe(space, fleet, density, grid, c, boosts, state);
        ++res.iterations;
        const std::size_t next = state.history.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (mode[i] == Reverted) continue;
            if (calm_run(state, mode_start[i], i) < static_cast<std::size_t>(c.patience)) continue;
            mode[i] = mode[i] == Waiting ? Boosting : Reverted;
            mode_start[i] = next;
            state.trust[i] = c.max_step_len;
            state.last_gradient[i] = Point2{};
            state.last_move[i] = 0.0;
            state.bundle[i].clear();
        }
        const bool all_reverted = std::all_of(mode.begin(), mode.end(), [](Mode m) { return m == Reverted; });
        if (all_reverted) {
            if (state.phase == Phase::Boosted) {
                state.phase = Phase::Plain;
                state.phase_start = *std::max_element(mode_start.begin(), mode_start.end());
            }
            if (detect_equilibrium(state, c)) {
                res.converged = true;
                ++state.iteration;
                return res;
            }
        }
        advance(space, c, state);
    }
    state.converged = false;
    return res;
}

}  // namespace

ProcessState boosting_process(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                              const QuadratureGrid& grid, const OptimizerConfig& config,
                              const std::vector<BoostSpec>& schedule) {
    validate_start(space, fleet);
    const OptimizerConfig c = config.resolved(fleet);
    c.validate();
    ProcessState state = ProcessState::start(fleet);

    run_to_equilibrium(space, fleet, density, grid, c, Phase::Plain, BoostSpec::none(), state);
    state.initial_positions = state.positions;
    state.initial_value = objective_H(space, fleet.with_positions(state.positions), density, grid);
    state.best_positions = state.positions;
    state.best_value = state.initial_value;

    for (const BoostSpec& boost : schedule) {
        ++state.round;
        RoundRecord rr;
        rr.round = state.round;
        rr.boost = boost;
        if (c.trigger == Trigger::Global) {
            const PhaseResult b = run_to_equilibrium(space, fleet, density, grid, c, Phase::Boosted, boost, state);
            const PhaseResult p = run_to_equilibrium(space, fleet, density, grid, c, Phase::Plain, boost, state);
            rr.bit = b.iterations + p.iterations;
            rr.converged = b.converged && p.converged;
        } else {
            const PhaseResult r = self_round(space, fleet, density, grid, c, boost, state);
            rr.bit = r.iterations;
            rr.converged = r.converged;
        }
        state.bit_counter = rr.bit;
        rr.H_equilibrium = objective_H(space, fleet.with_positions(state.positions), density, grid);
        if (rr.H_equilibrium > state.best_value) {
            state.best_value = rr.H_equilibrium;
            state.best_positions = state.positions;
            rr.improved = true;
        } else {
            state.positions = state.best_positions;
        }
        state.rounds.push_back(rr);
    }
    state.phase = Phase::Plain;
    return state;
}

}  // namespace coverage
