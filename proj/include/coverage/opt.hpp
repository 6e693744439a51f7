#pragma once
// Synchronous gradient ascent, equilibrium detection and the boosting process.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "coverage/boost.hpp"
#include "coverage/gradient.hpp"
#include "coverage/objective.hpp"

namespace coverage {

enum class Trigger { Global, Self };
enum class Phase { Plain, Boosted };

std::string_view to_string(Trigger t);
std::string_view to_string(Phase p);
Trigger parse_trigger(std::string_view text);

struct OptimizerConfig {
    double step = 0.5;            ///< zeta
    double max_step_len = 0.0;    ///< per-iteration displacement cap; 0 means delta / 10
    double eps_grad = 0.0;        ///< equilibrium threshold; 0 means 1e-3 * p0 * delta
    int patience = 5;
    int max_iters_per_phase = 400;
    Trigger trigger = Trigger::Global;
    /// Per-node trust radius on the displacement (see step_once). With false
    /// every move is zeta * gradient clamped to max_step_len.
    bool adaptive_step = true;
    GradientOptions gradient;

    void validate() const;
    /// Copy with the zero defaults replaced by values derived from the fleet
    /// (smallest delta, largest p0).
    OptimizerConfig resolved(const Fleet& fleet) const;
    bool operator==(const OptimizerConfig&) const = default;
};

struct HistoryRecord {
    std::uint64_t iter = 0;
    Phase phase = Phase::Plain;
    int round = 0;
    double H = 0.0;
    double max_grad_norm = 0.0;          ///< largest norm of the gradients being followed
    std::vector<Point2> positions;       ///< positions at which the gradients were taken
    std::vector<double> eq_norms;        ///< per-node norm used for equilibrium tests
    std::vector<double> eq_thresholds;   ///< per-node threshold for those norms
    /// Per-node flag: the trust radius collapsed below 1e-4 * delta on
    /// repeated direction reversals. Such a node counts as being at
    /// equilibrium.
    std::vector<std::uint8_t> pinned;
};

struct RoundRecord {
    int round = 0;
    BoostSpec boost;
    std::uint64_t bit = 0;       ///< iterations from boost activation to the next plain equilibrium
    double H_equilibrium = 0.0;  ///< H at that plain equilibrium
    bool improved = false;       ///< became the new best
    bool converged = true;
};

struct ProcessState {
    std::vector<Point2> positions;
    Phase phase = Phase::Plain;
    std::vector<Point2> best_positions;
    double best_value = 0.0;
    std::vector<Point2> initial_positions;  ///< first plain equilibrium
    double initial_value = 0.0;
    std::uint64_t bit_counter = 0;
    int round = 0;
    std::uint64_t iteration = 0;
    bool converged = true;  ///< false once any phase hit max_iters_per_phase
    std::vector<HistoryRecord> history;
    std::vector<RoundRecord> rounds;

    // Per-phase bookkeeping.
    std::size_t phase_start = 0;
    std::vector<double> trust;         ///< per-node displacement cap, at most max_step_len
    std::vector<Point2> last_gradient; ///< direction followed by the last move
    std::vector<double> last_move;     ///< length of the last move
    /// Recent (position, gradient) pairs per node; see step_once.
    std::vector<std::vector<std::pair<Point2, Point2>>> bundle;
    std::vector<Point2> pending;        ///< directions of the last record, not yet applied
    std::vector<double> pending_trust;  ///< trust radii chosen for them

    static ProcessState start(const Fleet& fleet);
};

/// Gradient norm with components pushing into an adjacent wall removed.
Point2 project_on_walls(const MissionSpace& space, Point2 s, Point2 g);

/// Minimum-norm point of the convex hull of `points`.
Point2 min_norm_hull(const std::vector<Point2>& points);

/// One synchronous iteration: all gradients from the current snapshot, one
/// history record, then every node moves by zeta * direction clamped to its
/// trust radius (sliding along a wall it runs into). `boosts` gives each
/// node's active boost; a single entry applies to all nodes.
///
/// A node normally moves along its gradient. When its gradients over the
/// last 2 * patience iterations (taken within its trust radius of the
/// current position) contain a reversal, it sits on a kink of the objective
/// or is being pushed around by its neighbors, and it moves along the
/// minimum-norm element of their convex hull instead; the equilibrium test
/// then uses that element's norm.
///
/// With adaptive_step the trust radius starts at max_step_len, drops to half
/// the last move when the direction reverses and otherwise grows by 10%.
/// Without it the radius stays at max_step_len.
void step_once(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
               const QuadratureGrid& grid, const OptimizerConfig& config, const std::vector<BoostSpec>& boosts,
               ProcessState& state);

/// True iff the last `patience` records of the current phase all have the
/// nodes in scope (all nodes when empty) below their thresholds or pinned.
bool detect_equilibrium(const ProcessState& state, const OptimizerConfig& config,
                        std::optional<std::size_t> node = std::nullopt);

struct PhaseResult {
    std::uint64_t iterations = 0;
    bool converged = false;
};

/// Iterates until equilibrium or max_iters_per_phase. The boost is applied
/// only when `phase` is Boosted.
PhaseResult run_to_equilibrium(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                               const QuadratureGrid& grid, const OptimizerConfig& config, Phase phase,
                               const BoostSpec& boost, ProcessState& state);

/// Plain ascent to the first equilibrium, then one boosting round per
/// schedule entry, keeping the best plain equilibrium found.
ProcessState boosting_process(const MissionSpace& space, const Fleet& fleet, const DensityField& density,
                              const QuadratureGrid& grid, const OptimizerConfig& config,
                              const std::vector<BoostSpec>& schedule);

}  // namespace coverage
