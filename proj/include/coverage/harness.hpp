#pragma once
// Scenario files, experiment runs and result tables.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coverage/boost.hpp"
#include "coverage/geom.hpp"
#include "coverage/opt.hpp"
#include "coverage/sense.hpp"

namespace coverage {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct Scenario {
    std::string name;
    MissionSpace space;
    DensityField density;
    Fleet fleet;
    OptimizerConfig defaults;

    bool operator==(const Scenario&) const = default;
};

class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Malformed, SelfIntersection, InfeasibleStart, Invalid };

    ScenarioError(Kind kind, std::string location, const std::string& message)
        : std::runtime_error(location.empty() ? message : location + ": " + message),
          kind_(kind),
          location_(std::move(location)) {}

    Kind kind() const { return kind_; }
    /// JSON path (e.g. "/nodes/3") or "line L, column C" for syntax errors.
    const std::string& location() const { return location_; }

private:
    Kind kind_;
    std::string location_;
};

Scenario parse_scenario(std::string_view text);
std::string serialize_scenario(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& file);

struct RoundSummary {
    int round = 0;
    BoostSpec boost;
    std::uint64_t bit = 0;
    double H = 0.0;
    bool improved = false;
    bool converged = true;
};

struct RunReport {
    std::string scenario;
    std::vector<BoostSpec> schedule;
    Trigger trigger = Trigger::Global;
    std::vector<RoundSummary> rounds;
    double initial_H = 0.0;
    double final_H = 0.0;
    std::vector<Point2> final_positions;
    std::uint64_t iterations = 0;
    bool converged = true;
    double wall_seconds = 0.0;
    std::vector<std::uint64_t> seeds;
    std::string tool_version{kToolVersion};
    std::string perturbation = "uniform on [-amplitude, amplitude], independent per node, axis and iteration";
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);

struct RunOptions {
    std::size_t heatmap_resolution = 200;
    bool write_files = true;
};

/// Runs the boosting process on `scenario` with `config` (the scenario
/// defaults when omitted) and writes history.csv, positions.csv,
/// heatmap_{initial,final}.{pgm,csv} and summary.json into `out_dir`.
RunReport run_experiment(const Scenario& scenario, const std::vector<BoostSpec>& schedule,
                         const std::filesystem::path& out_dir, const OptimizerConfig* config = nullptr,
                         const RunOptions& options = {});

/// CSV writers used by run_experiment.
void write_history_csv(std::ostream& out, const ProcessState& state);
void write_positions_csv(std::ostream& out, const ProcessState& state);

struct ComparisonRow {
    std::string family;
    int gamma = 0;
    double k = 0.0;
    std::string scheme;
    std::uint64_t bit = 0;
    double H = 0.0;
};

struct ComparisonTable {
    std::string scenario;
    std::vector<ComparisonRow> rows;

    std::string to_csv() const;
    std::string to_text() const;
};

/// One row per report (last round's boost, total BIt over rounds, final H*),
/// sorted by H* descending with ties broken by (family, gamma, k).
/// Throws std::invalid_argument for reports from different scenarios.
ComparisonTable compare_runs(const std::vector<RunReport>& reports);

struct NeighborTableRow {
    int gamma = 0;
    double k = 0.0;
    std::string scenario;
    double H_los = 0.0;      ///< H* with the line-of-sight k_j scheme (NaN when absent)
    double H_closest = 0.0;  ///< H* with the closest-neighbor scheme (NaN when absent)
};

/// Neighbor-boost results across scenarios, one row per (scenario, gamma, k)
/// with the two k_j schemes side by side.
std::vector<NeighborTableRow> neighbor_table(const std::vector<RunReport>& reports);
std::string neighbor_table_csv(const std::vector<NeighborTableRow>& rows);

/// Writes `contents` to `file` through a temporary sibling and a rename,
/// creating missing parent directories.
void write_file_atomic(const std::filesystem::path& file, std::string_view contents);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace coverage
