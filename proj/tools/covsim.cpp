// covsim: command-line front end for scenario runs, parameter sweeps,
// gradient checks and heatmap rendering.
//
// Exit codes: 0 success, 1 failed gradient check or I/O error,
// 2 validation error, 3 a phase hit max_iters_per_phase.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coverage/harness.hpp"
#include "coverage/parallel.hpp"
#include "polar_oracle.hpp"

namespace fs = std::filesystem;
using namespace coverage;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNoConvergence = 3;

struct BoostArgs {
    std::string family = "none";
    std::optional<int> gamma;
    std::optional<double> k;
    std::string kj_scheme;
    std::optional<double> amplitude;
    std::uint64_t seed = 0;
};

BoostSpec make_boost(const BoostArgs& a) {
    BoostSpec b = default_boost(parse_family(a.family));
    if (a.gamma) b.gamma = *a.gamma;
    if (a.k) b.k = *a.k;
    if (!a.kj_scheme.empty()) b.kj_scheme = parse_kj_scheme(a.kj_scheme);
    if (a.amplitude) b.amplitude = *a.amplitude;
    b.seed = a.seed;
    b.validate();
    return b;
}

OptimizerConfig config_for(const Scenario& sc, const std::string& trigger) {
    OptimizerConfig c = sc.defaults;
    if (!trigger.empty()) c.trigger = parse_trigger(trigger);
    c.validate();
    return c;
}

void print_report(const RunReport& r) {
    std::printf("scenario %s  trigger %s\n", r.scenario.c_str(), std::string(to_string(r.trigger)).c_str());
    std::printf("initial H %.6g\n", r.initial_H);
    for (const auto& s : r.rounds)
        std::printf("round %d  %-28s BIt=%llu  H=%.6g%s%s\n", s.round, s.boost.label().c_str(),
                    static_cast<unsigned long long>(s.bit), s.H, s.improved ? "  (new best)" : "",
                    s.converged ? "" : "  (not converged)");
    std::printf("final H* %.6g  (%+.2f%%)  iterations %llu  %.2fs\n", r.final_H,
                r.initial_H > 0 ? 100.0 * (r.final_H / r.initial_H - 1.0) : 0.0,
                static_cast<unsigned long long>(r.iterations), r.wall_seconds);
}

int cmd_run(const std::string& scenario_file, const BoostArgs& args, int rounds, const std::string& trigger,
            const fs::path& out) {
    const Scenario sc = load_scenario(scenario_file);
    const OptimizerConfig config = config_for(sc, trigger);
    const BoostSpec boost = make_boost(args);
    std::vector<BoostSpec> schedule;
    for (int r = 0; r < rounds; ++r) {
        BoostSpec b = boost;
        // Fresh noise per round of random perturbation.
        if (b.family == BoostFamily::RandomPerturb) b.seed = args.seed + static_cast<std::uint64_t>(r);
        schedule.push_back(b);
    }
    const RunReport report = run_experiment(sc, schedule, out, &config);
    print_report(report);
    return report.converged ? 0 : kExitNoConvergence;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_sweep(const std::vector<std::string>& scenario_files, const std::string& family,
              const std::string& gammas, const std::string& ks, const std::string& schemes, const fs::path& out) {
    const BoostFamily fam = parse_family(family);
    if (fam == BoostFamily::None || fam == BoostFamily::RandomPerturb)
        throw std::invalid_argument("sweep needs a boosting family with gamma and k");
    std::vector<int> gamma_list;
    for (const auto& g : split(gammas)) gamma_list.push_back(std::stoi(g));
    std::vector<double> k_list;
    for (const auto& k : split(ks)) k_list.push_back(std::stod(k));
    std::vector<KjScheme> scheme_list;
    if (fam == BoostFamily::NeighborBoost) {
        for (const auto& s : split(schemes)) scheme_list.push_back(parse_kj_scheme(s));
    } else {
        scheme_list.push_back(KjScheme::Closest);
    }

    bool converged = true;
    std::vector<RunReport> all;
    for (const auto& file : scenario_files) {
        const Scenario sc = load_scenario(file);
        const OptimizerConfig config = config_for(sc, "");
        std::vector<RunReport> reports;
        for (int g : gamma_list)
            for (double k : k_list)
                for (KjScheme s : scheme_list) {
                    BoostSpec b = default_boost(fam);
                    b.gamma = g;
                    b.k = k;
                    b.kj_scheme = s;
                    b.validate();
                    const fs::path dir = out / sc.name /
                                         (std::string(to_string(fam)) + "_g" + std::to_string(g) + "_k" +
                                          format_double(k) + "_" + std::string(to_string(s)));
                    RunReport r = run_experiment(sc, {b}, dir, &config);
                    std::printf("%-10s %-34s H*=%.6g BIt=%llu\n", sc.name.c_str(), b.label().c_str(), r.final_H,
                                static_cast<unsigned long long>(r.rounds.empty() ? 0 : r.rounds.back().bit));
                    converged = converged && r.converged;
                    reports.push_back(std::move(r));
                }
        const ComparisonTable table = compare_runs(reports);
        write_file_atomic(out / sc.name / "comparison.csv", table.to_csv());
        write_file_atomic(out / sc.name / "comparison.txt", table.to_text());
        std::cout << table.to_text();
        all.insert(all.end(), reports.begin(), reports.end());
    }
    if (fam == BoostFamily::NeighborBoost)
        write_file_atomic(out / "neighbor_table.csv", neighbor_table_csv(neighbor_table(all)));
    return converged ? 0 : kExitNoConvergence;
}

int cmd_gradcheck(const std::string& scenario_file, int samples, std::uint64_t seed, double tol) {
    const Scenario sc = load_scenario(scenario_file);
    std::mt19937_64 rng(seed);
    const double step = 1e-4 * sc.space.diameter();
    int failures = 0;
    std::printf("sample node  analytic_x  analytic_y  fd_x  fd_y  rel_error\n");
    for (int s = 0; s < samples; ++s) {
        const Fleet fleet = oracle::random_placement(sc.space, sc.fleet, rng, 0.5);
        const std::size_t i = static_cast<std::size_t>(rng() % fleet.size());
        const auto c = oracle::check_gradient(sc.space, fleet, sc.density, i, step, tol, sc.defaults.gradient);
        std::printf("%d %zu %.8g %.8g %.8g %.8g %.3e %s\n", s, i, c.analytic.x, c.analytic.y, c.fd.x, c.fd.y,
                    c.error, c.pass ? "ok" : "FAIL");
        if (!c.pass) ++failures;
    }
    std::printf("%d/%d within %.3g\n", samples - failures, samples, tol);
    return failures == 0 ? 0 : kExitFail;
}

int cmd_render(const fs::path& csv, fs::path out) {
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open " + csv.string());
    const HeatmapImage image = read_heatmap_csv(in);
    if (out.empty()) out = fs::path(csv).replace_extension(".pgm");
    std::ostringstream pgm;
    write_pgm(pgm, image);
    write_file_atomic(out, pgm.str());
    std::printf("%s (%zux%zu)\n", out.string().c_str(), image.nx, image.ny);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coverage control with boosting functions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for gradient evaluation (0: hardware)");

    std::string scenario, trigger;
    BoostArgs boost;
    int rounds = 1;
    std::string out;
    auto* run = app.add_subcommand("run", "Plain ascent followed by boosting rounds");
    run->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--boost", boost.family, "none|p|neighbor|phi|random");
    run->add_option("--gamma", boost.gamma, "Boost exponent (family default when omitted)");
    run->add_option("--k", boost.k, "Boost gain (family default when omitted)");
    run->add_option("--kj-scheme", boost.kj_scheme, "Neighbor gains: los|closest");
    run->add_option("--amplitude", boost.amplitude, "Random perturbation amplitude");
    run->add_option("--rounds", rounds, "Boosting rounds")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", boost.seed, "Seed for random perturbation");
    run->add_option("--trigger", trigger, "global|self (scenario default when omitted)");
    run->add_option("--out", out, "Output directory")->required();

    std::vector<std::string> sweep_scenarios;
    std::string sweep_family = "neighbor", gammas = "1,2,4", ks = "100,300,500,1000", schemes = "los,closest";
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Grid over gamma and k, with comparison tables");
    sweep->add_option("--scenario", sweep_scenarios, "Scenario JSON files")->required()->check(CLI::ExistingFile);
    sweep->add_option("--boost", sweep_family, "p|neighbor|phi");
    sweep->add_option("--gammas", gammas, "Comma-separated gamma values");
    sweep->add_option("--ks", ks, "Comma-separated k values");
    sweep->add_option("--kj-schemes", schemes, "Comma-separated k_j schemes (neighbor boost only)");
    sweep->add_option("--out", sweep_out, "Output directory")->required();

    std::string gc_scenario;
    int samples = 20;
    std::uint64_t gc_seed = 1;
    double tol = 0.02;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gradcheck->add_option("--scenario", gc_scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    gradcheck->add_option("--samples", samples, "Random placements")->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", gc_seed, "Placement seed");
    gradcheck->add_option("--tol", tol, "Relative tolerance");

    std::string heatmap, render_out;
    auto* render = app.add_subcommand("render", "Convert a heatmap CSV to PGM");
    render->add_option("--heatmap", heatmap, "Heatmap CSV")->required()->check(CLI::ExistingFile);
    render->add_option("--out", render_out, "PGM file (defaults to the CSV name with .pgm)");

    CLI11_PARSE(app, argc, argv);
    if (threads != 0) set_default_threads(threads);

    try {
        if (*run) return cmd_run(scenario, boost, rounds, trigger, out);
        if (*sweep) return cmd_sweep(sweep_scenarios, sweep_family, gammas, ks, schemes, sweep_out);
        if (*gradcheck) return cmd_gradcheck(gc_scenario, samples, gc_seed, tol);
        if (*render) return cmd_render(heatmap, render_out);
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const GeometryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return 0;
}
