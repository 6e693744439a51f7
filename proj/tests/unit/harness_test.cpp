#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coverage/harness.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace coverage;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "name": "tiny",
  "mission": {"outer": [[0,0],[20,0],[20,20],[0,20]]},
  "sensors": {"delta": 5, "p0": 0.9, "lambda": 0.1},
  "nodes": [{"position": [3, 3]}]
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioError::Kind error_kind(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.kind();
    }
    FAIL("document accepted: " << text);
    return ScenarioError::Kind::Invalid;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("coverage_harness_test_" + name);
    fs::remove_all(dir);
    return dir;
}

const std::vector<std::string> kBundled = {"general", "room", "maze", "narrow"};

Scenario bundled(const std::string& name) { return load_scenario(fs::path(COVERAGE_SCENARIO_DIR) / (name + ".json")); }

RunReport fake_report(const std::string& scenario, BoostSpec b, double H, std::uint64_t bit) {
    RunReport r;
    r.scenario = scenario;
    r.schedule = {b};
    RoundSummary s;
    s.boost = b;
    s.bit = bit;
    s.H = H;
    r.rounds = {s};
    r.final_H = H;
    return r;
}

}  // namespace

TEST_CASE("minimal scenario") {
    const Scenario sc = parse_scenario(kMinimal);
    CHECK(sc.name == "tiny");
    REQUIRE(sc.fleet.size() == 1);
    CHECK(sc.fleet.nodes[0].params == SensorParams{5, 0.9, 0.1});
    CHECK(sc.density == DensityField::uniform(1.0));
    CHECK(sc.defaults == OptimizerConfig{});
}

TEST_CASE("scenario errors") {
    CHECK(error_kind("{\"name\": ") == ScenarioError::Kind::Malformed);
    CHECK(error_kind("[1, 2]") == ScenarioError::Kind::Malformed);
    CHECK(error_kind(R"({"name": "x", "mission": {"outer": [[0,0],[1,0],[1,1],[0,1]]}})") ==
          ScenarioError::Kind::Malformed);

    try {
        parse_scenario(R"({"name": "x", "mission": {"outer": [[0,0],[2,2],[2,0],[0,2]]},
                           "nodes": [{"position": [1, 0.5]}]})");
        FAIL("self-intersecting outer accepted");
    } catch (const ScenarioError& e) {
        CHECK(e.kind() == ScenarioError::Kind::SelfIntersection);
        CHECK(e.location() == "/mission/outer");
        CHECK(std::string(e.what()).find("edges 0 and 2") != std::string::npos);
    }

    try {
        parse_scenario(R"({"name": "x",
                           "mission": {"outer": [[0,0],[10,0],[10,10],[0,10]], "obstacles": [[[4,4],[6,4],[6,6],[4,6]]]},
                           "sensors": {"delta": 2, "p0": 0.9, "lambda": 0.1},
                           "nodes": [{"position": [1, 1]}, {"position": [5, 5]}]})");
        FAIL("node inside an obstacle accepted");
    } catch (const ScenarioError& e) {
        CHECK(e.kind() == ScenarioError::Kind::InfeasibleStart);
        CHECK(e.location() == "/nodes/1");
    }

    try {
        parse_scenario("{\n  \"name\": \"x\",\n  oops\n}");
        FAIL("bad JSON accepted");
    } catch (const ScenarioError& e) {
        CHECK(e.location().rfind("line 3", 0) == 0);
    }

    CHECK(error_kind(R"({"name": "x", "mission": {"outer": [[0,0],[10,0],[10,10],[0,10]]},
                         "sensors": {"delta": -1, "p0": 0.9, "lambda": 0.1}, "nodes": [{"position": [1, 1]}]})") ==
          ScenarioError::Kind::Invalid);
}

TEST_CASE("bundled scenarios") {
    for (const auto& name : kBundled) {
        CAPTURE(name);
        const Scenario sc = bundled(name);
        CHECK(sc.name == name);
        CHECK(sc.fleet.size() == (name == "narrow" ? 2u : 10u));
        CHECK(sc.fleet.homogeneous());
        CHECK(sc.space.bbox().width() == 50.0);
        CHECK(sc.space.bbox().height() == 50.0);
        CHECK(parse_scenario(serialize_scenario(sc)) == sc);
    }
}

TEST_CASE("every bundled scenario reaches a plain equilibrium") {
    for (const auto& name : kBundled) {
        CAPTURE(name);
        const Scenario sc = bundled(name);
        const auto grid = QuadratureGrid::with_spacing(sc.space, default_spacing(sc.fleet));
        const auto st = boosting_process(sc.space, sc.fleet, sc.density, grid, sc.defaults, {});
        CHECK(st.converged);
        for (const auto& p : st.positions) CHECK(contains(sc.space, p));
        CHECK(st.initial_value > objective_H(sc.space, sc.fleet, sc.density, grid));
    }
}

TEST_CASE("run_experiment outputs") {
    const Scenario sc = parse_scenario(kMinimal);
    const fs::path dir = scratch_dir("outputs");
    const RunReport plain = run_experiment(sc, {}, dir);
    CHECK(plain.final_H == plain.initial_H);
    CHECK(plain.rounds.empty());
    for (const char* f : {"history.csv", "positions.csv", "heatmap_initial.pgm", "heatmap_initial.csv",
                          "heatmap_final.pgm", "heatmap_final.csv", "summary.json"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    CHECK(slurp(dir / "history.csv").rfind("iter,phase,round,H,max_grad_norm\n", 0) == 0);
    CHECK(slurp(dir / "positions.csv").rfind("iter,node,x,y\n", 0) == 0);

    const RunReport back = report_from_json(slurp(dir / "summary.json"));
    CHECK(back.final_H == plain.final_H);
    CHECK(back.scenario == "tiny");
    CHECK(back.tool_version == kToolVersion);

    const std::vector<BoostSpec> schedule{BoostSpec::random_perturb(0.05, 11), BoostSpec::p_boost(100, 2)};
    const fs::path d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    const RunReport r1 = run_experiment(sc, schedule, d1);
    const RunReport r2 = run_experiment(sc, schedule, d2);
    CHECK(slurp(d1 / "history.csv") == slurp(d2 / "history.csv"));
    CHECK(slurp(d1 / "positions.csv") == slurp(d2 / "positions.csv"));
    CHECK(r1.final_H >= r1.initial_H - 1e-9);
    CHECK(r1.seeds == std::vector<std::uint64_t>{11});

    const RunReport j = report_from_json(report_to_json(r1));
    CHECK(j.schedule == r1.schedule);
    CHECK(j.rounds.size() == r1.rounds.size());
    CHECK(j.final_positions == r1.final_positions);
    fs::remove_all(dir);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("compare_runs") {
    const auto one = compare_runs({fake_report("room", BoostSpec::phi_boost(1000, 2), 10.0, 7)});
    CHECK(one.rows.size() == 1);
    CHECK(one.to_csv() == "family,gamma,k,scheme,BIt,H\nphi,2,1000,-,7,10\n");

    const auto t = compare_runs({fake_report("room", BoostSpec::p_boost(300, 2), 5.0, 1),
                                 fake_report("room", BoostSpec::p_boost(100, 2), 5.0, 2),
                                 fake_report("room", BoostSpec::neighbor_boost(100, 4, KjScheme::LineOfSight), 5.0, 3),
                                 fake_report("room", BoostSpec::phi_boost(100, 1), 6.0, 4)});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].family == "phi");
    CHECK(t.rows[1].family == "neighbor");
    CHECK(t.rows[1].scheme == "los");
    CHECK(t.rows[2].k == 100.0);
    CHECK(t.rows[3].k == 300.0);
    CHECK(t.to_text().find("room") != std::string::npos);

    CHECK_THROWS_AS(compare_runs({fake_report("room", BoostSpec::none(), 1, 0), fake_report("maze", BoostSpec::none(), 1, 0)}),
                    std::invalid_argument);
}

TEST_CASE("neighbor table") {
    std::vector<RunReport> reports;
    for (int gamma : {1, 2})
        for (double k : {100.0, 300.0})
            for (auto s : {KjScheme::LineOfSight, KjScheme::Closest})
                reports.push_back(fake_report("maze", BoostSpec::neighbor_boost(k, gamma, s),
                                              gamma * 1000 + k + (s == KjScheme::Closest ? 1 : 0), 1));
    reports.push_back(fake_report("maze", BoostSpec::phi_boost(100, 1), 1, 1));
    const auto rows = neighbor_table(reports);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].gamma == 1);
    CHECK(rows[0].k == 100.0);
    CHECK(rows[0].H_los == 1100.0);
    CHECK(rows[0].H_closest == 1101.0);
    const std::string csv = neighbor_table_csv(rows);
    CHECK(csv.rfind("gamma,k,scenario,H_los,H_closest\n", 0) == 0);
    CHECK(csv.find("2,300,maze,2300,2301\n") != std::string::npos);
}

TEST_CASE("format_double and atomic writes") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    const fs::path dir = scratch_dir("atomic");
    write_file_atomic(dir / "a" / "b.txt", "hello");
    CHECK(slurp(dir / "a" / "b.txt") == "hello");
    write_file_atomic(dir / "a" / "b.txt", "again");
    CHECK(slurp(dir / "a" / "b.txt") == "again");
    fs::remove_all(dir);
}
