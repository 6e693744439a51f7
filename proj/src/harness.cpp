#include "coverage/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "coverage/objective.hpp"

namespace coverage {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
    throw ScenarioError(ScenarioError::Kind::Malformed, where, what);
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) malformed(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) malformed(where, "missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) malformed(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) malformed(where, "number is not finite");
    return v;
}

template <class T>
T integer(const json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) malformed(where, "expected an integer");
    return j.get<T>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, where + "/" + key);
}

Point2 point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) malformed(where, "expected a point [x, y]");
    return {number(j[0], where + "/0"), number(j[1], where + "/1")};
}

std::vector<Point2> loop(const json& j, const std::string& where) {
    if (!j.is_array()) malformed(where, "expected an array of points");
    std::vector<Point2> pts;
    for (std::size_t k = 0; k < j.size(); ++k) pts.push_back(point(j[k], where + "/" + std::to_string(k)));
    return pts;
}

Polygon polygon(const json& j, const std::string& where) {
    auto pts = loop(j, where);
    try {
        return Polygon(std::move(pts));
    } catch (const GeometryError& e) {
        if (e.kind() == GeometryError::Kind::SelfIntersection) {
            const auto [a, b] = e.items();
            throw ScenarioError(ScenarioError::Kind::SelfIntersection, where,
                                "edges " + std::to_string(a) + " and " + std::to_string(b) + " intersect");
        }
        throw ScenarioError(ScenarioError::Kind::Invalid, where, e.what());
    }
}

SensorParams sensor(const json& j, const SensorParams& fallback, const std::string& where) {
    SensorParams p = fallback;
    p.delta = number_or(j, "delta", p.delta, where);
    p.p0 = number_or(j, "p0", p.p0, where);
    p.lambda = number_or(j, "lambda", p.lambda, where);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(ScenarioError::Kind::Invalid, where, e.what());
    }
    return p;
}

json point_json(Point2 p) { return json::array({p.x, p.y}); }

json loop_json(const Polygon& poly) {
    json a = json::array();
    for (const auto& v : poly.vertices()) a.push_back(point_json(v));
    return a;
}

void parse_optimizer(const json& j, OptimizerConfig& c, const std::string& where) {
    if (!j.is_object()) malformed(where, "expected an object");
    c.step = number_or(j, "step", c.step, where);
    c.max_step_len = number_or(j, "max_step_len", c.max_step_len, where);
    c.eps_grad = number_or(j, "eps_grad", c.eps_grad, where);
    if (j.contains("patience")) c.patience = integer<int>(j["patience"], where + "/patience");
    if (j.contains("max_iters_per_phase"))
        c.max_iters_per_phase = integer<int>(j["max_iters_per_phase"], where + "/max_iters_per_phase");
    if (j.contains("trigger")) {
        if (!j["trigger"].is_string()) malformed(where + "/trigger", "expected a string");
        try {
            c.trigger = parse_trigger(j["trigger"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(ScenarioError::Kind::Invalid, where + "/trigger", e.what());
        }
    }
    if (j.contains("adaptive_step")) {
        if (!j["adaptive_step"].is_boolean()) malformed(where + "/adaptive_step", "expected a boolean");
        c.adaptive_step = j["adaptive_step"].get<bool>();
    }
    if (j.contains("gradient")) {
        const json& g = j["gradient"];
        const std::string gw = where + "/gradient";
        if (!g.is_object()) malformed(gw, "expected an object");
        auto& o = c.gradient;
        if (g.contains("angular_res")) o.angular_res = integer<int>(g["angular_res"], gw + "/angular_res");
        if (g.contains("angular_points")) o.angular_points = integer<int>(g["angular_points"], gw + "/angular_points");
        if (g.contains("radial_points")) o.radial_points = integer<int>(g["radial_points"], gw + "/radial_points");
        if (g.contains("radial_splits")) o.radial_splits = integer<int>(g["radial_splits"], gw + "/radial_splits");
        if (g.contains("line_samples")) o.line_samples = integer<int>(g["line_samples"], gw + "/line_samples");
        if (g.contains("include_arc")) {
            if (!g["include_arc"].is_boolean()) malformed(gw + "/include_arc", "expected a boolean");
            o.include_arc = g["include_arc"].get<bool>();
        }
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(ScenarioError::Kind::Invalid, where, e.what());
    }
}

json optimizer_json(const OptimizerConfig& c) {
    const auto& o = c.gradient;
    return json{{"step", c.step},
                {"max_step_len", c.max_step_len},
                {"eps_grad", c.eps_grad},
                {"patience", c.patience},
                {"max_iters_per_phase", c.max_iters_per_phase},
                {"trigger", std::string(to_string(c.trigger))},
                {"adaptive_step", c.adaptive_step},
                {"gradient",
                 {{"angular_res", o.angular_res},
                  {"angular_points", o.angular_points},
                  {"radial_points", o.radial_points},
                  {"radial_splits", o.radial_splits},
                  {"line_samples", o.line_samples},
                  {"include_arc", o.include_arc}}}};
}

DensityField parse_density(const json& j, const std::string& where) {
    const json& kind = field(j, "kind", where);
    if (!kind.is_string()) malformed(where + "/kind", "expected a string");
    try {
        if (kind == "uniform") return DensityField::uniform(number_or(j, "value", 1.0, where));
        if (kind == "grid") {
            DensityField::Grid g;
            g.origin = point(field(j, "origin", where), where + "/origin");
            g.spacing = number(field(j, "spacing", where), where + "/spacing");
            g.nx = integer<std::size_t>(field(j, "nx", where), where + "/nx");
            g.ny = integer<std::size_t>(field(j, "ny", where), where + "/ny");
            const json& vals = field(j, "values", where);
            if (!vals.is_array()) malformed(where + "/values", "expected an array");
            for (std::size_t k = 0; k < vals.size(); ++k)
                g.values.push_back(number(vals[k], where + "/values/" + std::to_string(k)));
            return DensityField::grid(std::move(g));
        }
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(ScenarioError::Kind::Invalid, where, e.what());
    }
    throw ScenarioError(ScenarioError::Kind::Invalid, where + "/kind", "unknown density kind");
}

json density_json(const DensityField& d) {
    if (const auto* u = std::get_if<DensityField::Uniform>(&d.kind())) return json{{"kind", "uniform"}, {"value", u->value}};
    const auto& g = std::get<DensityField::Grid>(d.kind());
    return json{{"kind", "grid"},     {"origin", point_json(g.origin)}, {"spacing", g.spacing},
                {"nx", g.nx},         {"ny", g.ny},                     {"values", g.values}};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line/column location.
        const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < at; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioError(ScenarioError::Kind::Malformed,
                            "line " + std::to_string(line) + ", column " + std::to_string(col),
                            "invalid JSON");
    }
    if (!doc.is_object()) malformed("/", "scenario must be a JSON object");

    Scenario sc;
    const json& name = field(doc, "name", "");
    if (!name.is_string()) malformed("/name", "expected a string");
    sc.name = name.get<std::string>();

    const json& mission = field(doc, "mission", "");
    Polygon outer = polygon(field(mission, "outer", "/mission"), "/mission/outer");
    std::vector<Polygon> obstacles;
    if (mission.contains("obstacles")) {
        const json& obs = mission["obstacles"];
        if (!obs.is_array()) malformed("/mission/obstacles", "expected an array");
        for (std::size_t k = 0; k < obs.size(); ++k)
            obstacles.push_back(polygon(obs[k], "/mission/obstacles/" + std::to_string(k)));
    }
    try {
        sc.space = MissionSpace(std::move(outer), std::move(obstacles));
    } catch (const GeometryError& e) {
        throw ScenarioError(ScenarioError::Kind::Invalid, "/mission", e.what());
    }

    sc.density = doc.contains("density") ? parse_density(doc["density"], "/density") : DensityField::uniform(1.0);

    SensorParams shared;
    if (doc.contains("sensors")) shared = sensor(doc["sensors"], shared, "/sensors");
    const json& nodes = field(doc, "nodes", "");
    if (!nodes.is_array() || nodes.empty()) malformed("/nodes", "expected a non-empty array");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string where = "/nodes/" + std::to_string(k);
        Node n;
        n.position = point(field(nodes[k], "position", where), where + "/position");
        n.params = sensor(nodes[k], shared, where);
        if (!contains(sc.space, n.position)) {
            std::ostringstream msg;
            msg << "node " << k << " at (" << n.position.x << ", " << n.position.y
                << ") lies outside the feasible region";
            throw ScenarioError(ScenarioError::Kind::InfeasibleStart, where, msg.str());
        }
        sc.fleet.nodes.push_back(n);
    }

    if (doc.contains("optimizer")) parse_optimizer(doc["optimizer"], sc.defaults, "/optimizer");
    return sc;
}

std::string serialize_scenario(const Scenario& sc) {
    json obstacles = json::array();
    for (const auto& ob : sc.space.obstacles()) obstacles.push_back(loop_json(ob));
    json nodes = json::array();
    for (const auto& n : sc.fleet.nodes)
        nodes.push_back({{"position", point_json(n.position)},
                         {"delta", n.params.delta},
                         {"p0", n.params.p0},
                         {"lambda", n.params.lambda}});
    json doc{{"name", sc.name},
             {"mission", {{"outer", loop_json(sc.space.outer())}, {"obstacles", obstacles}}},
             {"density", density_json(sc.density)},
             {"nodes", nodes},
             {"optimizer", optimizer_json(sc.defaults)}};
    return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open scenario file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& file, std::string_view contents) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, file);
}

void write_history_csv(std::ostream& out, const ProcessState& state) {
    out << "iter,phase,round,H,max_grad_norm\n";
    for (const auto& r : state.history)
        out << r.iter << ',' << to_string(r.phase) << ',' << r.round << ',' << format_double(r.H) << ','
            << format_double(r.max_grad_norm) << '\n';
}

void write_positions_csv(std::ostream& out, const ProcessState& state) {
    out << "iter,node,x,y\n";
    for (const auto& r : state.history)
        for (std::size_t i = 0; i < r.positions.size(); ++i)
            out << r.iter << ',' << i << ',' << format_double(r.positions[i].x) << ','
                << format_double(r.positions[i].y) << '\n';
}

namespace {

json boost_json(const BoostSpec& b) {
    return json{{"family", std::string(to_string(b.family))},
                {"k", b.k},
                {"gamma", b.gamma},
                {"kj_scheme", std::string(to_string(b.kj_scheme))},
                {"amplitude", b.amplitude},
                {"seed", b.seed}};
}

BoostSpec boost_from_json(const json& j) {
    BoostSpec b;
    b.family = parse_family(j.at("family").get<std::string>());
    b.k = j.at("k").get<double>();
    b.gamma = j.at("gamma").get<int>();
    b.kj_scheme = parse_kj_scheme(j.at("kj_scheme").get<std::string>());
    b.amplitude = j.at("amplitude").get<double>();
    b.seed = j.at("seed").get<std::uint64_t>();
    return b;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
    json schedule = json::array();
    for (const auto& b : r.schedule) schedule.push_back(boost_json(b));
    json rounds = json::array();
    for (const auto& rs : r.rounds)
        rounds.push_back({{"round", rs.round},
                          {"boost", boost_json(rs.boost)},
                          {"BIt", rs.bit},
                          {"H", rs.H},
                          {"improved", rs.improved},
                          {"converged", rs.converged}});
    json pos = json::array();
    for (const auto& p : r.final_positions) pos.push_back(point_json(p));
    json doc{{"scenario", r.scenario},
             {"schedule", schedule},
             {"trigger", std::string(to_string(r.trigger))},
             {"rounds", rounds},
             {"initial_H", r.initial_H},
             {"final_H", r.final_H},
             {"final_positions", pos},
             {"iterations", r.iterations},
             {"converged", r.converged},
             {"wall_seconds", r.wall_seconds},
             {"seeds", r.seeds},
             {"tool_version", r.tool_version},
             {"perturbation", r.perturbation}};
    return doc.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunReport r;
        r.scenario = j.at("scenario").get<std::string>();
        for (const auto& b : j.at("schedule")) r.schedule.push_back(boost_from_json(b));
        r.trigger = parse_trigger(j.at("trigger").get<std::string>());
        for (const auto& rs : j.at("rounds")) {
            RoundSummary s;
            s.round = rs.at("round").get<int>();
            s.boost = boost_from_json(rs.at("boost"));
            s.bit = rs.at("BIt").get<std::uint64_t>();
            s.H = rs.at("H").get<double>();
            s.improved = rs.at("improved").get<bool>();
            s.converged = rs.at("converged").get<bool>();
            r.rounds.push_back(s);
        }
        r.initial_H = j.at("initial_H").get<double>();
        r.final_H = j.at("final_H").get<double>();
        for (const auto& p : j.at("final_positions")) r.final_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        r.iterations = j.at("iterations").get<std::uint64_t>();
        r.converged = j.at("converged").get<bool>();
        r.wall_seconds = j.at("wall_seconds").get<double>();
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        r.tool_version = j.at("tool_version").get<std::string>();
        r.perturbation = j.value("perturbation", r.perturbation);
        return r;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed run report: ") + e.what());
    }
}

RunReport run_experiment(const Scenario& scenario, const std::vector<BoostSpec>& schedule,
                         const std::filesystem::path& out_dir, const OptimizerConfig* config,
                         const RunOptions& options) {
    for (const auto& b : schedule) b.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const OptimizerConfig cfg = config ? *config : scenario.defaults;
    const QuadratureGrid grid = QuadratureGrid::with_spacing(scenario.space, default_spacing(scenario.fleet));
    const ProcessState state =
        boosting_process(scenario.space, scenario.fleet, scenario.density, grid, cfg, schedule);

    RunReport rep;
    rep.scenario = scenario.name;
    rep.schedule = schedule;
    rep.trigger = cfg.trigger;
    for (const auto& rr : state.rounds)
        rep.rounds.push_back({rr.round, rr.boost, rr.bit, rr.H_equilibrium, rr.improved, rr.converged});
    rep.initial_H = state.initial_value;
    rep.final_H = state.best_value;
    rep.final_positions = state.best_positions;
    rep.iterations = state.iteration;
    rep.converged = state.converged;
    for (const auto& b : schedule)
        if (b.family == BoostFamily::RandomPerturb) rep.seeds.push_back(b.seed);

    if (options.write_files) {
        std::filesystem::create_directories(out_dir);
        std::ostringstream hist, pos;
        write_history_csv(hist, state);
        write_positions_csv(pos, state);
        write_file_atomic(out_dir / "history.csv", hist.str());
        write_file_atomic(out_dir / "positions.csv", pos.str());
        const QuadratureGrid hgrid =
            QuadratureGrid::with_shape(scenario.space, options.heatmap_resolution, options.heatmap_resolution);
        const std::pair<const char*, const std::vector<Point2>*> maps[] = {{"initial", &state.initial_positions},
                                                                          {"final", &state.best_positions}};
        for (const auto& [tag, positions] : maps) {
            const Heatmap hm = coverage_heatmap(scenario.space, scenario.fleet.with_positions(*positions), hgrid);
            std::ostringstream pgm, csv;
            write_pgm(pgm, hm);
            write_csv(csv, hm);
            write_file_atomic(out_dir / (std::string("heatmap_") + tag + ".pgm"), pgm.str());
            write_file_atomic(out_dir / (std::string("heatmap_") + tag + ".csv"), csv.str());
        }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.write_files) write_file_atomic(out_dir / "summary.json", report_to_json(rep));
    return rep;
}

ComparisonTable compare_runs(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("no reports to compare");
    ComparisonTable t;
    t.scenario = reports.front().scenario;
    for (const auto& r : reports) {
        if (r.scenario != t.scenario)
            throw std::invalid_argument("reports come from different scenarios: '" + t.scenario + "' and '" +
                                        r.scenario + "'");
        ComparisonRow row;
        const BoostSpec b = r.schedule.empty() ? BoostSpec::none() : r.schedule.back();
        row.family = std::string(to_string(b.family));
        row.gamma = b.gamma;
        row.k = b.k;
        row.scheme = b.family == BoostFamily::NeighborBoost ? std::string(to_string(b.kj_scheme)) : "-";
        for (const auto& rs : r.rounds) row.bit += rs.bit;
        row.H = r.final_H;
        t.rows.push_back(row);
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.H != b.H) return a.H > b.H;
        return std::tie(a.family, a.gamma, a.k) < std::tie(b.family, b.gamma, b.k);
    });
    return t;
}

std::string ComparisonTable::to_csv() const {
    std::ostringstream os;
    os << "family,gamma,k,scheme,BIt,H\n";
    for (const auto& r : rows)
        os << r.family << ',' << r.gamma << ',' << format_double(r.k) << ',' << r.scheme << ',' << r.bit << ','
           << format_double(r.H) << '\n';
    return os.str();
}

std::string ComparisonTable::to_text() const {
    std::ostringstream os;
    os << "scenario: " << scenario << '\n';
    os << std::left << std::setw(10) << "family" << std::right << std::setw(7) << "gamma" << std::setw(10) << "k"
       << std::setw(9) << "scheme" << std::setw(8) << "BIt" << std::setw(14) << "H*" << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(10) << r.family << std::right << std::setw(7) << r.gamma << std::setw(10)
           << format_double(r.k) << std::setw(9) << r.scheme << std::setw(8) << r.bit << std::setw(14) << std::fixed
           << std::setprecision(3) << r.H << '\n';
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

std::vector<NeighborTableRow> neighbor_table(const std::vector<RunReport>& reports) {
    std::map<std::tuple<std::string, int, double>, NeighborTableRow> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : reports) {
        if (r.schedule.empty() || r.schedule.back().family != BoostFamily::NeighborBoost) continue;
        const BoostSpec& b = r.schedule.back();
        auto key = std::make_tuple(r.scenario, b.gamma, b.k);
        auto [it, fresh] = rows.try_emplace(key, NeighborTableRow{b.gamma, b.k, r.scenario, nan, nan});
        (b.kj_scheme == KjScheme::LineOfSight ? it->second.H_los : it->second.H_closest) = r.final_H;
    }
    std::vector<NeighborTableRow> out;
    for (auto& [k, v] : rows) out.push_back(v);
    return out;
}

std::string neighbor_table_csv(const std::vector<NeighborTableRow>& rows) {
    std::ostringstream os;
    os << "gamma,k,scenario,H_los,H_closest\n";
    for (const auto& r : rows)
        os << r.gamma << ',' << format_double(r.k) << ',' << r.scenario << ','
           << (std::isnan(r.H_los) ? "" : format_double(r.H_los)) << ','
           << (std::isnan(r.H_closest) ? "" : format_double(r.H_closest)) << '\n';
    return os.str();
}

}  // namespace coverage
