#include "coverage/boost.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace coverage {

std::string_view to_string(BoostFamily f) {
    switch (f) {
        case BoostFamily::None: return "none";
        case BoostFamily::PBoost: return "p";
        case BoostFamily::NeighborBoost: return "neighbor";
        case BoostFamily::PhiBoost: return "phi";
        case BoostFamily::RandomPerturb: return "random";
    }
    return "none";
}

std::string_view to_string(KjScheme s) { return s == KjScheme::LineOfSight ? "los" : "closest"; }

BoostFamily parse_family(std::string_view t) {
    if (t == "none") return BoostFamily::None;
    if (t == "p" || t == "p_boost") return BoostFamily::PBoost;
    if (t == "neighbor" || t == "neighbor_boost") return BoostFamily::NeighborBoost;
    if (t == "phi" || t == "phi_boost") return BoostFamily::PhiBoost;
    if (t == "random" || t == "random_perturb") return BoostFamily::RandomPerturb;
    throw std::invalid_argument("unknown boosting family '" + std::string(t) + "'");
}

KjScheme parse_kj_scheme(std::string_view t) {
    if (t == "los" || t == "line_of_sight") return KjScheme::LineOfSight;
    if (t == "closest") return KjScheme::Closest;
    throw std::invalid_argument("unknown k_j scheme '" + std::string(t) + "'");
}

void BoostSpec::validate() const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("boost gain k must be finite and >= 0");
    const bool weighted = family == BoostFamily::PBoost || family == BoostFamily::PhiBoost ||
                          family == BoostFamily::NeighborBoost;
    if (weighted && gamma < 1) throw std::invalid_argument("boost exponent gamma must be >= 1");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("perturbation amplitude must be finite and >= 0");
}

std::string BoostSpec::label() const {
    std::ostringstream os;
    os << to_string(family);
    switch (family) {
        case BoostFamily::None: break;
        case BoostFamily::PBoost:
        case BoostFamily::PhiBoost: os << "(k=" << k << ",gamma=" << gamma << ')'; break;
        case BoostFamily::NeighborBoost:
            os << "(k=" << k << ",gamma=" << gamma << ",kj=" << to_string(kj_scheme) << ')';
            break;
        case BoostFamily::RandomPerturb: os << "(amplitude=" << amplitude << ",seed=" << seed << ')'; break;
    }
    return os.str();
}

BoostSpec default_boost(BoostFamily family) {
    switch (family) {
        case BoostFamily::None: return BoostSpec::none();
        case BoostFamily::PBoost: return BoostSpec::p_boost(100.0, 4);
        case BoostFamily::NeighborBoost: return BoostSpec::neighbor_boost(300.0, 1, KjScheme::Closest);
        case BoostFamily::PhiBoost: return BoostSpec::phi_boost(1000.0, 2);
        case BoostFamily::RandomPerturb: return BoostSpec::random_perturb(1.0, 0);
    }
    return BoostSpec::none();
}

double p_boost_alpha(double P, double k, int gamma) {
    return k * std::pow(std::max(P, kPBoostFloor), -static_cast<double>(gamma));
}

double phi_boost_alpha(double phi, double k, int gamma) { return k * std::pow(phi, static_cast<double>(gamma)); }

std::vector<NeighborGain> neighbor_gains(const MissionSpace& space, const Fleet& fleet, std::size_t i, double k,
                                         KjScheme scheme) {
    const auto nb = neighbor_set(fleet, i);
    std::vector<NeighborGain> out;
    out.reserve(nb.size());
    const Node& me = fleet.nodes[i];
    if (scheme == KjScheme::LineOfSight) {
        for (std::size_t j : nb) {
            const Point2 sj = fleet.nodes[j].position;
            const bool seen = distance(sj, me.position) <= me.params.delta && segment_clear(space, me.position, sj);
            out.push_back({j, seen ? k : 0.0});
        }
        return out;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = nb.size();
    for (std::size_t q = 0; q < nb.size(); ++q) {
        const double d = distance(fleet.nodes[nb[q]].position, me.position);
        if (d < best) {
            best = d;
            best_pos = q;
        }
    }
    for (std::size_t q = 0; q < nb.size(); ++q) out.push_back({nb[q], q == best_pos ? k : 0.0});
    return out;
}

Point2 neighbor_boost_vector(const Fleet& fleet, std::size_t i, const std::vector<NeighborGain>& gains, int gamma,
                             double min_dist) {
    Point2 acc;
    const Point2 si = fleet.nodes[i].position;
    for (const auto& g : gains) {
        if (g.gain == 0.0) continue;
        const Point2 away = si - fleet.nodes[g.node].position;
        double d = norm(away);
        Point2 dir;
        if (d > 0.0) {
            dir = away * (1.0 / d);
        } else {
            // Coincident nodes: separate along a fixed index-dependent axis.
            dir = i < g.node ? Point2{-1.0, 0.0} : Point2{1.0, 0.0};
        }
        d = std::max(d, min_dist);
        acc += dir * (g.gain / std::pow(d, static_cast<double>(gamma)));
    }
    return acc;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t node, std::uint64_t iteration) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(node), static_cast<std::uint32_t>(node >> 32),
                      static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32)};
    engine_.seed(seq);
}

double RandomStream::symmetric(double amplitude) {
    if (amplitude == 0.0) return 0.0;
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    return dist(engine_);
}

Point2 random_perturbation(RandomStream& rng, double amplitude) {
    const double x = rng.symmetric(amplitude);
    const double y = rng.symmetric(amplitude);
    return {x, y};
}

}  // namespace coverage
