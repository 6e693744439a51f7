#pragma once
// Boosting families: weight transforms applied to the interior weight w1 once
// the plain gradient has reached an equilibrium, plus the random-perturbation
// baseline. The boundary weight w2 is never transformed.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "coverage/geom.hpp"
#include "coverage/sense.hpp"

namespace coverage {

enum class BoostFamily { None, PBoost, NeighborBoost, PhiBoost, RandomPerturb };
enum class KjScheme { LineOfSight, Closest };

std::string_view to_string(BoostFamily f);
std::string_view to_string(KjScheme s);
/// Accepts "none", "p", "neighbor", "phi", "random" and the long forms
/// "p_boost", "neighbor_boost", "phi_boost", "random_perturb".
BoostFamily parse_family(std::string_view text);
KjScheme parse_kj_scheme(std::string_view text);

struct BoostSpec {
    BoostFamily family = BoostFamily::None;
    double k = 1.0;
    int gamma = 1;
    KjScheme kj_scheme = KjScheme::Closest;
    double amplitude = 0.0;
    std::uint64_t seed = 0;

    static BoostSpec none() { return {}; }
    static BoostSpec p_boost(double k, int gamma) { return {BoostFamily::PBoost, k, gamma}; }
    static BoostSpec phi_boost(double k, int gamma) { return {BoostFamily::PhiBoost, k, gamma}; }
    static BoostSpec neighbor_boost(double k, int gamma, KjScheme scheme) {
        return {BoostFamily::NeighborBoost, k, gamma, scheme};
    }
    static BoostSpec random_perturb(double amplitude, std::uint64_t seed) {
        BoostSpec b;
        b.family = BoostFamily::RandomPerturb;
        b.amplitude = amplitude;
        b.seed = seed;
        return b;
    }

    /// Rejects k < 0, gamma < 1 for the three families, negative amplitude.
    void validate() const;
    /// Short human-readable description, e.g. "phi(k=1000,gamma=2)".
    std::string label() const;
    bool operator==(const BoostSpec&) const = default;
};

/// Family defaults taken from the best-performing settings reported for each family.
BoostSpec default_boost(BoostFamily family);

inline constexpr double kPBoostFloor = 1e-3;

/// k * max(P, 1e-3)^(-gamma).
double p_boost_alpha(double P, double k, int gamma);

/// k * Phi^gamma.
double phi_boost_alpha(double phi, double k, int gamma);

struct NeighborGain {
    std::size_t node = 0;
    double gain = 0.0;
    bool operator==(const NeighborGain&) const = default;
};

/// Gains k_j over the neighbor set of i, in neighbor_set order.
std::vector<NeighborGain> neighbor_gains(const MissionSpace& space, const Fleet& fleet, std::size_t i, double k,
                                         KjScheme scheme);

/// Sum over neighbors of k_j / |s_j - s_i|^(gamma+1) * (s_i - s_j): a push of
/// magnitude k_j / d^gamma away from each neighbor. Distances below
/// `min_dist` are clamped.
Point2 neighbor_boost_vector(const Fleet& fleet, std::size_t i, const std::vector<NeighborGain>& gains, int gamma,
                             double min_dist);

/// Deterministic stream keyed by (seed, node, iteration).
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t node, std::uint64_t iteration);
    /// Uniform draw on [-amplitude, amplitude].
    double symmetric(double amplitude);

private:
    std::mt19937_64 engine_;
};

/// (xi_x, xi_y), independent and uniform on [-amplitude, amplitude].
Point2 random_perturbation(RandomStream& rng, double amplitude);

}  // namespace coverage
