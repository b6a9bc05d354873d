#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "bstsim/rng.hpp"
#include "bstsim/stats.hpp"

namespace bstsim {

/// Birth times of the Yule population.
///
/// Indexing: T_1 = 0 and, with k - 1 particles alive, the k-th birth comes
/// after an Exp(k - 1) wait, so T_k = T_{k-1} + V_k / (k - 1) with V_k iid
/// Exp(1) and E[T_n] = sum_{j=1}^{n-1} 1/j.
struct BirthTimes {
    std::vector<double> times;  // times[k - 1] = T_k
    double zeta_proxy = 0.0;    // T_n - log n

    /// T_n - sum_{j=1}^{n-1} 1/j, the centred martingale.
    double centred() const;
};

BirthTimes birth_times(Xoshiro256& gen, std::uint64_t n);
BirthTimes birth_times(RandomStream stream, std::uint64_t n);

/// H_{n-1} - log n: the mean of T_n - log n.
double expected_zeta_proxy(std::uint64_t n);

/// Number of leading increments V_j / j drawn one by one in zeta_samples.
inline constexpr std::uint64_t kZetaExplicitTerms = 4096;

/// m realisations of T_{n_stop} - log(n_stop).
///
/// The first kZetaExplicitTerms increments V_j / j are drawn explicitly. The
/// remaining sum_{j=J}^{n-1} V_j / j has the law of the J-th largest of
/// n - 1 iid Exp(1) variables (Renyi's representation of exponential order
/// statistics), i.e. -log B with B ~ Beta(J, n - J), and is drawn in one step.
/// Requires n_stop >= 100 and m >= 1.
std::vector<double> zeta_samples(RandomStream stream, std::uint64_t n_stop, std::uint64_t m);

/// Particle positions of the Yule branching random walk at time t.
struct ParticleSet {
    std::vector<std::int64_t> positions;
    double t = 0.0;

    std::size_t size() const noexcept { return positions.size(); }
    std::int64_t min_position() const;  // M(t)
    std::int64_t max_position() const;  // S(t)
    /// Number of particles at the minimal position.
    std::size_t frontier_size() const;
};

struct YuleOptions {
    std::size_t particle_cap = 10'000'000;
    /// +1 for the reflected model where children step up instead of down.
    std::int64_t displacement = -1;
    /// Called after every branching event with the index of the particle that
    /// branched and the post-event state.
    std::function<void(std::size_t, const ParticleSet&)> on_event;
};

/// Event-driven simulation up to `horizon`: with k particles alive the next
/// event comes after Exp(k); a uniformly chosen particle (index i) is
/// replaced in place by one child and the other child is appended.
/// Throws ResourceError when the population would pass the cap.
ParticleSet simulate_yule(Xoshiro256& gen, double horizon, const YuleOptions& options = {});
ParticleSet simulate_yule(RandomStream stream, double horizon, const YuleOptions& options = {});

/// Monte Carlo mean of sum_{u in N(1)} exp(-theta X_u(1)) with its standard
/// error. theta must lie in [-2, 1.5] and trials >= 1000.
Estimate psi_mc_estimate(double theta, std::uint64_t trials, RandomStream stream);

struct PsiReport {
    double theta = 0.0;
    Estimate mc;
    double closed_form = 0.0;
    double z_score = 0.0;
};

PsiReport psi_report(double theta, std::uint64_t trials, RandomStream stream);
nlohmann::json to_json(const PsiReport& report);

} // namespace bstsim
