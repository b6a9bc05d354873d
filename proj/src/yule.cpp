#include "bstsim/yule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/gamma_distribution.hpp>

#include "bstsim/constants.hpp"
#include "bstsim/errors.hpp"

namespace bstsim {

double BirthTimes::centred() const {
    double harmonic = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j) {
        harmonic += 1.0 / static_cast<double>(j);
    }
    return times.back() - harmonic;
}

BirthTimes birth_times(Xoshiro256& gen, std::uint64_t n) {
    if (n < 1) {
        throw ContractViolation("birth_times needs n >= 1");
    }
    BirthTimes out;
    out.times.reserve(n);
    out.times.push_back(0.0);
    double t = 0.0;
    for (std::uint64_t k = 2; k <= n; ++k) {
        t += exponential(gen) / static_cast<double>(k - 1);
        out.times.push_back(t);
    }
    out.zeta_proxy = t - std::log(static_cast<double>(n));
    return out;
}

BirthTimes birth_times(RandomStream stream, std::uint64_t n) {
    Xoshiro256 gen(stream);
    return birth_times(gen, n);
}

double expected_zeta_proxy(std::uint64_t n) {
    if (n < 1) {
        throw ContractViolation("expected_zeta_proxy needs n >= 1");
    }
    // sum in increasing magnitude for accuracy
    double harmonic = 0.0;
    for (std::uint64_t j = n - 1; j >= 1; --j) {
        harmonic += 1.0 / static_cast<double>(j);
    }
    return harmonic - std::log(static_cast<double>(n));
}

std::vector<double> zeta_samples(RandomStream stream, std::uint64_t n_stop, std::uint64_t m) {
    if (n_stop < 100) {
        throw ContractViolation("zeta_samples needs n_stop >= 100");
    }
    if (m < 1) {
        throw ContractViolation("zeta_samples needs m >= 1");
    }
    Xoshiro256 gen(stream);
    const std::uint64_t terms = n_stop - 1;  // V_j / j for j = 1..n_stop-1
    const std::uint64_t head = std::min(terms, kZetaExplicitTerms - 1);
    const std::uint64_t tail_start = head + 1;

    std::vector<double> inverse(head + 1, 0.0);
    for (std::uint64_t j = 1; j <= head; ++j) {
        inverse[j] = 1.0 / static_cast<double>(j);
    }
    const double log_n = std::log(static_cast<double>(n_stop));

    std::vector<double> samples;
    samples.reserve(m);
    for (std::uint64_t s = 0; s < m; ++s) {
        double t = 0.0;
        for (std::uint64_t j = head; j >= 1; --j) {
            t += exponential(gen) * inverse[j];
        }
        if (tail_start <= terms) {
            const auto shape_a = static_cast<double>(tail_start);
            const auto shape_b = static_cast<double>(terms - tail_start + 1);
            boost::random::gamma_distribution<double> ga(shape_a);
            boost::random::gamma_distribution<double> gb(shape_b);
            const double x = ga(gen);
            const double y = gb(gen);
            t += std::log1p(y / x);
        }
        samples.push_back(t - log_n);
    }
    return samples;
}

std::int64_t ParticleSet::min_position() const {
    if (positions.empty()) {
        throw ContractViolation("empty particle set");
    }
    return *std::min_element(positions.begin(), positions.end());
}

std::int64_t ParticleSet::max_position() const {
    if (positions.empty()) {
        throw ContractViolation("empty particle set");
    }
    return *std::max_element(positions.begin(), positions.end());
}

std::size_t ParticleSet::frontier_size() const {
    const std::int64_t m = min_position();
    return static_cast<std::size_t>(std::count(positions.begin(), positions.end(), m));
}

ParticleSet simulate_yule(Xoshiro256& gen, double horizon, const YuleOptions& options) {
    if (!(horizon >= 0.0)) {
        throw ContractViolation("horizon must be >= 0");
    }
    ParticleSet set;
    set.positions.push_back(0);
    double t = 0.0;
    for (;;) {
        const auto alive = set.positions.size();
        const double wait = exponential(gen, static_cast<double>(alive));
        if (t + wait > horizon) {
            break;
        }
        t += wait;
        if (alive + 1 > options.particle_cap) {
            throw ResourceError("Yule population exceeded the cap of " +
                                std::to_string(options.particle_cap) + " particles");
        }
        const std::size_t i = uniform_below(gen, alive);
        const std::int64_t child = set.positions[i] + options.displacement;
        set.positions[i] = child;
        set.positions.push_back(child);
        if (options.on_event) {
            set.t = t;
            options.on_event(i, set);
        }
    }
    set.t = horizon;
    return set;
}

ParticleSet simulate_yule(RandomStream stream, double horizon, const YuleOptions& options) {
    Xoshiro256 gen(stream);
    return simulate_yule(gen, horizon, options);
}

Estimate psi_mc_estimate(double theta, std::uint64_t trials, RandomStream stream) {
    if (!(theta >= -2.0 && theta <= 1.5)) {
        throw ContractViolation("theta outside the supported range [-2, 1.5]");
    }
    if (trials < 1000) {
        throw ContractViolation("psi_mc_estimate needs at least 1000 trials");
    }
    Xoshiro256 gen(stream);
    RunningMoments moments;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const ParticleSet set = simulate_yule(gen, 1.0);
        double weight = 0.0;
        for (const auto x : set.positions) {
            weight += std::exp(-theta * static_cast<double>(x));
        }
        if (!std::isfinite(weight)) {
            throw NumericalRangeError("weighted particle sum overflowed");
        }
        moments.add(weight);
    }
    return {moments.mean(), moments.standard_error()};
}

PsiReport psi_report(double theta, std::uint64_t trials, RandomStream stream) {
    PsiReport report;
    report.theta = theta;
    report.mc = psi_mc_estimate(theta, trials, stream);
    report.closed_form = psi(theta);
    report.z_score = (report.mc.mean - report.closed_form) / report.mc.standard_error;
    return report;
}

nlohmann::json to_json(const PsiReport& report) {
    return {{"theta", report.theta},
            {"mc_mean", report.mc.mean},
            {"stderr", report.mc.standard_error},
            {"closed_form", report.closed_form},
            {"z_score", report.z_score}};
}

} // namespace bstsim
