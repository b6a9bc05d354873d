#include "bstsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "bstsim/errors.hpp"

namespace bstsim {

void RunningMoments::add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) noexcept {
    if (other.count_ == 0) {
        return;
    }
    if (count_ == 0) {
        *this = other;
        return;
    }
    const auto na = static_cast<double>(count_);
    const auto nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ = (na * mean_ + nb * other.mean_) / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    count_ += other.count_;
}

double RunningMoments::variance() const noexcept {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

double RunningMoments::standard_error() const noexcept {
    return count_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(count_));
}

double chi_square_sf(double x, int dof) {
    if (dof <= 0) {
        return x > 0.0 ? 0.0 : 1.0;
    }
    if (!std::isfinite(x)) {
        return 0.0;
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

namespace {

struct Bin {
    double expected = 0.0;
    double observed = 0.0;
};

ChiSquareResult finish(double statistic, int bins) {
    ChiSquareResult r;
    r.statistic = statistic;
    r.bins = bins;
    r.dof = std::max(bins - 1, 0);
    r.p_value = chi_square_sf(statistic, r.dof);
    return r;
}

} // namespace

ChiSquareResult chi_square_gof(const CountTable& observed, const ProbabilityTable& law) {
    double total = 0.0;
    for (const auto& [key, c] : observed) {
        total += static_cast<double>(c);
        const auto it = law.find(key);
        if (c > 0 && (it == law.end() || it->second <= 0.0)) {
            ChiSquareResult r;
            r.statistic = std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
            return r;
        }
    }
    if (total == 0.0) {
        throw ContractViolation("chi-square test on an empty sample");
    }

    std::vector<Bin> bins;
    Bin open;
    for (const auto& [key, p] : law) {
        open.expected += p * total;
        if (const auto it = observed.find(key); it != observed.end()) {
            open.observed += static_cast<double>(it->second);
        }
        if (open.expected >= 5.0) {
            bins.push_back(open);
            open = {};
        }
    }
    if (open.expected > 0.0 || open.observed > 0.0) {
        if (bins.empty()) {
            bins.push_back(open);
        } else {
            bins.back().expected += open.expected;
            bins.back().observed += open.observed;
        }
    }

    double statistic = 0.0;
    for (const Bin& b : bins) {
        if (b.expected > 0.0) {
            statistic += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
        }
    }
    return finish(statistic, static_cast<int>(bins.size()));
}

ChiSquareResult chi_square_homogeneity(const CountTable& a, const CountTable& b) {
    std::map<CellKey, std::pair<double, double>> cells;
    double total_a = 0.0;
    double total_b = 0.0;
    for (const auto& [key, c] : a) {
        cells[key].first += static_cast<double>(c);
        total_a += static_cast<double>(c);
    }
    for (const auto& [key, c] : b) {
        cells[key].second += static_cast<double>(c);
        total_b += static_cast<double>(c);
    }
    if (total_a == 0.0 || total_b == 0.0) {
        throw ContractViolation("chi-square homogeneity test needs two non-empty samples");
    }

    std::vector<std::pair<double, double>> bins;
    std::pair<double, double> open{0.0, 0.0};
    for (const auto& [key, pair] : cells) {
        open.first += pair.first;
        open.second += pair.second;
        if (open.first + open.second >= 10.0) {
            bins.push_back(open);
            open = {0.0, 0.0};
        }
    }
    if (open.first + open.second > 0.0) {
        if (bins.empty()) {
            bins.push_back(open);
        } else {
            bins.back().first += open.first;
            bins.back().second += open.second;
        }
    }

    const double total = total_a + total_b;
    double statistic = 0.0;
    for (const auto& [oa, ob] : bins) {
        const double column = oa + ob;
        const double ea = column * total_a / total;
        const double eb = column * total_b / total;
        statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    return finish(statistic, static_cast<int>(bins.size()));
}

double reference_cdf(Reference ref, double x) noexcept {
    switch (ref) {
    case Reference::Exponential1:
        return x <= 0.0 ? 0.0 : -std::expm1(-x);
    case Reference::Uniform01:
        return std::clamp(x, 0.0, 1.0);
    case Reference::Gumbel:
        return std::exp(-std::exp(-x));
    }
    return 0.0;
}

std::string_view to_string(Reference ref) noexcept {
    switch (ref) {
    case Reference::Exponential1:
        return "exp1";
    case Reference::Uniform01:
        return "uniform";
    case Reference::Gumbel:
        return "gumbel";
    }
    return "?";
}

double kolmogorov_sf(double lambda) noexcept {
    if (lambda <= 0.0) {
        return 1.0;
    }
    if (lambda < 1.18) {
        // 1 - sqrt(2 pi)/lambda * sum_j exp(-(2j-1)^2 pi^2 / (8 lambda^2))
        const double k = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 100; ++j) {
            const double odd = 2.0 * j - 1.0;
            const double term = std::exp(-odd * odd * k);
            sum += term;
            if (term < 1e-300) {
                break;
            }
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1) ? term : -term;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_statistic(std::span<const double> samples, Reference ref) {
    if (samples.empty()) {
        throw ContractViolation("Kolmogorov-Smirnov test on an empty sample");
    }
    if (samples.size() < 8) {
        throw ContractViolation("Kolmogorov-Smirnov test needs at least 8 samples");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = reference_cdf(ref, sorted[i]);
        const double above = static_cast<double>(i + 1) / m - f;
        const double below = f - static_cast<double>(i) / m;
        d = std::max({d, above, below});
    }
    return {d, kolmogorov_sf(std::sqrt(m) * d)};
}

} // namespace bstsim
