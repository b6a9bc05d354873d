#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace bstsim {

/// Streaming mean/variance (Welford) with the pairwise merge of Chan et al.
class RunningMoments {
public:
    void add(double x) noexcept;
    void merge(const RunningMoments& other) noexcept;

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const noexcept;
    double standard_error() const noexcept;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Estimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int bins = 0;  // after pooling
};

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double x, int dof);

using CellKey = std::vector<std::uint64_t>;
using CountTable = std::map<CellKey, std::uint64_t>;
using ProbabilityTable = std::map<CellKey, double>;

/// Goodness of fit of observed counts to a discrete law. Cells are taken in
/// key order and adjacent cells are pooled until each bin expects >= 5
/// observations. An observation in a zero-probability cell gives an infinite
/// statistic and p = 0.
ChiSquareResult chi_square_gof(const CountTable& observed, const ProbabilityTable& law);

/// Two-sample homogeneity test on a 2 x K table, pooling adjacent cells until
/// each bin holds >= 10 combined observations.
ChiSquareResult chi_square_homogeneity(const CountTable& a, const CountTable& b);

enum class Reference { Exponential1, Uniform01, Gumbel };

double reference_cdf(Reference ref, double x) noexcept;
std::string_view to_string(Reference ref) noexcept;

struct KsResult {
    double D = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov limiting survival function Q(lambda) = P(K > lambda).
/// Alternating series, truncated at 100 terms, for lambda >= 1.18; the
/// theta-function form for smaller lambda where the alternating series
/// converges too slowly.
double kolmogorov_sf(double lambda) noexcept;

/// One-sample Kolmogorov-Smirnov statistic against `ref`, asymptotic p-value
/// Q(sqrt(m) D). Requires at least 8 samples.
KsResult ks_statistic(std::span<const double> samples, Reference ref);

} // namespace bstsim
