#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bstsim/constants.hpp"
#include "bstsim/profile.hpp"
#include "bstsim/rng.hpp"
#include "bstsim/stats.hpp"

namespace bstsim {

/// Fills R_height and R_saturation from (n, H, h) when n >= 3.
TrajectoryRecord recentred(TrajectoryRecord record, const ConstantsSet& c = default_constants());

inline constexpr std::array<double, 5> kQuantileLevels{0.05, 0.25, 0.5, 0.75, 0.95};

/// Moments plus the sorted sample, so merges stay exact for quantiles.
struct SampleSummary {
    RunningMoments moments;
    std::vector<double> sorted;

    void add(double x);
    void merge(const SampleSummary& other);
    /// Linear interpolation between order statistics.
    double quantile(double level) const;
};

struct CheckpointStats {
    Count n = 0;
    SampleSummary r_height;
    SampleSummary r_saturation;
};

struct Extrema {
    double min = 0.0;
    double max = 0.0;
};

struct MemberExtrema {
    std::uint64_t stream_index = 0;
    Extrema r_height;
    Extrema r_saturation;
};

struct EnsembleConfig {
    Count n_max = 1'000'000;
    std::uint64_t members = 1;
    std::uint64_t base_seed = 0;
    double ratio = 1.05;
    unsigned jobs = 1;
    double burn_in = 0.1;
    RunLimits limits{};
};

struct EnsembleSummary {
    std::uint64_t base_seed = 0;
    std::vector<CheckpointStats> checkpoints;  // n >= 3 only, ascending n
    std::vector<MemberExtrema> members;        // ascending stream_index
    bool complete = true;
    std::string error;

    std::vector<Count> n_grid() const;
    std::size_t member_count() const noexcept { return members.size(); }
    /// Fraction of members whose running minimum of R_height is strictly
    /// below its running maximum, and likewise for R_saturation.
    double fluctuating_fraction_height() const;
    double fluctuating_fraction_saturation() const;
};

/// Order-independent fold of two summaries with the same base seed.
EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b);

/// Summary of one trajectory on stream (base_seed, stream_index).
EnsembleSummary summarize_member(const EnsembleConfig& config, std::uint64_t stream_index);

/// Runs members 0..members-1 on up to config.jobs threads and folds them in
/// stream order. A ResourceError in any member marks the summary incomplete.
EnsembleSummary ensemble_run(const EnsembleConfig& config);

nlohmann::json to_json(const EnsembleSummary& summary);

/// Minimum and maximum after discarding the first floor(burn_in * size)
/// values. A finite-horizon stand-in for liminf/limsup, nothing more.
/// Throws ContractViolation when nothing is left.
Extrema running_extrema(std::span<const double> values, double burn_in = 0.1);

enum class LemmaVerdict { Pass, Fail, NotApplicable };

std::string_view to_string(LemmaVerdict v) noexcept;

/// With F = count(H) and d = floor(log2 F): when H > d, some level in
/// [H - d, H - 1] must hold a leaf.
LemmaVerdict frontier_lemma_check(const LevelProfile& profile);

struct FringeRow {
    Count n = 0;
    std::vector<Count> levels;  // counts at H, H-1, ..., H-window+1
};

struct FringeTrace {
    unsigned window = 3;
    std::vector<FringeRow> rows;  // schedule targets with n >= 2
    // Every step with n >= 2, not only the checkpoints:
    Count min_F = 0;
    Count max_F = 0;
    Count visits_F2 = 0;
    bool lemma_checked = false;
    Count lemma_applicable = 0;
    Count lemma_failures = 0;
    std::optional<Count> first_lemma_failure;
};

FringeTrace fringe_trace(RandomStream stream, Count n_max, unsigned window,
                         const CheckpointSchedule& schedule, bool check_lemma = false);

/// CSV header `n,F,F_minus1,...` for the given window.
std::string fringe_csv_header(unsigned window);
std::string fringe_csv_row(const FringeRow& row);

/// First n at which F = 2k while H > floor(log2 2k), keyed by 2k.
struct HittingTimes {
    std::map<Count, std::optional<Count>> first_hit;
    Count running_max_F = 0;
};

HittingTimes fringe_hitting_times(RandomStream stream, Count n_max, Count k_max);

nlohmann::json to_json(const HittingTimes& times);

/// (1 + 2k)^{-floor(log2 2k)}: chance that floor(log2 2k) unit exponentials
/// finish before the first of 2k others.
double gamma_lower_bound(std::uint64_t k);

/// Monte Carlo of the same race. trials >= 10^4.
Estimate gamma_mc(std::uint64_t k, std::uint64_t trials, RandomStream stream);

} // namespace bstsim
