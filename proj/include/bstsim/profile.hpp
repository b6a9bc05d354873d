#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bstsim/rng.hpp"

namespace bstsim {

using Depth = std::uint32_t;
using Count = std::uint64_t;

struct Observables {
    Depth H = 0;  // height: deepest leaf
    Depth h = 0;  // saturation level: shallowest leaf
    Count F = 0;  // fringe size: leaves at depth H

    friend bool operator==(const Observables&, const Observables&) = default;
    friend auto operator<=>(const Observables&, const Observables&) = default;
};

struct StepOutcome {
    Depth chosen_level = 0;
    Depth new_H = 0;
    Depth new_h = 0;
    Count new_F = 0;
};

/// Leaf counts per depth of a random binary search tree.
///
/// The law of (H, h, F) under uniform leaf expansion depends on the tree only
/// through this profile, so the full tree is never materialised. A Fenwick
/// index over levels gives O(log depth) sampling and updates; capacity doubles
/// as the tree deepens.
class LevelProfile {
public:
    /// The one-leaf tree: counts = [1].
    LevelProfile();

    /// Validates the invariants (n >= 1, counts[j] <= 2^j, at least one leaf).
    /// Trailing zero levels are dropped.
    static LevelProfile from_counts(std::span<const Count> counts);

    Count n() const noexcept { return n_; }
    Depth min_level() const noexcept { return min_level_; }
    Depth max_level() const noexcept { return max_level_; }

    /// Leaves at depth j; zero past max_level.
    Count count(Depth j) const noexcept { return j < counts_.size() ? counts_[j] : 0; }

    /// counts[0..max_level].
    std::vector<Count> counts() const;

    Observables observables() const noexcept {
        return {max_level_, min_level_, counts_[max_level_]};
    }

    /// Level whose cumulative count interval contains u, for u in [1, n].
    /// Throws ContractViolation otherwise.
    Depth sample_leaf_level(Count u) const;

    /// Expands one leaf at depth `level` into two leaves at level + 1.
    /// Requires count(level) > 0.
    StepOutcome expand(Depth level);

    /// One uniform-leaf expansion.
    StepOutcome step(Xoshiro256& gen) {
        return expand(locate(uniform_1_to(gen, n_)));
    }

    friend bool operator==(const LevelProfile& a, const LevelProfile& b) {
        return a.n_ == b.n_ && a.counts() == b.counts();
    }

private:
    Depth locate(Count u) const noexcept;
    void fenwick_add(Depth level, std::int64_t delta) noexcept;
    void grow(std::size_t min_capacity);

    std::vector<Count> counts_;   // size == capacity_
    std::vector<Count> fenwick_;  // 1-based, size capacity_ + 1
    std::size_t capacity_ = 0;    // power of two
    Count n_ = 0;
    Depth min_level_ = 0;
    Depth max_level_ = 0;
};

inline Observables observables(const LevelProfile& p) noexcept { return p.observables(); }

/// Sorted, strictly increasing list of tree sizes at which to record.
struct CheckpointSchedule {
    std::vector<Count> targets;
    double ratio = 2.0;
};

/// {1} together with ceil(ratio^k) for those values in [2, n_max], and n_max.
/// Throws ConfigError when ratio <= 1 or n_max < 1.
CheckpointSchedule checkpoint_schedule(Count n_max, double ratio);

/// One row of the trajectory CSV. The recentred columns are left empty by
/// the simulator and filled in by the analysis layer.
struct TrajectoryRecord {
    Count n = 0;
    Depth H = 0;
    Depth h = 0;
    Count F = 0;
    std::optional<double> R_height;
    std::optional<double> R_saturation;
};

/// `n,H,h,F,R_height,R_saturation`
std::string_view trajectory_csv_header() noexcept;

/// One CSV line without the newline. Reals use the shortest round-trip form;
/// missing recentred values are empty fields.
std::string to_csv_row(const TrajectoryRecord& record);

using RecordSink = std::function<void(const TrajectoryRecord&)>;

struct RunLimits {
    /// Maximum number of steps one trajectory may take.
    Count max_steps = 100'000'000'000ULL;
};

/// Grows a tree from one leaf to n_max leaves, handing `sink` one record per
/// schedule target (targets beyond n_max are ignored). If n_max - 1 exceeds
/// limits.max_steps the run stops at the budget after emitting every record
/// reached so far, then throws ResourceError.
void run_trajectory(RandomStream stream, Count n_max, const CheckpointSchedule& schedule,
                    const RecordSink& sink, RunLimits limits = {});

/// Convenience overload collecting the records.
std::vector<TrajectoryRecord> run_trajectory(RandomStream stream, Count n_max,
                                             const CheckpointSchedule& schedule);

} // namespace bstsim
