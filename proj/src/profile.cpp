#include "bstsim/profile.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <string>

#include "bstsim/errors.hpp"

namespace bstsim {

namespace {
constexpr std::size_t kInitialCapacity = 64;
}

LevelProfile::LevelProfile() {
    grow(kInitialCapacity);
    counts_[0] = 1;
    fenwick_add(0, 1);
    n_ = 1;
}

LevelProfile LevelProfile::from_counts(std::span<const Count> counts) {
    std::size_t last = counts.size();
    while (last > 0 && counts[last - 1] == 0) {
        --last;
    }
    if (last == 0) {
        throw ContractViolation("level profile needs at least one leaf");
    }
    for (std::size_t j = 0; j < last; ++j) {
        if (j < 64 && counts[j] > (Count{1} << j)) {
            throw ContractViolation("level " + std::to_string(j) + " holds more than 2^" +
                                    std::to_string(j) + " leaves");
        }
    }

    LevelProfile p;
    p.counts_.assign(p.capacity_, 0);
    p.grow(std::bit_ceil(last + 1));
    p.n_ = 0;
    for (std::size_t j = 0; j < last; ++j) {
        p.counts_[j] = counts[j];
        p.n_ += counts[j];
    }
    std::fill(p.fenwick_.begin(), p.fenwick_.end(), 0);
    for (std::size_t j = 0; j < last; ++j) {
        if (counts[j] > 0) {
            p.fenwick_add(static_cast<Depth>(j), static_cast<std::int64_t>(counts[j]));
        }
    }
    p.max_level_ = static_cast<Depth>(last - 1);
    p.min_level_ = 0;
    while (p.counts_[p.min_level_] == 0) {
        ++p.min_level_;
    }
    return p;
}

std::vector<Count> LevelProfile::counts() const {
    return {counts_.begin(), counts_.begin() + max_level_ + 1};
}

Depth LevelProfile::sample_leaf_level(Count u) const {
    if (u < 1 || u > n_) {
        throw ContractViolation("leaf rank " + std::to_string(u) + " outside [1, " +
                                std::to_string(n_) + "]");
    }
    return locate(u);
}

Depth LevelProfile::locate(Count u) const noexcept {
    std::size_t pos = 0;
    Count remaining = u;
    for (std::size_t stride = capacity_; stride > 0; stride >>= 1) {
        const std::size_t next = pos + stride;
        if (next <= capacity_ && fenwick_[next] < remaining) {
            pos = next;
            remaining -= fenwick_[next];
        }
    }
    return static_cast<Depth>(pos);
}

StepOutcome LevelProfile::expand(Depth level) {
    if (level > max_level_ || counts_[level] == 0) {
        throw ContractViolation("no leaf at depth " + std::to_string(level));
    }
    const Depth child = level + 1;
    if (child >= capacity_) {
        grow(capacity_ * 2);
    }
    counts_[level] -= 1;
    counts_[child] += 2;
    fenwick_add(level, -1);
    fenwick_add(child, 2);
    n_ += 1;

    if (child > max_level_) {
        max_level_ = child;
    }
    if (level == min_level_ && counts_[level] == 0) {
        // the two new leaves sit at level + 1, so the minimum moves by one
        min_level_ = child;
    }
    return {level, max_level_, min_level_, counts_[max_level_]};
}

void LevelProfile::fenwick_add(Depth level, std::int64_t delta) noexcept {
    for (std::size_t i = std::size_t{level} + 1; i <= capacity_; i += i & (~i + 1)) {
        fenwick_[i] = static_cast<Count>(static_cast<std::int64_t>(fenwick_[i]) + delta);
    }
}

void LevelProfile::grow(std::size_t min_capacity) {
    const std::size_t capacity = std::bit_ceil(std::max(min_capacity, kInitialCapacity));
    if (capacity <= capacity_) {
        return;
    }
    counts_.resize(capacity, 0);
    capacity_ = capacity;
    fenwick_.assign(capacity_ + 1, 0);
    // linear-time Fenwick build
    for (std::size_t i = 1; i <= capacity_; ++i) {
        fenwick_[i] += counts_[i - 1];
        const std::size_t parent = i + (i & (~i + 1));
        if (parent <= capacity_) {
            fenwick_[parent] += fenwick_[i];
        }
    }
}

CheckpointSchedule checkpoint_schedule(Count n_max, double ratio) {
    if (!(ratio > 1.0) || !std::isfinite(ratio)) {
        throw ConfigError("checkpoint ratio must be a finite number > 1");
    }
    if (n_max < 1) {
        throw ConfigError("n_max must be >= 1");
    }
    CheckpointSchedule schedule;
    schedule.ratio = ratio;
    schedule.targets.push_back(1);
    const auto limit = static_cast<double>(n_max);
    for (int k = 1;; ++k) {
        const double value = std::ceil(std::pow(ratio, k));
        if (value > limit) {
            break;
        }
        const auto target = static_cast<Count>(value);
        if (target >= 2 && target > schedule.targets.back()) {
            schedule.targets.push_back(target);
        }
    }
    if (schedule.targets.back() != n_max) {
        schedule.targets.push_back(n_max);
    }
    return schedule;
}

std::string_view trajectory_csv_header() noexcept {
    return "n,H,h,F,R_height,R_saturation";
}

namespace {

void append_real(std::string& out, const std::optional<double>& value) {
    out += ',';
    if (value) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, *value);
        out.append(buf, res.ptr);
    }
}

} // namespace

std::string to_csv_row(const TrajectoryRecord& r) {
    std::string line = std::to_string(r.n) + ',' + std::to_string(r.H) + ',' +
                       std::to_string(r.h) + ',' + std::to_string(r.F);
    append_real(line, r.R_height);
    append_real(line, r.R_saturation);
    return line;
}

void run_trajectory(RandomStream stream, Count n_max, const CheckpointSchedule& schedule,
                    const RecordSink& sink, RunLimits limits) {
    if (n_max < 1) {
        throw ConfigError("n_max must be >= 1");
    }
    Xoshiro256 gen(stream);
    LevelProfile profile;
    const Count reachable = limits.max_steps >= n_max - 1 ? n_max : limits.max_steps + 1;

    auto emit = [&] {
        const Observables obs = profile.observables();
        sink(TrajectoryRecord{profile.n(), obs.H, obs.h, obs.F, std::nullopt, std::nullopt});
    };

    for (const Count target : schedule.targets) {
        if (target > reachable) {
            break;
        }
        while (profile.n() < target) {
            profile.step(gen);
        }
        emit();
    }
    while (profile.n() < reachable) {
        profile.step(gen);
    }
    if (reachable < n_max) {
        throw ResourceError("trajectory to n = " + std::to_string(n_max) +
                            " exceeds the step budget of " + std::to_string(limits.max_steps));
    }
}

std::vector<TrajectoryRecord> run_trajectory(RandomStream stream, Count n_max,
                                             const CheckpointSchedule& schedule) {
    std::vector<TrajectoryRecord> records;
    run_trajectory(stream, n_max, schedule,
                   [&](const TrajectoryRecord& r) { records.push_back(r); });
    return records;
}

} // namespace bstsim
