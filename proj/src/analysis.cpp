#include "bstsim/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

#include "bstsim/errors.hpp"

namespace bstsim {

TrajectoryRecord recentred(TrajectoryRecord record, const ConstantsSet& c) {
    if (record.n >= 3) {
        record.R_height = recentre_height(c, record.n, record.H);
        record.R_saturation = recentre_saturation(c, record.n, record.h);
    } else {
        record.R_height.reset();
        record.R_saturation.reset();
    }
    return record;
}

void SampleSummary::add(double x) {
    moments.add(x);
    sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), x), x);
}

void SampleSummary::merge(const SampleSummary& other) {
    moments.merge(other.moments);
    std::vector<double> merged;
    merged.reserve(sorted.size() + other.sorted.size());
    std::merge(sorted.begin(), sorted.end(), other.sorted.begin(), other.sorted.end(),
               std::back_inserter(merged));
    sorted = std::move(merged);
}

double SampleSummary::quantile(double level) const {
    if (sorted.empty()) {
        throw ContractViolation("quantile of an empty sample");
    }
    const double pos = std::clamp(level, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<Count> EnsembleSummary::n_grid() const {
    std::vector<Count> grid;
    grid.reserve(checkpoints.size());
    for (const auto& c : checkpoints) {
        grid.push_back(c.n);
    }
    return grid;
}

double EnsembleSummary::fluctuating_fraction_height() const {
    if (members.empty()) {
        return 0.0;
    }
    const auto hits = std::count_if(members.begin(), members.end(), [](const MemberExtrema& m) {
        return m.r_height.min < m.r_height.max;
    });
    return static_cast<double>(hits) / static_cast<double>(members.size());
}

double EnsembleSummary::fluctuating_fraction_saturation() const {
    if (members.empty()) {
        return 0.0;
    }
    const auto hits = std::count_if(members.begin(), members.end(), [](const MemberExtrema& m) {
        return m.r_saturation.min < m.r_saturation.max;
    });
    return static_cast<double>(hits) / static_cast<double>(members.size());
}

EnsembleSummary merge(const EnsembleSummary& a, const EnsembleSummary& b) {
    if (a.base_seed != b.base_seed) {
        throw ContractViolation("cannot merge ensembles with different base seeds");
    }
    EnsembleSummary out;
    out.base_seed = a.base_seed;
    out.complete = a.complete && b.complete;
    out.error = !a.error.empty() ? a.error : b.error;

    auto ia = a.checkpoints.begin();
    auto ib = b.checkpoints.begin();
    while (ia != a.checkpoints.end() || ib != b.checkpoints.end()) {
        if (ib == b.checkpoints.end() || (ia != a.checkpoints.end() && ia->n < ib->n)) {
            out.checkpoints.push_back(*ia++);
        } else if (ia == a.checkpoints.end() || ib->n < ia->n) {
            out.checkpoints.push_back(*ib++);
        } else {
            CheckpointStats c = *ia++;
            c.r_height.merge(ib->r_height);
            c.r_saturation.merge(ib->r_saturation);
            ++ib;
            out.checkpoints.push_back(std::move(c));
        }
    }

    out.members.reserve(a.members.size() + b.members.size());
    std::merge(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
               std::back_inserter(out.members),
               [](const MemberExtrema& x, const MemberExtrema& y) {
                   return x.stream_index < y.stream_index;
               });
    return out;
}

EnsembleSummary summarize_member(const EnsembleConfig& config, std::uint64_t stream_index) {
    if (config.n_max < 3) {
        throw ConfigError("ensemble runs need n_max >= 3");
    }
    const ConstantsSet& constants = default_constants();
    const CheckpointSchedule schedule = checkpoint_schedule(config.n_max, config.ratio);

    EnsembleSummary summary;
    summary.base_seed = config.base_seed;
    std::vector<double> heights;
    std::vector<double> saturations;
    const auto sink = [&](const TrajectoryRecord& raw) {
        if (raw.n < 3) {
            return;
        }
        const TrajectoryRecord r = recentred(raw, constants);
        CheckpointStats stats;
        stats.n = r.n;
        stats.r_height.add(*r.R_height);
        stats.r_saturation.add(*r.R_saturation);
        summary.checkpoints.push_back(std::move(stats));
        heights.push_back(*r.R_height);
        saturations.push_back(*r.R_saturation);
    };
    try {
        run_trajectory({config.base_seed, stream_index}, config.n_max, schedule, sink,
                       config.limits);
    } catch (const ResourceError& e) {
        summary.complete = false;
        summary.error = e.what();
    }
    if (!heights.empty()) {
        summary.members.push_back({stream_index, running_extrema(heights, config.burn_in),
                                   running_extrema(saturations, config.burn_in)});
    }
    return summary;
}

EnsembleSummary ensemble_run(const EnsembleConfig& config) {
    if (config.members < 1) {
        throw ConfigError("ensemble needs at least one member");
    }
    if (config.n_max < 3) {
        throw ConfigError("ensemble runs need n_max >= 3");
    }
    checkpoint_schedule(config.n_max, config.ratio);  // validates ratio

    std::vector<EnsembleSummary> parts(config.members);
    const unsigned jobs =
        std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(config.members)));
    if (jobs == 1) {
        for (std::uint64_t i = 0; i < config.members; ++i) {
            parts[i] = summarize_member(config, i);
        }
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (std::uint64_t i = w; i < config.members; i += jobs) {
                    parts[i] = summarize_member(config, i);
                }
            });
        }
    }

    EnsembleSummary total = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        total = merge(total, parts[i]);
    }
    return total;
}

namespace {

nlohmann::json summary_json(const SampleSummary& s) {
    nlohmann::json quantiles = nlohmann::json::array();
    for (const double level : kQuantileLevels) {
        quantiles.push_back(s.quantile(level));
    }
    return {{"mean", s.moments.mean()}, {"variance", s.moments.variance()}, {"quantiles", quantiles}};
}

} // namespace

nlohmann::json to_json(const EnsembleSummary& summary) {
    nlohmann::json n_grid = nlohmann::json::array();
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json rh_mean = nlohmann::json::array();
    nlohmann::json rh_var = nlohmann::json::array();
    nlohmann::json rh_q = nlohmann::json::array();
    nlohmann::json rs_mean = nlohmann::json::array();
    nlohmann::json rs_var = nlohmann::json::array();
    nlohmann::json rs_q = nlohmann::json::array();
    for (const auto& c : summary.checkpoints) {
        n_grid.push_back(c.n);
        counts.push_back(c.r_height.moments.count());
        const auto h = summary_json(c.r_height);
        const auto s = summary_json(c.r_saturation);
        rh_mean.push_back(h["mean"]);
        rh_var.push_back(h["variance"]);
        rh_q.push_back(h["quantiles"]);
        rs_mean.push_back(s["mean"]);
        rs_var.push_back(s["variance"]);
        rs_q.push_back(s["quantiles"]);
    }
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : summary.members) {
        members.push_back({{"stream_index", m.stream_index},
                           {"R_height_min", m.r_height.min},
                           {"R_height_max", m.r_height.max},
                           {"R_saturation_min", m.r_saturation.min},
                           {"R_saturation_max", m.r_saturation.max}});
    }
    nlohmann::json j{
        {"base_seed", summary.base_seed},
        {"member_count", summary.member_count()},
        {"complete", summary.complete},
        {"quantile_levels", kQuantileLevels},
        {"n_grid", n_grid},
        {"samples", counts},
        {"R_height", {{"mean", rh_mean}, {"variance", rh_var}, {"quantiles", rh_q}}},
        {"R_saturation", {{"mean", rs_mean}, {"variance", rs_var}, {"quantiles", rs_q}}},
        {"fluctuating_fraction",
         {{"R_height", summary.fluctuating_fraction_height()},
          {"R_saturation", summary.fluctuating_fraction_saturation()}}},
        {"members", members},
    };
    if (!summary.complete) {
        j["error"] = summary.error;
    }
    return j;
}

Extrema running_extrema(std::span<const double> values, double burn_in) {
    if (!(burn_in >= 0.0 && burn_in < 1.0)) {
        throw ConfigError("burn-in fraction must lie in [0, 1)");
    }
    const auto skip =
        static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(values.size())));
    if (skip >= values.size()) {
        throw ContractViolation("no values left after burn-in");
    }
    const auto kept = values.subspan(skip);
    const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end());
    return {*lo, *hi};
}

std::string_view to_string(LemmaVerdict v) noexcept {
    switch (v) {
    case LemmaVerdict::Pass:
        return "pass";
    case LemmaVerdict::Fail:
        return "fail";
    case LemmaVerdict::NotApplicable:
        return "not-applicable";
    }
    return "?";
}

LemmaVerdict frontier_lemma_check(const LevelProfile& profile) {
    const Depth top = profile.max_level();
    const Count fringe = profile.count(top);
    const auto reach = static_cast<Depth>(std::bit_width(fringe) - 1);  // floor(log2 F)
    if (top <= reach) {
        return LemmaVerdict::NotApplicable;
    }
    for (Depth j = top - reach; j < top; ++j) {
        if (profile.count(j) > 0) {
            return LemmaVerdict::Pass;
        }
    }
    return LemmaVerdict::Fail;
}

FringeTrace fringe_trace(RandomStream stream, Count n_max, unsigned window,
                         const CheckpointSchedule& schedule, bool check_lemma) {
    if (n_max < 2) {
        throw ConfigError("fringe trace needs n_max >= 2");
    }
    if (window < 1) {
        throw ConfigError("fringe window must be >= 1");
    }
    FringeTrace trace;
    trace.window = window;
    trace.lemma_checked = check_lemma;
    trace.min_F = ~Count{0};

    Xoshiro256 gen(stream);
    LevelProfile profile;
    auto next_target = schedule.targets.begin();
    while (next_target != schedule.targets.end() && *next_target < 2) {
        ++next_target;
    }

    while (profile.n() < n_max) {
        const StepOutcome out = profile.step(gen);
        trace.min_F = std::min(trace.min_F, out.new_F);
        trace.max_F = std::max(trace.max_F, out.new_F);
        trace.visits_F2 += out.new_F == 2 ? 1 : 0;
        if (check_lemma) {
            const LemmaVerdict v = frontier_lemma_check(profile);
            if (v != LemmaVerdict::NotApplicable) {
                ++trace.lemma_applicable;
            }
            if (v == LemmaVerdict::Fail) {
                ++trace.lemma_failures;
                if (!trace.first_lemma_failure) {
                    trace.first_lemma_failure = profile.n();
                }
            }
        }
        if (next_target != schedule.targets.end() && *next_target == profile.n()) {
            FringeRow row;
            row.n = profile.n();
            row.levels.reserve(window);
            const Depth top = profile.max_level();
            for (unsigned back = 0; back < window; ++back) {
                row.levels.push_back(back <= top ? profile.count(top - back) : 0);
            }
            trace.rows.push_back(std::move(row));
            ++next_target;
        }
    }
    return trace;
}

std::string fringe_csv_header(unsigned window) {
    std::string header = "n,F";
    for (unsigned back = 1; back < window; ++back) {
        header += ",F_minus" + std::to_string(back);
    }
    return header;
}

std::string fringe_csv_row(const FringeRow& row) {
    std::string line = std::to_string(row.n);
    for (const Count c : row.levels) {
        line += ',';
        line += std::to_string(c);
    }
    return line;
}

HittingTimes fringe_hitting_times(RandomStream stream, Count n_max, Count k_max) {
    if (n_max < 2) {
        throw ConfigError("hitting-time scan needs n_max >= 2");
    }
    if (k_max < 1) {
        throw ConfigError("k_max must be >= 1");
    }
    HittingTimes times;
    for (Count k = 1; k <= k_max; ++k) {
        times.first_hit[2 * k] = std::nullopt;
    }
    Count unresolved = k_max;

    Xoshiro256 gen(stream);
    LevelProfile profile;
    while (profile.n() < n_max) {
        const StepOutcome out = profile.step(gen);
        const Count fringe = out.new_F;
        times.running_max_F = std::max(times.running_max_F, fringe);
        if (unresolved == 0 || fringe > 2 * k_max) {
            continue;
        }
        const auto reach = static_cast<Depth>(std::bit_width(fringe) - 1);
        if (out.new_H > reach) {
            auto& slot = times.first_hit[fringe];
            if (!slot) {
                slot = profile.n();
                --unresolved;
            }
        }
    }
    return times;
}

nlohmann::json to_json(const HittingTimes& times) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [fringe, hit] : times.first_hit) {
        j[std::to_string(fringe)] = hit ? nlohmann::json(*hit) : nlohmann::json(nullptr);
    }
    return j;
}

double gamma_lower_bound(std::uint64_t k) {
    if (k < 1) {
        throw ContractViolation("gamma_lower_bound needs k >= 1");
    }
    const int steps = std::bit_width(2 * k) - 1;
    return std::pow(1.0 + 2.0 * static_cast<double>(k), -steps);
}

Estimate gamma_mc(std::uint64_t k, std::uint64_t trials, RandomStream stream) {
    if (k < 1) {
        throw ContractViolation("gamma_mc needs k >= 1");
    }
    if (trials < 10'000) {
        throw ContractViolation("gamma_mc needs at least 10^4 trials");
    }
    const int steps = std::bit_width(2 * k) - 1;
    Xoshiro256 gen(stream);
    std::uint64_t wins = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        double climb = 0.0;
        for (int s = 0; s < steps; ++s) {
            climb += exponential(gen);
        }
        double first_branch = exponential(gen);
        for (std::uint64_t i = 1; i < 2 * k; ++i) {
            first_branch = std::min(first_branch, exponential(gen));
        }
        wins += climb < first_branch ? 1 : 0;
    }
    const double p = static_cast<double>(wins) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

} // namespace bstsim
