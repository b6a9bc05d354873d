#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace bstsim {

/// Sizes and bands for the end-to-end checks. `full()` is the acceptance
/// scale; `quick()` shrinks the Monte Carlo work and widens the bands.
struct ValidationScale {
    std::uint64_t seed = 0;
    std::uint64_t oracle_trials = 1'000'000;
    std::uint64_t psi_trials = 100'000;
    std::uint64_t zeta_samples = 10'000;
    std::uint64_t zeta_n = 1'000'000;
    std::uint64_t lemma_steps = 10'000'000;
    std::uint64_t fringe_steps = 10'000'000;
    std::uint64_t fringe_seeds = 20;
    std::uint64_t fringe_required = 18;  // runs with max F >= 8
    std::uint64_t gamma_trials = 1'000'000;
    std::uint64_t ensemble_members = 200;
    std::uint64_t ensemble_n = 1'000'000;
    std::uint64_t perf_steps = 50'000'000;
    unsigned jobs = 1;
    double se_band = 3.0;
    bool enforce_budgets = true;

    static ValidationScale full(std::uint64_t seed = 0);
    static ValidationScale quick(std::uint64_t seed = 0);
};

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    nlohmann::json metrics = nlohmann::json::object();
    double seconds = 0.0;
    double budget_seconds = 0.0;  // 0: no budget
};

CheckResult check_constants(const ValidationScale& scale);
CheckResult check_small_n_exactness(const ValidationScale& scale);
CheckResult check_simulator_vs_oracle(const ValidationScale& scale);
CheckResult check_psi_monte_carlo(const ValidationScale& scale);
CheckResult check_zeta_distribution(const ValidationScale& scale);
CheckResult check_frontier_lemma(const ValidationScale& scale);
CheckResult check_fringe_behaviour(const ValidationScale& scale);
CheckResult check_gamma_race(const ValidationScale& scale);
CheckResult check_asymptotics(const ValidationScale& scale);
CheckResult check_performance(const ValidationScale& scale);
CheckResult check_determinism(const ValidationScale& scale);

inline constexpr int kCheckCount = 11;

/// Runs check `id` (1-based, in the order declared above).
CheckResult run_check(int id, const ValidationScale& scale);

std::vector<CheckResult> run_all_checks(const ValidationScale& scale);

nlohmann::json to_json(const CheckResult& result);

/// "[PASS] 1 constants (0.001 s) ..." style line.
std::string summary_line(const CheckResult& result);

} // namespace bstsim
