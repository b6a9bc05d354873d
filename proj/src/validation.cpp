#include "bstsim/validation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "bstsim/analysis.hpp"
#include "bstsim/constants.hpp"
#include "bstsim/oracle.hpp"
#include "bstsim/profile.hpp"
#include "bstsim/stats.hpp"
#include "bstsim/yule.hpp"

namespace bstsim {

ValidationScale ValidationScale::full(std::uint64_t seed) {
    ValidationScale s;
    s.seed = seed;
    return s;
}

ValidationScale ValidationScale::quick(std::uint64_t seed) {
    ValidationScale s;
    s.seed = seed;
    s.oracle_trials = 10'000;
    s.psi_trials = 10'000;
    s.zeta_samples = 10'000;
    s.zeta_n = 1'000'000;
    s.lemma_steps = 1'000'000;
    s.fringe_steps = 10'000'000;
    s.fringe_seeds = 5;
    s.fringe_required = 4;
    s.gamma_trials = 10'000;
    s.ensemble_members = 20;
    s.ensemble_n = 100'000;
    s.perf_steps = 10'000'000;
    s.se_band = 4.0;
    s.enforce_budgets = false;
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

// Stream indices are spaced per check so no two checks share a stream.
constexpr std::uint64_t kStreamBlock = 1'000'000;

RandomStream stream_for(const ValidationScale& scale, int check, std::uint64_t index = 0) {
    return {scale.seed, static_cast<std::uint64_t>(check) * kStreamBlock + index};
}

CheckResult timed(int id, std::string name, double budget, const ValidationScale& scale,
                  const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    r.budget_seconds = budget;
    const auto start = Clock::now();
    body(r);
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (scale.enforce_budgets && budget > 0.0 && r.seconds > budget) {
        r.passed = false;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("runtime budget exceeded");
    }
    return r;
}

std::string fmt(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

bool rounds_to(double value, int decimals, long long expected_scaled) {
    return std::llround(value * std::pow(10.0, decimals)) == expected_scaled;
}

} // namespace

CheckResult check_constants(const ValidationScale& scale) {
    return timed(1, "constants", 0.5, scale, [](CheckResult& r) {
        const ConstantsSet c = solve_constants(1e-12);
        const double crit_a = criticality_residual(c.a);
        const double crit_alpha = reflected_criticality_residual(c.alpha);
        const bool digits = rounds_to(c.a, 5, 76804) && rounds_to(c.b, 5, 331107) &&
                            rounds_to(c.alpha, 4, 16783) && rounds_to(c.beta, 4, 6266);
        const bool residuals = std::abs(c.residual_a) < 1e-12 && std::abs(c.residual_alpha) < 1e-12;
        const bool critical = std::abs(crit_a) < 1e-10 && std::abs(crit_alpha) < 1e-10;
        r.passed = digits && residuals && critical;
        r.metrics = to_json(c);
        r.detail = "a=" + fmt(c.a, 10) + " b=" + fmt(c.b, 10) + " alpha=" + fmt(c.alpha, 10) +
                   " beta=" + fmt(c.beta, 10);
        if (!digits) {
            r.detail += "; printed digits not reproduced";
        }
        if (!residuals) {
            r.detail += "; defining-equation residual >= 1e-12";
        }
        if (!critical) {
            r.detail += "; criticality residual >= 1e-10";
        }
    });
}

CheckResult check_small_n_exactness(const ValidationScale& scale) {
    return timed(2, "small-n exactness", 1.0, scale, [](CheckResult& r) {
        const auto expect = [](Statistic s, std::map<CellKey, Rational> entries) {
            return exact_distribution(4, s).entries == entries;
        };
        const bool h4 = expect(Statistic::H, {{{2}, Rational(1, 3)}, {{3}, Rational(2, 3)}});
        const bool s4 = expect(Statistic::h, {{{1}, Rational(2, 3)}, {{2}, Rational(1, 3)}});
        const bool f4 = expect(Statistic::F, {{{2}, Rational(2, 3)}, {{4}, Rational(1, 3)}});
        bool enumeration = true;
        for (Count n = 2; n <= 5; ++n) {
            enumeration = enumeration &&
                          enumerate_sequences(n).entries ==
                              exact_distribution(n, Statistic::Joint).entries;
        }
        r.passed = h4 && s4 && f4 && enumeration;
        r.metrics = {{"H4", h4}, {"h4", s4}, {"F4", f4}, {"enumeration_n_le_5", enumeration}};
        r.detail = r.passed ? "H4, h4, F4 exact; DP equals sequence enumeration for n <= 5"
                            : "mismatch: " + r.metrics.dump();
    });
}

CheckResult check_simulator_vs_oracle(const ValidationScale& scale) {
    return timed(3, "simulator vs oracle", 120.0, scale, [&](CheckResult& r) {
        r.passed = true;
        double min_p = 1.0;
        nlohmann::json reports = nlohmann::json::array();
        std::uint64_t index = 0;
        for (const Count n : {4, 5, 8}) {
            const ComparisonReport rep =
                compare_simulators(n, scale.oracle_trials, stream_for(scale, 3, index++));
            for (const auto& s : rep.statistics) {
                const double p = std::min(s.profile_vs_exact.p_value, s.explicit_vs_exact.p_value);
                min_p = std::min(min_p, p);
                r.passed = r.passed && p > 0.001;
            }
            r.passed = r.passed && rep.saturation_mismatches == 0;
            reports.push_back(to_json(rep));
        }
        r.metrics = {{"min_p_value", min_p}, {"reports", reports}};
        r.detail = "min chi-square p vs exact law = " + fmt(min_p) + " (threshold 0.001)";
    });
}

CheckResult check_psi_monte_carlo(const ValidationScale& scale) {
    return timed(4, "psi Monte Carlo", 120.0, scale, [&](CheckResult& r) {
        const ConstantsSet& c = default_constants();
        r.passed = true;
        nlohmann::json rows = nlohmann::json::array();
        std::uint64_t index = 0;
        for (const double theta : {0.0, 0.5, c.a, -c.alpha}) {
            const PsiReport rep = psi_report(theta, scale.psi_trials, stream_for(scale, 4, index++));
            r.passed = r.passed && std::abs(rep.z_score) <= scale.se_band;
            rows.push_back(to_json(rep));
            r.detail += "theta=" + fmt(theta, 5) + " z=" + fmt(rep.z_score, 3) + " ";
        }
        r.metrics = {{"reports", rows}, {"band_se", scale.se_band}};
    });
}

CheckResult check_zeta_distribution(const ValidationScale& scale) {
    return timed(5, "zeta ~ Exp(1)", 60.0, scale, [&](CheckResult& r) {
        const auto samples = zeta_samples(stream_for(scale, 5), scale.zeta_n, scale.zeta_samples);
        RunningMoments m;
        for (const double x : samples) {
            m.add(x);
        }
        const KsResult ks = ks_statistic(samples, Reference::Exponential1);
        const double z = (m.mean() - 1.0) / m.standard_error();
        r.passed = ks.p_value > 0.01 && std::abs(z) <= scale.se_band;

        const KsResult gumbel = ks_statistic(samples, Reference::Gumbel);
        const double expected = expected_zeta_proxy(scale.zeta_n);
        const auto negative =
            std::count_if(samples.begin(), samples.end(), [](double x) { return x < 0.0; });
        r.metrics = {{"ks_exp1", {{"D", ks.D}, {"p", ks.p_value}}},
                     {"mean", m.mean()},
                     {"stderr", m.standard_error()},
                     {"z_vs_1", z},
                     {"diagnostics",
                      {{"ks_gumbel", {{"D", gumbel.D}, {"p", gumbel.p_value}}},
                       {"expected_mean_H_n_minus_1_minus_log_n", expected},
                       {"z_vs_expected_mean", (m.mean() - expected) / m.standard_error()},
                       {"fraction_negative",
                        static_cast<double>(negative) / static_cast<double>(samples.size())}}}};
        r.detail = "KS vs Exp(1): D=" + fmt(ks.D, 4) + " p=" + fmt(ks.p_value, 3) +
                   "; mean=" + fmt(m.mean(), 5) + " (z vs 1 = " + fmt(z, 4) +
                   "); KS vs Gumbel p=" + fmt(gumbel.p_value, 3);
    });
}

CheckResult check_frontier_lemma(const ValidationScale& scale) {
    return timed(6, "frontier lemma", 60.0, scale, [&](CheckResult& r) {
        const FringeTrace trace =
            fringe_trace(stream_for(scale, 6), scale.lemma_steps + 1, 3,
                         checkpoint_schedule(scale.lemma_steps + 1, 2.0), true);
        Count enumerated = 0;
        Count enumerated_failures = 0;
        for (Count n = 2; n <= 10; ++n) {
            for (const auto& [counts, weight] : profile_distribution(n)) {
                ++enumerated;
                if (frontier_lemma_check(LevelProfile::from_counts(counts)) == LemmaVerdict::Fail) {
                    ++enumerated_failures;
                }
            }
        }
        r.passed = trace.lemma_failures == 0 && enumerated_failures == 0;
        r.metrics = {{"trajectory_states", scale.lemma_steps},
                     {"trajectory_applicable", trace.lemma_applicable},
                     {"trajectory_failures", trace.lemma_failures},
                     {"enumerated_states", enumerated},
                     {"enumerated_failures", enumerated_failures}};
        r.detail = std::to_string(trace.lemma_failures) + " failures in " +
                   std::to_string(scale.lemma_steps) + " steps (" +
                   std::to_string(trace.lemma_applicable) + " applicable), " +
                   std::to_string(enumerated_failures) + " in " + std::to_string(enumerated) +
                   " enumerated states";
    });
}

CheckResult check_fringe_behaviour(const ValidationScale& scale) {
    return timed(7, "fringe behaviour", 300.0, scale, [&](CheckResult& r) {
        bool min_is_two = true;
        std::uint64_t reached_eight = 0;
        nlohmann::json runs = nlohmann::json::array();
        const Count n_max = scale.fringe_steps + 1;
        for (std::uint64_t s = 0; s < scale.fringe_seeds; ++s) {
            const FringeTrace t =
                fringe_trace(stream_for(scale, 7, s), n_max, 3, checkpoint_schedule(n_max, 2.0));
            min_is_two = min_is_two && t.min_F == 2;
            reached_eight += t.max_F >= 8 ? 1 : 0;
            runs.push_back({{"min_F", t.min_F}, {"max_F", t.max_F}, {"visits_F2", t.visits_F2}});
        }
        r.passed = min_is_two && reached_eight >= scale.fringe_required;
        r.metrics = {{"runs", runs}, {"reached_eight", reached_eight}};
        r.detail = "min F = 2 in all runs: " + std::string(min_is_two ? "yes" : "no") +
                   "; max F >= 8 in " + std::to_string(reached_eight) + "/" +
                   std::to_string(scale.fringe_seeds) + " (need " +
                   std::to_string(scale.fringe_required) + ")";
    });
}

CheckResult check_gamma_race(const ValidationScale& scale) {
    return timed(8, "gamma race", 30.0, scale, [&](CheckResult& r) {
        r.passed = true;
        nlohmann::json rows = nlohmann::json::array();
        for (const std::uint64_t k : {1, 2, 4}) {
            const Estimate e = gamma_mc(k, scale.gamma_trials, stream_for(scale, 8, k));
            const double exact = gamma_lower_bound(k);
            const double z = (e.mean - exact) / e.standard_error;
            r.passed = r.passed && std::abs(z) <= scale.se_band;
            rows.push_back({{"k", k}, {"estimate", e.mean}, {"stderr", e.standard_error},
                            {"closed_form", exact}, {"z", z}});
            r.detail += "k=" + std::to_string(k) + " z=" + fmt(z, 3) + " ";
        }
        r.metrics = {{"rows", rows}};
    });
}

CheckResult check_asymptotics(const ValidationScale& scale) {
    return timed(9, "asymptotics", 600.0, scale, [&](CheckResult& r) {
        EnsembleConfig config;
        config.n_max = scale.ensemble_n;
        config.members = scale.ensemble_members;
        config.base_seed = scale.seed ^ 0x9e3779b97f4a7c15ULL;
        config.jobs = scale.jobs;
        const EnsembleSummary s = ensemble_run(config);
        const CheckpointStats& last = s.checkpoints.back();
        const double rh = last.r_height.moments.mean();
        const double rs = last.r_saturation.moments.mean();
        const double fh = s.fluctuating_fraction_height();
        const double fs = s.fluctuating_fraction_saturation();
        r.passed = s.complete && rh >= 0.5 && rh <= 2.5 && rs >= 0.5 && rs <= 2.5 && fh >= 0.99 &&
                   fs >= 0.99;
        r.metrics = {{"n", last.n},
                     {"members", s.member_count()},
                     {"mean_R_height", rh},
                     {"mean_R_saturation", rs},
                     {"fluctuating_fraction_height", fh},
                     {"fluctuating_fraction_saturation", fs}};
        r.detail = "n=" + std::to_string(last.n) + " mean R_height=" + fmt(rh, 4) +
                   " mean R_saturation=" + fmt(rs, 4) + " fluctuating " + fmt(fh, 3) + "/" +
                   fmt(fs, 3);
    });
}

CheckResult check_performance(const ValidationScale& scale) {
    return timed(10, "performance", 0.0, scale, [&](CheckResult& r) {
        Xoshiro256 gen(stream_for(scale, 10));
        LevelProfile profile;
        const auto start = Clock::now();
        Count sink = 0;
        for (std::uint64_t i = 0; i < scale.perf_steps; ++i) {
            sink += profile.step(gen).new_F;
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        const double rate = static_cast<double>(scale.perf_steps) / seconds;
        r.passed = rate >= 5e6;
        r.metrics = {{"steps", scale.perf_steps},
                     {"seconds", seconds},
                     {"steps_per_second", rate},
                     {"projected_seconds_for_1e9", 1e9 / rate},
                     {"checksum", sink}};
        r.detail = fmt(rate / 1e6, 4) + "M steps/s; 1e9 steps in ~" + fmt(1e9 / rate, 3) + " s";
    });
}

CheckResult check_determinism(const ValidationScale& scale) {
    return timed(11, "determinism", 0.0, scale, [&](CheckResult& r) {
        const RandomStream stream = stream_for(scale, 11);
        const auto trajectory = [&] {
            std::string out;
            run_trajectory(stream, 100'000, checkpoint_schedule(100'000, 1.05),
                           [&](const TrajectoryRecord& rec) {
                               out += to_csv_row(recentred(rec));
                               out += '\n';
                           });
            return out;
        };
        const auto fringe = [&] {
            const auto t = fringe_trace(stream, 100'000, 3, checkpoint_schedule(100'000, 1.1));
            std::string out;
            for (const auto& row : t.rows) {
                out += fringe_csv_row(row) + '\n';
            }
            return out;
        };
        const auto ensemble = [&](unsigned jobs) {
            EnsembleConfig config;
            config.n_max = 20'000;
            config.members = 6;
            config.base_seed = scale.seed;
            config.jobs = jobs;
            return to_json(ensemble_run(config)).dump();
        };
        const auto psi_json = [&] { return to_json(psi_report(0.5, 2'000, stream)).dump(); };

        const bool same_trajectory = trajectory() == trajectory();
        const bool same_fringe = fringe() == fringe();
        const bool same_ensemble = ensemble(1) == ensemble(3);
        const bool same_psi = psi_json() == psi_json();
        r.passed = same_trajectory && same_fringe && same_ensemble && same_psi;
        r.metrics = {{"trajectory", same_trajectory},
                     {"fringe", same_fringe},
                     {"ensemble_jobs_1_vs_3", same_ensemble},
                     {"psi", same_psi}};
        r.detail = r.passed ? "repeated runs byte-identical" : "mismatch: " + r.metrics.dump();
    });
}

CheckResult run_check(int id, const ValidationScale& scale) {
    switch (id) {
    case 1:
        return check_constants(scale);
    case 2:
        return check_small_n_exactness(scale);
    case 3:
        return check_simulator_vs_oracle(scale);
    case 4:
        return check_psi_monte_carlo(scale);
    case 5:
        return check_zeta_distribution(scale);
    case 6:
        return check_frontier_lemma(scale);
    case 7:
        return check_fringe_behaviour(scale);
    case 8:
        return check_gamma_race(scale);
    case 9:
        return check_asymptotics(scale);
    case 10:
        return check_performance(scale);
    case 11:
        return check_determinism(scale);
    default:
        break;
    }
    throw std::out_of_range("no check with id " + std::to_string(id));
}

std::vector<CheckResult> run_all_checks(const ValidationScale& scale) {
    std::vector<CheckResult> results;
    for (int id = 1; id <= kCheckCount; ++id) {
        results.push_back(run_check(id, scale));
    }
    return results;
}

nlohmann::json to_json(const CheckResult& result) {
    return {{"id", result.id},           {"name", result.name},
            {"passed", result.passed},   {"detail", result.detail},
            {"seconds", result.seconds}, {"budget_seconds", result.budget_seconds},
            {"metrics", result.metrics}};
}

std::string summary_line(const CheckResult& result) {
    std::ostringstream out;
    out << (result.passed ? "[PASS] " : "[FAIL] ") << result.id << ' ' << result.name << " ("
        << fmt(result.seconds, 3) << " s";
    if (result.budget_seconds > 0.0) {
        out << ", budget " << fmt(result.budget_seconds, 3) << " s";
    }
    out << ") " << result.detail;
    return out.str();
}

} // namespace bstsim
