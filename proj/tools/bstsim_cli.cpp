// bstsim: command-line front end for the random BST / Yule tree toolkit.
//
// Exit codes: 0 success, 1 check failure, 2 usage error, 3 resource error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bstsim/analysis.hpp"
#include "bstsim/constants.hpp"
#include "bstsim/errors.hpp"
#include "bstsim/oracle.hpp"
#include "bstsim/profile.hpp"
#include "bstsim/validation.hpp"
#include "bstsim/yule.hpp"

namespace {

using namespace bstsim;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;

constexpr const char* kOutputDirEnv = "BSTSIM_OUTPUT_DIR";

struct RunConfig {
    std::string n_text;
    std::optional<std::uint64_t> seed;
    std::string members_text = "1";
    unsigned jobs = 1;
    double ratio = 1.05;
    double tolerance = kDefaultTolerance;
    std::string out;
    std::string format = "csv";
    bool check_lemma = false;
    bool quick = false;
    bool json = false;
    unsigned window = 3;
    std::string statistic = "joint";
    std::string k_text = "8";
    std::string trials_text = "100000";
    double theta = 0.0;
    int only = 0;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integer count that may be written in scientific notation ("1e9").
std::uint64_t parse_count(const std::string& text, const char* flag) {
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value) ||
        value < 0.0 || value != std::floor(value) || value > 9.2e18) {
        throw UsageError(std::string(flag) + " expects a non-negative integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(value);
}

std::uint64_t seed_or_warn(const RunConfig& cfg) {
    if (!cfg.seed) {
        std::cerr << "warning: no --seed given; using seed 0\n";
        return 0;
    }
    return *cfg.seed;
}

/// Output stream for --out (resolved against $BSTSIM_OUTPUT_DIR when
/// relative), or stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") {
            return;
        }
        std::filesystem::path target(path);
        if (target.is_relative()) {
            if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
                target = std::filesystem::path(dir) / target;
            }
        }
        file_ = std::make_unique<std::ofstream>(target, std::ios::binary | std::ios::trunc);
        if (!*file_) {
            throw std::ios_base::failure("cannot open output file " + target.string());
        }
    }

    std::ostream& stream() { return file_ ? *file_ : std::cout; }

    void flush() {
        stream().flush();
        if (!stream()) {
            throw std::ios_base::failure("write to output failed");
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

void require_format(const RunConfig& cfg, std::initializer_list<std::string_view> allowed) {
    for (const auto f : allowed) {
        if (cfg.format == f) {
            return;
        }
    }
    throw UsageError("--format " + cfg.format + " is not supported by this subcommand");
}

int cmd_constants(const RunConfig& cfg) {
    if (!(cfg.tolerance > 0.0 && cfg.tolerance <= 1e-6)) {
        throw UsageError("--tol must lie in (0, 1e-6]");
    }
    const ConstantsSet c = solve_constants(cfg.tolerance);
    Output out(cfg.out);
    out.stream() << to_json(c).dump(2) << '\n';
    out.flush();
    const bool ok = std::abs(c.residual_a) <= cfg.tolerance &&
                    std::abs(c.residual_alpha) <= cfg.tolerance;
    if (!ok) {
        std::cerr << "error: residuals exceed the tolerance\n";
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_run(const RunConfig& cfg) {
    require_format(cfg, {"csv", "json"});
    const std::uint64_t n_max = parse_count(cfg.n_text, "--n");
    if (n_max < 1) {
        throw UsageError("--n must be >= 1");
    }
    const std::uint64_t seed = seed_or_warn(cfg);
    const CheckpointSchedule schedule = checkpoint_schedule(n_max, cfg.ratio);
    Output out(cfg.out);
    std::ostream& os = out.stream();

    if (cfg.format == "csv") {
        os << trajectory_csv_header() << '\n';
        out.flush();
        run_trajectory({seed, 0}, n_max, schedule, [&](const TrajectoryRecord& r) {
            os << to_csv_row(recentred(r)) << '\n';
            out.flush();
        });
        return kExitOk;
    }
    nlohmann::json rows = nlohmann::json::array();
    run_trajectory({seed, 0}, n_max, schedule, [&](const TrajectoryRecord& raw) {
        const TrajectoryRecord r = recentred(raw);
        rows.push_back({{"n", r.n},
                        {"H", r.H},
                        {"h", r.h},
                        {"F", r.F},
                        {"R_height", r.R_height ? nlohmann::json(*r.R_height) : nullptr},
                        {"R_saturation", r.R_saturation ? nlohmann::json(*r.R_saturation) : nullptr}});
    });
    os << nlohmann::json{{"seed", seed}, {"n_max", n_max}, {"records", rows}}.dump(2) << '\n';
    out.flush();
    return kExitOk;
}

int cmd_fringe(const RunConfig& cfg) {
    require_format(cfg, {"csv", "json"});
    const std::uint64_t n_max = parse_count(cfg.n_text, "--n");
    if (n_max < 2) {
        throw UsageError("--n must be >= 2 for a fringe trace");
    }
    const std::uint64_t seed = seed_or_warn(cfg);
    const FringeTrace trace = fringe_trace({seed, 0}, n_max, cfg.window,
                                           checkpoint_schedule(n_max, cfg.ratio), cfg.check_lemma);
    Output out(cfg.out);
    std::ostream& os = out.stream();
    if (cfg.format == "csv") {
        os << fringe_csv_header(cfg.window) << '\n';
        for (const auto& row : trace.rows) {
            os << fringe_csv_row(row) << '\n';
        }
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : trace.rows) {
            rows.push_back({{"n", row.n}, {"levels", row.levels}});
        }
        nlohmann::json j{{"seed", seed},
                         {"n_max", n_max},
                         {"window", trace.window},
                         {"rows", rows},
                         {"min_F", trace.min_F},
                         {"max_F", trace.max_F},
                         {"visits_F2", trace.visits_F2}};
        if (trace.lemma_checked) {
            j["frontier_lemma"] = {{"applicable", trace.lemma_applicable},
                                   {"failures", trace.lemma_failures}};
        }
        os << j.dump(2) << '\n';
    }
    out.flush();
    if (cfg.check_lemma) {
        std::cerr << "frontier lemma: " << trace.lemma_failures << " failures in " << (n_max - 1)
                  << " states (" << trace.lemma_applicable << " applicable)\n";
        if (trace.lemma_failures > 0) {
            return kExitCheckFailed;
        }
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.seed.value_or(0);
    ValidationScale scale = cfg.quick ? ValidationScale::quick(seed) : ValidationScale::full(seed);
    scale.jobs = cfg.jobs;
    std::vector<CheckResult> results;
    if (cfg.only != 0) {
        if (cfg.only < 1 || cfg.only > kCheckCount) {
            throw UsageError("--only expects a check id in [1, " + std::to_string(kCheckCount) + "]");
        }
        results.push_back(run_check(cfg.only, scale));
        if (!cfg.json) {
            std::cerr << summary_line(results.back()) << '\n';
        }
    } else {
        for (int id = 1; id <= kCheckCount; ++id) {
            results.push_back(run_check(id, scale));
            if (!cfg.json) {
                std::cerr << summary_line(results.back()) << '\n';
            }
        }
    }
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
    }
    Output out(cfg.out);
    if (cfg.json) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& r : results) {
            nlohmann::json j = to_json(r);
            j.erase("seconds");  // wall time would break byte-identical reports
            checks.push_back(j);
        }
        out.stream() << nlohmann::json{{"seed", seed},
                                       {"scale", cfg.quick ? "quick" : "full"},
                                       {"passed", all},
                                       {"checks", checks}}
                            .dump(2)
                     << '\n';
    } else {
        for (const auto& r : results) {
            out.stream() << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": "
                         << r.detail << '\n';
        }
    }
    out.flush();
    return all ? kExitOk : kExitCheckFailed;
}

int cmd_exact(const RunConfig& cfg) {
    const std::uint64_t n = parse_count(cfg.n_text, "--n");
    const Statistic statistic = parse_statistic(cfg.statistic);
    Output out(cfg.out);
    out.stream() << to_json(exact_distribution(n, statistic)).dump() << '\n';
    out.flush();
    return kExitOk;
}

int cmd_compare(const RunConfig& cfg) {
    const std::uint64_t n = parse_count(cfg.n_text, "--n");
    const std::uint64_t trials = parse_count(cfg.trials_text, "--trials");
    const ComparisonReport report = compare_simulators(n, trials, {seed_or_warn(cfg), 0});
    Output out(cfg.out);
    out.stream() << to_json(report).dump(2) << '\n';
    out.flush();
    return report.saturation_mismatches == 0 && report.min_p_value() > 0.001 ? kExitOk
                                                                             : kExitCheckFailed;
}

int cmd_zeta(const RunConfig& cfg) {
    require_format(cfg, {"csv", "json"});
    const std::uint64_t n_stop = parse_count(cfg.n_text, "--n");
    const std::uint64_t m = parse_count(cfg.trials_text, "--trials");
    const auto samples = zeta_samples({seed_or_warn(cfg), 0}, n_stop, m);
    Output out(cfg.out);
    if (cfg.format == "csv") {
        out.stream() << "sample_index,value\n";
        for (std::size_t i = 0; i < samples.size(); ++i) {
            out.stream() << i << ',' << nlohmann::json(samples[i]).dump() << '\n';
        }
    } else {
        out.stream() << nlohmann::json{{"n_stop", n_stop}, {"samples", samples}}.dump() << '\n';
    }
    out.flush();
    return kExitOk;
}

int cmd_psi(const RunConfig& cfg) {
    const std::uint64_t trials = parse_count(cfg.trials_text, "--trials");
    const PsiReport report = psi_report(cfg.theta, trials, {seed_or_warn(cfg), 0});
    Output out(cfg.out);
    out.stream() << to_json(report).dump(2) << '\n';
    out.flush();
    return kExitOk;
}

int cmd_ensemble(const RunConfig& cfg) {
    EnsembleConfig config;
    config.n_max = parse_count(cfg.n_text, "--n");
    config.members = parse_count(cfg.members_text, "--members");
    config.base_seed = seed_or_warn(cfg);
    config.ratio = cfg.ratio;
    config.jobs = cfg.jobs;
    const EnsembleSummary summary = ensemble_run(config);
    Output out(cfg.out);
    out.stream() << to_json(summary).dump(2) << '\n';
    out.flush();
    return summary.complete ? kExitOk : kExitResource;
}

int cmd_hitting(const RunConfig& cfg) {
    const std::uint64_t n_max = parse_count(cfg.n_text, "--n");
    const std::uint64_t k_max = parse_count(cfg.k_text, "--k");
    const HittingTimes times = fringe_hitting_times({seed_or_warn(cfg), 0}, n_max, k_max);
    Output out(cfg.out);
    out.stream() << to_json(times).dump() << '\n';
    out.flush();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random binary search tree and Yule tree simulator"};
    app.require_subcommand(1);
    RunConfig cfg;

    const auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "64-bit base seed (default 0, with a warning)");
    };
    const auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "Output file (relative paths resolve against $" +
                                              std::string(kOutputDirEnv) + ")");
    };
    const auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", cfg.format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* constants = app.add_subcommand("constants", "Solve for a, b, alpha, beta (JSON)");
    constants->add_option("--tol", cfg.tolerance, "Solver tolerance, in (0, 1e-6]");
    add_out(constants);

    auto* run = app.add_subcommand("run", "Trajectory CSV: n,H,h,F,R_height,R_saturation");
    run->add_option("--n", cfg.n_text, "Final tree size (scientific notation accepted)")->required();
    run->add_option("--ratio", cfg.ratio, "Geometric checkpoint ratio (> 1)");
    add_seed(run);
    add_out(run);
    add_format(run);

    auto* fringe = app.add_subcommand("fringe", "Fringe trace CSV: n,F,F_minus1,F_minus2");
    fringe->add_option("--n", cfg.n_text, "Final tree size")->required();
    fringe->add_option("--ratio", cfg.ratio, "Geometric checkpoint ratio (> 1)");
    fringe->add_option("--window", cfg.window, "Levels below H to record")->check(CLI::Range(1, 64));
    fringe->add_flag("--check-lemma", cfg.check_lemma, "Check the frontier lemma at every step");
    add_seed(fringe);
    add_out(fringe);
    add_format(fringe);

    auto* validate = app.add_subcommand("validate", "Run the end-to-end checks");
    validate->add_flag("--quick", cfg.quick, "Small Monte Carlo sizes, 4 s.e. bands");
    validate->add_flag("--json", cfg.json, "Machine-readable report");
    validate->add_option("--jobs", cfg.jobs, "Worker threads for the ensemble check")
        ->check(CLI::Range(1, 1024));
    validate->add_option("--only", cfg.only, "Run a single check by id");
    add_seed(validate);
    add_out(validate);

    auto* exact = app.add_subcommand("exact", "Exact small-n distribution (JSON, rationals)");
    exact->add_option("--n", cfg.n_text, "Tree size, 2..12")->required();
    exact->add_option("--stat", cfg.statistic, "H, h, F or joint");
    add_out(exact);

    auto* compare = app.add_subcommand("compare", "Chi-square comparison of both simulators");
    compare->add_option("--n", cfg.n_text, "Tree size")->required();
    compare->add_option("--trials", cfg.trials_text, "Trials per simulator");
    add_seed(compare);
    add_out(compare);

    auto* zeta = app.add_subcommand("zeta", "Samples of T_n - log n (CSV: sample_index,value)");
    zeta->add_option("--n", cfg.n_text, "n_stop (>= 100)")->required();
    zeta->add_option("--trials", cfg.trials_text, "Number of samples");
    add_seed(zeta);
    add_out(zeta);
    add_format(zeta);

    auto* psi_cmd = app.add_subcommand("psi", "Monte Carlo check of psi(theta) (JSON)");
    psi_cmd->add_option("--theta", cfg.theta, "theta in [-2, 1.5]");
    psi_cmd->add_option("--trials", cfg.trials_text, "Number of Yule runs to time 1");
    add_seed(psi_cmd);
    add_out(psi_cmd);

    auto* ensemble = app.add_subcommand("ensemble", "Ensemble summary of recentred statistics");
    ensemble->add_option("--n", cfg.n_text, "Final tree size (>= 3)")->required();
    ensemble->add_option("--members", cfg.members_text, "Number of independent trajectories");
    ensemble->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::Range(1, 1024));
    ensemble->add_option("--ratio", cfg.ratio, "Geometric checkpoint ratio (> 1)");
    add_seed(ensemble);
    add_out(ensemble);

    auto* hitting = app.add_subcommand("hitting", "First hitting times of fringe sizes (JSON)");
    hitting->add_option("--n", cfg.n_text, "Final tree size")->required();
    hitting->add_option("--k", cfg.k_text, "Largest k (fringe size 2k) to track");
    add_seed(hitting);
    add_out(hitting);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*constants) {
            return cmd_constants(cfg);
        }
        if (*run) {
            return cmd_run(cfg);
        }
        if (*fringe) {
            return cmd_fringe(cfg);
        }
        if (*validate) {
            return cmd_validate(cfg);
        }
        if (*exact) {
            return cmd_exact(cfg);
        }
        if (*compare) {
            return cmd_compare(cfg);
        }
        if (*zeta) {
            return cmd_zeta(cfg);
        }
        if (*psi_cmd) {
            return cmd_psi(cfg);
        }
        if (*ensemble) {
            return cmd_ensemble(cfg);
        }
        if (*hitting) {
            return cmd_hitting(cfg);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ContractViolation& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return kExitResource;
    } catch (const NumericalRangeError& e) {
        std::cerr << "numerical range error: " << e.what() << '\n';
        return kExitResource;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitResource;
    }
    return kExitUsage;
}
