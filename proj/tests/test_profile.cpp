#include <doctest.h>

#include <cmath>
#include <vector>

#include "bstsim/errors.hpp"
#include "bstsim/profile.hpp"

using namespace bstsim;

namespace {

LevelProfile grown(std::uint64_t seed, Count n) {
    Xoshiro256 gen(seed, 0);
    LevelProfile p;
    while (p.n() < n) {
        p.step(gen);
    }
    return p;
}

} // namespace

TEST_CASE("initial profile is the root") {
    const LevelProfile p;
    CHECK(p.counts() == std::vector<Count>{1});
    CHECK(p.n() == 1);
    CHECK(p.observables() == Observables{0, 0, 1});
}

TEST_CASE("forced first two steps") {
    Xoshiro256 gen(1, 0);
    LevelProfile p;
    auto out = p.step(gen);
    CHECK(out.chosen_level == 0);
    CHECK(p.counts() == std::vector<Count>{0, 2});
    CHECK(p.observables() == Observables{1, 1, 2});

    out = p.step(gen);
    CHECK(out.chosen_level == 1);
    CHECK(p.counts() == std::vector<Count>{0, 1, 2});
    CHECK(p.observables() == Observables{2, 1, 2});
}

TEST_CASE("sample_leaf_level maps ranks to cumulative intervals") {
    const std::vector<Count> counts{0, 1, 1, 2};
    const auto p = LevelProfile::from_counts(counts);
    CHECK(p.sample_leaf_level(1) == 1);
    CHECK(p.sample_leaf_level(2) == 2);
    CHECK(p.sample_leaf_level(3) == 3);
    CHECK(p.sample_leaf_level(4) == 3);
    CHECK_THROWS_AS(p.sample_leaf_level(0), ContractViolation);
    CHECK_THROWS_AS(p.sample_leaf_level(5), ContractViolation);

    const std::vector<Count> flat{0, 0, 4};
    const auto q = LevelProfile::from_counts(flat);
    for (Count u = 1; u <= 4; ++u) {
        CHECK(q.sample_leaf_level(u) == 2);
    }
}

TEST_CASE("transition law from {0,1,1,2}: P(new H = 4) = 1/2") {
    // exhaustive over the four equally likely ranks
    const std::vector<Count> counts{0, 1, 1, 2};
    int deeper = 0;
    for (Count u = 1; u <= 4; ++u) {
        auto p = LevelProfile::from_counts(counts);
        if (p.expand(p.sample_leaf_level(u)).new_H == 4) {
            ++deeper;
        }
    }
    CHECK(deeper == 2);
}

TEST_CASE("observables of quoted small trees") {
    const std::vector<Count> t3{0, 1, 2};
    CHECK(LevelProfile::from_counts(t3).observables() == Observables{2, 1, 2});
    const std::vector<Count> balanced{0, 0, 4};
    CHECK(LevelProfile::from_counts(balanced).observables() == Observables{2, 2, 4});
    const std::vector<Count> root{1};
    CHECK(LevelProfile::from_counts(root).observables() == Observables{0, 0, 1});
}

TEST_CASE("from_counts rejects invalid profiles") {
    CHECK_THROWS_AS(LevelProfile::from_counts(std::vector<Count>{}), ContractViolation);
    CHECK_THROWS_AS(LevelProfile::from_counts(std::vector<Count>{0, 0}), ContractViolation);
    CHECK_THROWS_AS(LevelProfile::from_counts(std::vector<Count>{0, 3}), ContractViolation);
    // trailing zeros are dropped
    CHECK(LevelProfile::from_counts(std::vector<Count>{0, 2, 0, 0}).counts() ==
          std::vector<Count>{0, 2});
}

TEST_CASE("expand needs a leaf at the level") {
    LevelProfile p;
    CHECK_THROWS_AS(p.expand(1), ContractViolation);
}

TEST_CASE("step invariants hold along long trajectories") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Xoshiro256 gen(seed, 3);
        LevelProfile p;
        Observables prev = p.observables();
        for (int i = 0; i < 20'000; ++i) {
            const Count n_before = p.n();
            const StepOutcome out = p.step(gen);
            REQUIRE(p.n() == n_before + 1);
            REQUIRE(out.new_H - prev.H <= 1);
            REQUIRE(out.new_h - prev.h <= 1);
            REQUIRE(out.new_H >= prev.H);
            REQUIRE(out.new_h >= prev.h);
            REQUIRE(out.new_h <= out.new_H);
            REQUIRE(out.new_F % 2 == 0);
            REQUIRE(out.new_F >= 2);
            REQUIRE(Observables{out.new_H, out.new_h, out.new_F} == p.observables());
            prev = p.observables();
        }
        Count total = 0;
        const auto counts = p.counts();
        for (std::size_t j = 0; j < counts.size(); ++j) {
            total += counts[j];
            if (j < 63) {
                CHECK(counts[j] <= (Count{1} << j));
            }
            if (j < p.min_level()) {
                CHECK(counts[j] == 0);
            }
        }
        CHECK(total == p.n());
        CHECK(counts[p.min_level()] > 0);
        CHECK(counts.back() > 0);
    }
}

TEST_CASE("capacity growth keeps the sampling index consistent") {
    // a deep comb: always expand the deepest leaf
    LevelProfile p;
    for (int i = 0; i < 300; ++i) {
        p.expand(p.max_level());
    }
    CHECK(p.max_level() == 300);
    CHECK(p.min_level() == 1);
    CHECK(p.n() == 301);
    CHECK(p.sample_leaf_level(1) == 1);
    CHECK(p.sample_leaf_level(301) == 300);
    CHECK(p.sample_leaf_level(300) == 300);
    CHECK(p.sample_leaf_level(299) == 299);

    const auto copy = LevelProfile::from_counts(p.counts());
    CHECK(copy == p);
    for (Count u = 1; u <= p.n(); ++u) {
        REQUIRE(copy.sample_leaf_level(u) == p.sample_leaf_level(u));
    }
}

TEST_CASE("sample_leaf_level agrees with a linear scan") {
    const LevelProfile p = grown(11, 5000);
    const auto counts = p.counts();
    Count cumulative = 0;
    Depth level = 0;
    for (Count u = 1; u <= p.n(); ++u) {
        while (cumulative + counts[level] < u) {
            cumulative += counts[level];
            ++level;
        }
        REQUIRE(p.sample_leaf_level(u) == level);
    }
}

TEST_CASE("checkpoint_schedule") {
    CHECK(checkpoint_schedule(10, 2.0).targets == std::vector<Count>{1, 2, 4, 8, 10});
    CHECK(checkpoint_schedule(1, 1.05).targets == std::vector<Count>{1});
    CHECK(checkpoint_schedule(8, 2.0).targets == std::vector<Count>{1, 2, 4, 8});
    CHECK_THROWS_AS(checkpoint_schedule(10, 1.0), ConfigError);
    CHECK_THROWS_AS(checkpoint_schedule(10, 0.5), ConfigError);
    CHECK_THROWS_AS(checkpoint_schedule(0, 2.0), ConfigError);

    // length bounded by the number of powers of the ratio below n_max
    const auto big = checkpoint_schedule(1'000'000'000, 1.05);
    const double powers = std::log(1e9) / std::log(1.05);  // ~424.7
    CHECK(big.targets.size() <= static_cast<std::size_t>(powers) + 2);
    CHECK(big.targets.size() >= static_cast<std::size_t>(0.9 * powers));
    CHECK(big.targets.back() == 1'000'000'000);

    for (const double ratio : {1.05, 1.5, 2.0, 2.5, 10.0}) {
        const auto s = checkpoint_schedule(123'456, ratio);
        REQUIRE(s.targets.front() == 1);
        for (std::size_t i = 1; i < s.targets.size(); ++i) {
            REQUIRE(s.targets[i] > s.targets[i - 1]);
            if (i + 1 < s.targets.size()) {  // the appended n_max may sit closer
                REQUIRE(static_cast<double>(s.targets[i]) / static_cast<double>(s.targets[i - 1]) <=
                        std::ceil(ratio));
            }
        }
    }
}

TEST_CASE("run_trajectory emits one record per target") {
    const auto schedule = checkpoint_schedule(1000, 2.0);
    const auto records = run_trajectory({7, 0}, 1000, schedule);
    REQUIRE(records.size() == schedule.targets.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].n == schedule.targets[i]);
        CHECK_FALSE(records[i].R_height.has_value());
    }

    const auto single = run_trajectory({7, 0}, 1, checkpoint_schedule(1, 2.0));
    REQUIRE(single.size() == 1);
    CHECK(single[0].n == 1);
    CHECK(single[0].H == 0);
    CHECK(single[0].h == 0);
    CHECK(single[0].F == 1);

    const auto four = run_trajectory({3, 0}, 4, CheckpointSchedule{{4}, 2.0});
    REQUIRE(four.size() == 1);
    CHECK((four[0].H == 2 || four[0].H == 3));
}

TEST_CASE("run_trajectory steps to n_max when the schedule stops short") {
    std::vector<TrajectoryRecord> seen;
    run_trajectory({1, 0}, 50, CheckpointSchedule{{1, 10}, 2.0},
                   [&](const TrajectoryRecord& r) { seen.push_back(r); });
    CHECK(seen.size() == 2);
}

TEST_CASE("run_trajectory flushes partial output before a budget error") {
    std::vector<TrajectoryRecord> seen;
    const auto schedule = checkpoint_schedule(1000, 2.0);
    CHECK_THROWS_AS(run_trajectory({1, 0}, 1000, schedule,
                                   [&](const TrajectoryRecord& r) { seen.push_back(r); },
                                   RunLimits{100}),
                    ResourceError);
    REQUIRE_FALSE(seen.empty());
    CHECK(seen.back().n == 64);
}

TEST_CASE("trajectories are deterministic") {
    const auto schedule = checkpoint_schedule(100'000, 1.1);
    const auto a = run_trajectory({99, 2}, 100'000, schedule);
    const auto b = run_trajectory({99, 2}, 100'000, schedule);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(to_csv_row(a[i]) == to_csv_row(b[i]));
    }
}

TEST_CASE("empirical P(H_4 = 3) is 2/3") {
    Xoshiro256 gen(2024, 0);
    constexpr int trials = 300'000;
    int deep = 0;
    for (int t = 0; t < trials; ++t) {
        LevelProfile p;
        while (p.n() < 4) {
            p.step(gen);
        }
        deep += p.max_level() == 3 ? 1 : 0;
    }
    const double freq = static_cast<double>(deep) / trials;
    const double se = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / trials);
    CHECK(std::abs(freq - 2.0 / 3.0) <= 3 * se);
}

TEST_CASE("csv rows") {
    CHECK(trajectory_csv_header() == "n,H,h,F,R_height,R_saturation");
    TrajectoryRecord r{1, 0, 0, 1, std::nullopt, std::nullopt};
    CHECK(to_csv_row(r) == "1,0,0,1,,");
    r = {8, 4, 2, 4, 0.5, -1.25};
    CHECK(to_csv_row(r) == "8,4,2,4,0.5,-1.25");
}
