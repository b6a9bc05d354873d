#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bstsim/constants.hpp"
#include "bstsim/errors.hpp"
#include "bstsim/oracle.hpp"
#include "bstsim/stats.hpp"
#include "bstsim/yule.hpp"

using namespace bstsim;

namespace {

double harmonic(std::uint64_t m) {
    double s = 0.0;
    for (std::uint64_t j = 1; j <= m; ++j) {
        s += 1.0 / static_cast<double>(j);
    }
    return s;
}

bool within(const RunningMoments& m, double target, double bands = 3.0) {
    return std::abs(m.mean() - target) <= bands * m.standard_error();
}

} // namespace

TEST_CASE("birth times start at zero and increase") {
    const auto one = birth_times(RandomStream{0, 0}, 1);
    CHECK(one.times == std::vector<double>{0.0});
    CHECK(one.zeta_proxy == 0.0);

    const auto bt = birth_times(RandomStream{4, 0}, 1000);
    REQUIRE(bt.times.size() == 1000);
    CHECK(bt.times.front() == 0.0);
    CHECK(std::adjacent_find(bt.times.begin(), bt.times.end(), std::greater_equal<>{}) ==
          bt.times.end());
    CHECK(bt.zeta_proxy == doctest::Approx(bt.times.back() - std::log(1000.0)));
    CHECK(bt.centred() == doctest::Approx(bt.times.back() - harmonic(999)));
    CHECK_THROWS_AS(birth_times(RandomStream{0, 0}, 0), ContractViolation);
}

TEST_CASE("mean and variance of T_10") {
    Xoshiro256 gen(11, 0);
    RunningMoments m;
    for (int t = 0; t < 200'000; ++t) {
        m.add(birth_times(gen, 10).times.back());
    }
    CHECK(within(m, 2.8289682539682537));
    // Var T_n = sum_{j<n} 1/j^2 < pi^2 / 6
    CHECK(m.variance() <= std::numbers::pi * std::numbers::pi / 6.0);
    double var = 0.0;
    for (int j = 1; j < 10; ++j) {
        var += 1.0 / (j * j);
    }
    CHECK(m.variance() == doctest::Approx(var).epsilon(0.02));
}

TEST_CASE("scaled inter-birth gaps are unit exponentials") {
    const auto bt = birth_times(RandomStream{12, 0}, 20'001);
    std::vector<double> gaps;
    for (std::size_t k = 2; k <= 20'000; ++k) {
        gaps.push_back(static_cast<double>(k - 1) * (bt.times[k - 1] - bt.times[k - 2]));
    }
    CHECK(ks_statistic(gaps, Reference::Exponential1).p_value > 0.001);
}

TEST_CASE("zeta samples centre on H_{n-1} - log n") {
    CHECK(expected_zeta_proxy(1000) == doctest::Approx(harmonic(999) - std::log(1000.0)));
    const auto zs = zeta_samples(RandomStream{13, 0}, 1'000'000, 20'000);
    REQUIRE(zs.size() == 20'000);
    RunningMoments m;
    for (double z : zs) {
        m.add(z);
    }
    CHECK(within(m, expected_zeta_proxy(1'000'000)));
    CHECK_THROWS_AS(zeta_samples(RandomStream{0, 0}, 99, 1), ContractViolation);
    CHECK_THROWS_AS(zeta_samples(RandomStream{0, 0}, 1000, 0), ContractViolation);
}

TEST_CASE("zeta tail shortcut has the law of the plain increment sum") {
    constexpr std::uint64_t n = 20'000;
    const auto fast = zeta_samples(RandomStream{14, 0}, n, 4000);
    std::vector<double> plain;
    for (std::uint64_t i = 0; i < 4000; ++i) {
        plain.push_back(birth_times(RandomStream{14, 1 + i}, n).zeta_proxy);
    }
    CountTable a;
    CountTable b;
    auto cell = [](double z) { return CellKey{static_cast<std::uint64_t>(std::clamp(z + 3.0, 0.0, 12.0) * 4)}; };
    for (double z : fast) {
        ++a[cell(z)];
    }
    for (double z : plain) {
        ++b[cell(z)];
    }
    CHECK(chi_square_homogeneity(a, b).p_value > 0.001);
}

TEST_CASE("yule population growth") {
    const auto zero = simulate_yule(RandomStream{0, 0}, 0.0);
    CHECK(zero.size() == 1);
    CHECK(zero.positions.front() == 0);

    for (double horizon : {1.0, 2.0}) {
        Xoshiro256 gen(15, static_cast<std::uint64_t>(horizon));
        RunningMoments m;
        for (int t = 0; t < 40'000; ++t) {
            m.add(static_cast<double>(simulate_yule(gen, horizon).size()));
        }
        CHECK(within(m, std::exp(horizon)));
    }
}

TEST_CASE("yule events step the frontier by at most one") {
    std::size_t last_size = 1;
    std::int64_t last_min = 0;
    bool ok = true;
    YuleOptions opts;
    opts.on_event = [&](std::size_t, const ParticleSet& s) {
        ok = ok && s.size() == last_size + 1;
        ok = ok && s.min_position() >= last_min - 1 && s.min_position() <= last_min;
        last_size = s.size();
        last_min = s.min_position();
    };
    const auto end = simulate_yule(RandomStream{16, 0}, 6.0, opts);
    CHECK(ok);
    CHECK(end.size() == last_size);
    CHECK(end.frontier_size() >= 1);
}

TEST_CASE("yule walk couples with the explicit tree") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        ExplicitTree tree;
        YuleOptions opts;
        opts.on_event = [&](std::size_t index, const ParticleSet&) { tree.expand(index); };
        const auto set = simulate_yule(RandomStream{17, s}, 4.0, opts);
        REQUIRE(tree.n() == set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            CHECK(-set.positions[i] == static_cast<std::int64_t>(tree.nodes()[tree.leaves()[i]].depth));
        }
        const auto obs = observables_explicit(tree);
        CHECK(-set.min_position() == static_cast<std::int64_t>(obs.H));
        CHECK(-set.max_position() == static_cast<std::int64_t>(obs.h));
        CHECK(set.frontier_size() == obs.F);
    }
}

TEST_CASE("reflected displacement mirrors positions") {
    YuleOptions up;
    up.displacement = +1;
    const auto a = simulate_yule(RandomStream{18, 0}, 3.0);
    const auto b = simulate_yule(RandomStream{18, 0}, 3.0, up);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.positions[i] == -b.positions[i]);
    }
}

TEST_CASE("particle cap") {
    YuleOptions opts;
    opts.particle_cap = 100;
    CHECK_THROWS_AS(simulate_yule(RandomStream{19, 0}, 50.0, opts), ResourceError);
}

TEST_CASE("psi Monte Carlo matches the closed form") {
    const auto& c = default_constants();
    for (double theta : {0.0, c.a, -c.alpha}) {
        const auto r = psi_report(theta, 100'000, {20, 0});
        CHECK(std::abs(r.z_score) < 3.0);
        CHECK(r.closed_form == doctest::Approx(psi(theta)));
    }
    CHECK_THROWS_AS(psi_mc_estimate(1.6, 1000, {0, 0}), ContractViolation);
    CHECK_THROWS_AS(psi_mc_estimate(-2.1, 1000, {0, 0}), ContractViolation);
    CHECK_THROWS_AS(psi_mc_estimate(0.0, 999, {0, 0}), ContractViolation);
    const auto j = to_json(psi_report(0.0, 1000, {0, 0}));
    for (const char* key : {"theta", "mc_mean", "stderr", "closed_form", "z_score"}) {
        CHECK(j.contains(key));
    }
}
