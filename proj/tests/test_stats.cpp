#include <doctest.h>

#include <cmath>
#include <vector>

#include "bstsim/errors.hpp"
#include "bstsim/rng.hpp"
#include "bstsim/stats.hpp"

using namespace bstsim;

TEST_CASE("running moments merge like one pass") {
    Xoshiro256 gen(1, 0);
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) {
        xs.push_back(exponential(gen) * 3.0 - 1.0);
    }
    RunningMoments all;
    RunningMoments left;
    RunningMoments right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 337 ? left : right).add(xs[i]);
    }
    RunningMoments merged = right;
    merged.merge(left);
    CHECK(merged.count() == all.count());
    CHECK(merged.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(merged.variance() == doctest::Approx(all.variance()).epsilon(1e-12));

    RunningMoments empty;
    empty.merge(all);
    CHECK(empty.mean() == all.mean());
    CHECK(RunningMoments{}.variance() == 0.0);
}

TEST_CASE("chi-square survival function") {
    CHECK(chi_square_sf(0.0, 3) == 1.0);
    CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chi_square_sf(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(chi_square_sf(1.0, 0) == 0.0);
}

TEST_CASE("goodness of fit pools sparse cells") {
    ProbabilityTable law{{{0}, 0.5}, {{1}, 0.4999}, {{2}, 0.0001}};
    CountTable observed{{{0}, 500}, {{1}, 499}, {{2}, 1}};
    const auto r = chi_square_gof(observed, law);
    CHECK(r.bins == 2);
    CHECK(r.dof == 1);
    CHECK(r.p_value > 0.5);

    CountTable impossible{{{0}, 10}, {{7}, 1}};
    CHECK(chi_square_gof(impossible, law).p_value == 0.0);
    CHECK_THROWS_AS(chi_square_gof({}, law), ContractViolation);
}

TEST_CASE("goodness of fit detects a biased sample") {
    ProbabilityTable law{{{0}, 0.5}, {{1}, 0.5}};
    CountTable observed{{{0}, 5300}, {{1}, 4700}};
    CHECK(chi_square_gof(observed, law).p_value < 1e-6);
}

TEST_CASE("homogeneity test") {
    CountTable a{{{0}, 500}, {{1}, 500}};
    CountTable b{{{0}, 510}, {{1}, 490}};
    CHECK(chi_square_homogeneity(a, b).p_value > 0.1);
    CountTable c{{{0}, 700}, {{1}, 300}};
    CHECK(chi_square_homogeneity(a, c).p_value < 1e-6);
}

TEST_CASE("KS statistic on reference quantiles") {
    std::vector<double> q;
    for (int i = 1; i <= 8; ++i) {
        q.push_back((i - 0.5) / 8.0);
    }
    CHECK(ks_statistic(q, Reference::Uniform01).D == doctest::Approx(1.0 / 16.0));

    std::vector<double> exp_q;
    for (int i = 1; i <= 8; ++i) {
        exp_q.push_back(-std::log1p(-(i - 0.5) / 8.0));
    }
    CHECK(ks_statistic(exp_q, Reference::Exponential1).D == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("KS statistic on a degenerate sample") {
    const std::vector<double> constant(10'000, 2.0);
    const auto r = ks_statistic(constant, Reference::Exponential1);
    CHECK(r.D >= 1.0 - std::exp(-2.0) - 1e-12);
    CHECK(r.p_value < 1e-12);
    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, Reference::Uniform01), ContractViolation);
    CHECK_THROWS_AS(ks_statistic(std::vector<double>(7, 0.5), Reference::Uniform01),
                    ContractViolation);
}

TEST_CASE("Kolmogorov survival function") {
    CHECK(kolmogorov_sf(0.0) == 1.0);
    // standard critical values
    CHECK(kolmogorov_sf(1.3580986393225505) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(kolmogorov_sf(1.6276236115189502) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(kolmogorov_sf(1.2238478702170825) == doctest::Approx(0.10).epsilon(1e-6));
    // both branches agree across the switch point
    CHECK(kolmogorov_sf(1.1799999) == doctest::Approx(kolmogorov_sf(1.18)).epsilon(1e-6));
    CHECK(kolmogorov_sf(0.3) > 0.999);
}

TEST_CASE("KS p-values are calibrated on samples from the reference") {
    Xoshiro256 gen(77, 0);
    int above = 0;
    constexpr int experiments = 200;
    for (int e = 0; e < experiments; ++e) {
        std::vector<double> xs(10'000);
        for (auto& x : xs) {
            x = exponential(gen);
        }
        above += ks_statistic(xs, Reference::Exponential1).p_value > 0.01 ? 1 : 0;
    }
    CHECK(above >= 0.98 * experiments);
}

TEST_CASE("reference CDFs") {
    CHECK(reference_cdf(Reference::Exponential1, -1.0) == 0.0);
    CHECK(reference_cdf(Reference::Exponential1, std::log(2.0)) == doctest::Approx(0.5));
    CHECK(reference_cdf(Reference::Gumbel, 0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(reference_cdf(Reference::Uniform01, 2.0) == 1.0);
}
