#include "bstsim/constants.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "bstsim/errors.hpp"

namespace bstsim {

double height_equation(double x) noexcept {
    return 2.0 * (x - 1.0) * std::exp(x) + 1.0;
}

double saturation_equation(double x) noexcept {
    return 2.0 * (x + 1.0) * std::exp(-x) - 1.0;
}

namespace {

void check_tolerance(double tolerance) {
    if (!(tolerance > 0.0 && tolerance <= 1e-6)) {
        throw ConfigError("solver tolerance must lie in (0, 1e-6]");
    }
}

template <typename F, typename DF>
double bracketed_root(F f, DF df, double lo, double hi, double tolerance) {
    double f_lo = f(lo);
    const double f_hi = f(hi);
    // fixed brackets; a sign change is guaranteed
    assert(f_lo * f_hi < 0.0);
    if (!(f_lo * f_hi < 0.0)) {
        throw NumericalRangeError("root is not bracketed");
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double step = f(x) / df(x);
        const double next = x - step;
        if (next == x || !std::isfinite(next)) {
            break;
        }
        x = next;
        if (std::abs(step) <= std::numeric_limits<double>::epsilon() * std::abs(x)) {
            break;
        }
    }
    // settle on the neighbouring double with the smallest residual
    double best = x;
    for (double candidate : {std::nextafter(x, lo - 1.0), std::nextafter(x, hi + 1.0)}) {
        if (std::abs(f(candidate)) < std::abs(f(best))) {
            best = candidate;
        }
    }
    return best;
}

} // namespace

RootPair solve_height_constants(double tolerance) {
    check_tolerance(tolerance);
    const double a = bracketed_root(
        height_equation, [](double x) { return 2.0 * x * std::exp(x); }, 0.1, 0.99, tolerance);
    return {a, 2.0 * a * std::exp(a)};
}

RootPair solve_saturation_constants(double tolerance) {
    check_tolerance(tolerance);
    const double alpha = bracketed_root(
        saturation_equation, [](double x) { return -2.0 * x * std::exp(-x); }, 1.0, 2.5,
        tolerance);
    return {alpha, 2.0 * alpha * std::exp(-alpha)};
}

ConstantsSet solve_constants(double tolerance) {
    const auto [a, b] = solve_height_constants(tolerance);
    const auto [alpha, beta] = solve_saturation_constants(tolerance);
    return {a, b, alpha, beta, height_equation(a), saturation_equation(alpha), tolerance};
}

double psi(double theta) {
    const double exponent = 2.0 * std::exp(theta) - 1.0;
    const double value = std::exp(exponent);
    if (!std::isfinite(value)) {
        throw NumericalRangeError("psi overflows at theta = " + std::to_string(theta));
    }
    return value;
}

double psi_reflected(double theta) {
    return psi(-theta);
}

double criticality_residual(double theta) {
    const double e = std::exp(theta);
    const double value = 2.0 * theta * e - (2.0 * e - 1.0);
    if (!std::isfinite(value)) {
        throw NumericalRangeError("criticality residual overflows at theta = " +
                                  std::to_string(theta));
    }
    return value;
}

double reflected_criticality_residual(double theta) {
    const double e = std::exp(-theta);
    const double value = -2.0 * theta * e - (2.0 * e - 1.0);
    if (!std::isfinite(value)) {
        throw NumericalRangeError("criticality residual overflows at theta = " +
                                  std::to_string(theta));
    }
    return value;
}

namespace {

double log_log(std::uint64_t n) {
    if (n < 3) {
        throw DomainError("recentring needs n >= 3 so that log log n > 0");
    }
    return std::log(std::log(static_cast<double>(n)));
}

} // namespace

double recentre_height(const ConstantsSet& c, std::uint64_t n, std::uint32_t H) {
    const double denom = log_log(n);
    return (c.b * std::log(static_cast<double>(n)) - c.a * H) / denom;
}

double recentre_height(std::uint64_t n, std::uint32_t H) {
    return recentre_height(default_constants(), n, H);
}

double recentre_saturation(const ConstantsSet& c, std::uint64_t n, std::uint32_t h) {
    const double denom = log_log(n);
    return (c.alpha * h - c.beta * std::log(static_cast<double>(n))) / denom;
}

double recentre_saturation(std::uint64_t n, std::uint32_t h) {
    return recentre_saturation(default_constants(), n, h);
}

const ConstantsSet& default_constants() {
    static const ConstantsSet constants = solve_constants(kDefaultTolerance);
    return constants;
}

nlohmann::json to_json(const ConstantsSet& c) {
    return {
        {"a", c.a},
        {"b", c.b},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"tolerance", c.tolerance},
        {"residuals",
         {{"height_equation", c.residual_a},
          {"saturation_equation", c.residual_alpha},
          {"criticality_a", criticality_residual(c.a)},
          {"reflected_criticality_alpha", reflected_criticality_residual(c.alpha)}}},
        {"identities",
         {{"b_minus_2ea_plus_1", c.b - (2.0 * std::exp(c.a) - 1.0)},
          {"beta_minus_1_plus_2e_neg_alpha", c.beta - (1.0 - 2.0 * std::exp(-c.alpha))},
          {"log_psi_a_minus_b", std::log(psi(c.a)) - c.b},
          {"log_psi_neg_alpha_plus_beta", std::log(psi(-c.alpha)) + c.beta},
          {"c_equals_b_over_a", c.b / c.a}}},
    };
}

} // namespace bstsim
