#pragma once

#include <cstdint>

#include <json.hpp>

namespace bstsim {

inline constexpr double kDefaultTolerance = 1e-12;

/// Recentring constants of the height and saturation level.
///
/// a solves 2(a - 1)e^a + 1 = 0 with b = 2a e^a; alpha solves
/// 2(alpha + 1)e^(-alpha) - 1 = 0 with beta = 2 alpha e^(-alpha).
/// a is the critical parameter of psi and b = log psi(a); alpha and -beta
/// play the same roles for the reflected walk.
struct ConstantsSet {
    double a = 0.0;
    double b = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double residual_a = 0.0;      // 2(a - 1)e^a + 1
    double residual_alpha = 0.0;  // 2(alpha + 1)e^(-alpha) - 1
    double tolerance = kDefaultTolerance;
};

struct RootPair {
    double root = 0.0;
    double value = 0.0;
};

/// (a, b). Bisection on [0.1, 0.99] down to `tolerance`, then Newton polish.
/// tolerance must lie in (0, 1e-6].
RootPair solve_height_constants(double tolerance = kDefaultTolerance);

/// (alpha, beta). Bisection on [1.0, 2.5], then Newton polish.
RootPair solve_saturation_constants(double tolerance = kDefaultTolerance);

ConstantsSet solve_constants(double tolerance = kDefaultTolerance);

/// Defining functions of a and alpha.
double height_equation(double x) noexcept;      // 2(x - 1)e^x + 1
double saturation_equation(double x) noexcept;  // 2(x + 1)e^(-x) - 1

/// psi(theta) = E sum_{u in N(1)} e^{-theta X_u(1)} = exp(2e^theta - 1).
/// Throws NumericalRangeError on overflow.
double psi(double theta);

/// psi of the walk with +1 displacements: exp(2e^(-theta) - 1).
double psi_reflected(double theta);

/// theta psi'(theta)/psi(theta) - log psi(theta) = 2 theta e^theta - (2e^theta - 1).
double criticality_residual(double theta);

/// Same residual for psi_reflected: -2 theta e^(-theta) - (2e^(-theta) - 1).
double reflected_criticality_residual(double theta);

/// (b log n - a H) / log log n. Throws DomainError for n < 3.
double recentre_height(std::uint64_t n, std::uint32_t H);
double recentre_height(const ConstantsSet& c, std::uint64_t n, std::uint32_t H);

/// (alpha h - beta log n) / log log n. Throws DomainError for n < 3.
double recentre_saturation(std::uint64_t n, std::uint32_t h);
double recentre_saturation(const ConstantsSet& c, std::uint64_t n, std::uint32_t h);

/// Constants solved once at the default tolerance.
const ConstantsSet& default_constants();

nlohmann::json to_json(const ConstantsSet& c);

} // namespace bstsim
