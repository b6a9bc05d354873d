#pragma once

#include <stdexcept>
#include <string>

namespace bstsim {

/// Caller broke an operation's precondition (index out of range, empty input).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid configuration value, e.g. a checkpoint ratio <= 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Floating point overflow or a non-finite intermediate.
class NumericalRangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// A size, step or population cap was exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bstsim
