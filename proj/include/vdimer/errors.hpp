// errors.hpp - exception types shared by all modules
#pragma once

#include <stdexcept>
#include <string>

namespace vdimer {

// Input outside a documented precondition (bad parameters, bad schema).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Configuration document rejected before any computation.
struct ConfigError : DomainError {
    using DomainError::DomainError;
};

// A numerical contract did not hold at runtime.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegratorFailure : NumericalError {
    using NumericalError::NumericalError;
};

struct AmbiguityError : NumericalError {
    using NumericalError::NumericalError;
};

struct IllConditionedError : NumericalError {
    double kappa;
    IllConditionedError(const std::string& what, double k) : NumericalError(what), kappa(k) {}
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vdimer
