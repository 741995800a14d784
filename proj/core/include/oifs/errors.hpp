#pragma once

#include <stdexcept>
#include <string>

namespace oifs {

/// Invalid user-supplied configuration or inconsistent inputs.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A query point lies outside the mesh rectangle.
class OutOfDomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Factorization failure or loss of finiteness during time integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schwarz iterates or time-integrated states became non-finite.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Malformed persisted data (bad magic, truncated payload, ...).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oifs
