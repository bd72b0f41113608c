#pragma once

#include <stdexcept>
#include <string>

namespace vmc {

/// Invalid or missing configuration value; carries the offending field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Operating point outside the three-mode region (duty must lie in (0.5, 1)).
class RegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Design target that cannot be reached in three-mode operation.
class InfeasibleTarget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument to a pure computation (negative loss input, empty series, missing column).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced during time stepping.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called on a result that does not satisfy its precondition.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace vmc
