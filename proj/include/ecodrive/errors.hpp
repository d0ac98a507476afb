#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ecodrive {

/// Raised when a parameter struct violates its documented invariants.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration (scenario JSON, coefficient files).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A kinematic segment with no defined duration (both end speeds zero).
class ZeroDurationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A trajectory whose samples are not kinematically consistent.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::size_t index, const std::string& what)
        : std::runtime_error("sample " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// No feasible speed trajectory exists; `binding()` names the constraint that closes the problem.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(std::string binding, const std::string& what)
        : std::runtime_error(what), binding_(std::move(binding)) {}

    const std::string& binding() const noexcept { return binding_; }

private:
    std::string binding_;
};

/// The exhaustive enumeration oracle would visit more paths than it is allowed to.
class EnumerationBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ecodrive
