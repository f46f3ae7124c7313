#pragma once

#include <stdexcept>
#include <string>

namespace eef {

/// Input outside an operation's mathematical domain (bad sizes, degenerate data).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Incompatible array shapes or layer configuration.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values produced during a forward/backward pass or a forecast.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The ODE integration left the overflow guard.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double blowup_time)
        : std::runtime_error(what), blowup_time_(blowup_time) {}

    double blowup_time() const noexcept { return blowup_time_; }

private:
    double blowup_time_;
};

/// Bad command line or configuration.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eef
