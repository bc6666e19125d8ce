// errors.hpp - exception types shared by the library and the harness

#pragma once

#include <stdexcept>
#include <string>

namespace quapi {

// Precondition on an argument violated (negative frequency, bad index, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature failed to reach the requested tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved relative change " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Path ensemble or combinatorial budget exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent engine or experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace quapi
