#pragma once

#include <stdexcept>
#include <string>

namespace hybridclust {

/// Bad input: malformed files, wrong dimensions, out-of-range arguments.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed: non-SPD matrix, non-convergent
/// integration, EM breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integration did not reach the requested tolerance; carries the
/// partial estimate so callers can report it.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double partial, double error_estimate)
        : NumericalError(what), partial_(partial), error_estimate_(error_estimate) {}

    double partial() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double partial_;
    double error_estimate_;
};

}  // namespace hybridclust
