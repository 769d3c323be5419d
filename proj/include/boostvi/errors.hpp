#pragma once

#include <stdexcept>
#include <string>

namespace bvi {

/// Configuration or argument rejected before any computation ran.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative routine exhausted its budget. Carries the best estimate so far.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_estimate_(best) {}
    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// Non-finite value or mass estimate where the math guarantees finiteness.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every restart of a stochastic oracle diverged.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bvi
