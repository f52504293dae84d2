#pragma once

#include <stdexcept>
#include <string>

namespace falsikit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (spec objects, run config keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A prior draw produced a non-finite or out-of-support value.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Time integration diverged or was given inconsistent inputs.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, double time = 0.0)
        : Error(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Malformed data file (time series, modal reference, ledger).
class ParseError : public Error {
public:
    using Error::Error;
};

/// No unfalsified model is left to weight.
class AllFalsifiedError : public Error {
public:
    using Error::Error;
};

} // namespace falsikit
