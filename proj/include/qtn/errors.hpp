#pragma once

#include <stdexcept>
#include <string>

namespace qtn {

// Root of the library's exception hierarchy. Every failure the library
// reports is one of the subclasses below, so callers can catch by category.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Index outside its valid range (grid index, site index, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

// Mismatched lengths, orders, chain lengths or local dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Densification requested beyond the configured size cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Invalid problem/run configuration. `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    explicit ConfigError(const std::string& what) : Error(what) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Feature exists in principle but not for these arguments (e.g. analytic
// shift operators for d != 2).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// NaN/Inf or non-convergence. `step()` is the time step index, -1 if none.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, long step = -1) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

// Adaptive integrator could not make progress.
class StiffnessError : public NumericalError {
public:
    StiffnessError(const std::string& what, double time_reached)
        : NumericalError(what), time_reached_(time_reached) {}
    double time_reached() const noexcept { return time_reached_; }

private:
    double time_reached_;
};

// Relative metric with a zero reference norm.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

// Trajectories cannot be matched in time.
class AlignmentError : public Error {
public:
    using Error::Error;
};

} // namespace qtn
