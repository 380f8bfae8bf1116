#pragma once

#include <stdexcept>
#include <string>

namespace sdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Position outside the computational box, or a degenerate geometric query.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid scenario, turbine or model parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Estimator called on an empty or under-populated support.
class EstimatorError : public Error {
public:
    using Error::Error;
};

/// Time integration refused (positive relaxation rate).
class StabilityError : public Error {
public:
    using Error::Error;
};

/// Linear solver failed to reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Input outside the validity range of momentum theory.
class ModelError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sdm
