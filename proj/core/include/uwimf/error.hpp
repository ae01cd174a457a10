#pragma once

#include <stdexcept>
#include <string>

namespace uwimf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, missing or inconsistent input (bad file, size mismatch, bad JSON).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// The water-parameter estimator could not produce a usable fit
/// (too few valid range bins, too many invalid pixels, diverging fits).
class EstimationInfeasible : public Error {
public:
    using Error::Error;
};

}  // namespace uwimf
