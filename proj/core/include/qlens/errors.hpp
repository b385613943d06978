#pragma once

#include <stdexcept>
#include <string>

namespace qlens {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix dimensions inconsistent with the declared system sizes.
struct ShapeError : Error {
    using Error::Error;
};

// A transfer-function evaluation point too close to a pole.
struct PoleError : Error {
    double distance = 0.0;
    PoleError(const std::string& what, double dist) : Error(what), distance(dist) {}
};

// A structural hypothesis behind a closed form or rule does not hold.
struct HypothesisError : Error {
    double residual = 0.0;
    HypothesisError(const std::string& what, double res) : Error(what), residual(res) {}
};

// Internal cross-checks disagree (two routes to the same quantity diverged).
struct NumericalError : Error {
    using Error::Error;
};

// Domain-level failure (validation, ill-posed loop, unstable integration).
struct DomainError : Error {
    using Error::Error;
};

// File format problems; message carries the offending location.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace qlens
