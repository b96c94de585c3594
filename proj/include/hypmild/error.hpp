#pragma once

#include <stdexcept>
#include <string>

namespace hypmild {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (negative time, p < 1, d < 2, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Hypothesis of a theorem-level routine violated (p <= d, contraction margin >= 1, ...).
class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// Fields or states living on different grids were combined.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Iterative procedure ran out of iterations.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

/// Calibration found no admissible constants.
class InfeasibleFit : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or constants file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace hypmild
