#pragma once

#include <stdexcept>
#include <string>

namespace degenctrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value failed.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Two objects built for different models or grids were combined.
class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// An iterative method hit its iteration cap or stagnated.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A computed quantity violated a mathematical invariant it must satisfy.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace degenctrl
