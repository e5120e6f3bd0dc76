#pragma once

#include <stdexcept>
#include <string>

namespace sscirc {

/// Bad order, out-of-range index, non-finite parameter, malformed input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its stopping criteria.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a result contradicts a proven identity (e.g. a diagonally
/// dominated tensor that fails the SOS test). Always a bug upstream.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace sscirc
