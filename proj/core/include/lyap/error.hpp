#pragma once

#include <stdexcept>
#include <string>

namespace lyap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (range, size, shape).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input contained NaN or Inf.
class NonFiniteError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A matrix that must lie in GL(d) failed the invertibility threshold.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// The data do not allow a requested property to be certified
/// (degenerate top singular value, failed gap condition, ...).
class RefusalError : public Error {
public:
    using Error::Error;
};

}  // namespace lyap
