#pragma once

#include <stdexcept>
#include <string>

namespace mfid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed, or its contents could not be decoded.
class IoError : public Error {
public:
    using Error::Error;
};

/// The data has no spread where the operation needs some (constant corpus,
/// identical binning values, zero-variance PCA input).
class DegenerateData : public Error {
public:
    using Error::Error;
};

}  // namespace mfid
