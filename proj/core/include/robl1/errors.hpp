#pragma once

#include <stdexcept>
#include <string>

namespace robl1 {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, out-of-range options, bad files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Rank deficiency, singular systems, non-finite values produced by a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration would exceed its configured size cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace robl1
