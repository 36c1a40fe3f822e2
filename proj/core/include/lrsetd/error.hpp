#pragma once

#include <stdexcept>
#include <string>

namespace lrsetd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatches, out-of-range parameters, malformed configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File access and file-format problems.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Factorization failures and non-finite iterates.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrsetd
