#pragma once

#include <stdexcept>
#include <string>

namespace locfft {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents are malformed or use an unsupported encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Image / window / grid dimensions are inconsistent.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied parameter is out of its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Not enough observations for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Input carries no signal (e.g. an all-zero spectrum).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during an iterative solve.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace locfft
