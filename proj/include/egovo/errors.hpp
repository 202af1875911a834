#ifndef EGOVO_ERRORS_HPP
#define EGOVO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace egovo {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad parameters or inputs that make an operation meaningless.
struct ConfigError : Error {
  using Error::Error;
};

struct InvalidDepth : Error {
  using Error::Error;
};

struct BehindCamera : Error {
  using Error::Error;
};

/// Direct alignment could not produce a usable pose.
struct TrackingLost : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace egovo

#endif  // EGOVO_ERRORS_HPP
