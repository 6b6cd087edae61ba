#pragma once

#include <stdexcept>
#include <string>

namespace permtest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two reference nodes coincide; the caller must use the degenerate test path.
class DegenerateNodes : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class NotAProbabilityVector : public Error {
 public:
  using Error::Error;
};

class InvalidPartition : public Error {
 public:
  using Error::Error;
};

/// Mixture null asked for with d > k or d < 1.
class InvalidShape : public Error {
 public:
  using Error::Error;
};

class EmptySample : public Error {
 public:
  using Error::Error;
};

/// The simplex cannot hold an alternative at the requested distance.
class InfeasibleDistance : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace permtest
