#pragma once

#include <stdexcept>
#include <string>

namespace besovlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A coefficient produced a non-finite value or violated its declared bounds.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// An object lacks data an operation needs (e.g. no retained noise).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite test-function or weight evaluation during estimation.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for a regression.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Exponent arithmetic whose hypotheses cannot hold.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Bad command line, config file or scenario name.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace besovlab
