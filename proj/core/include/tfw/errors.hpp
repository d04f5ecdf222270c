#pragma once

#include <stdexcept>
#include <string>

namespace tfw {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to a public operation (odd grid size, negative length, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Field contains NaN or Inf where a finite field is required.
class NonFiniteField : public Error {
 public:
  using Error::Error;
};

/// Periodic Poisson source with a non-vanishing mean.
class NonNeutralSource : public Error {
 public:
  using Error::Error;
};

/// Nuclear smearing radius does not fit in half the cell.
class ShapeTooWide : public Error {
 public:
  using Error::Error;
};

/// Configuration without any discrete nucleus where one is required.
class EmptyConfiguration : public Error {
 public:
  using Error::Error;
};

/// The nonlinear iteration left the positive cone and could not recover.
class NegativeDensity : public Error {
 public:
  using Error::Error;
};

/// Linearised solver stagnated.
class SingularOperator : public Error {
 public:
  using Error::Error;
};

/// Decay fit requested on too few usable points.
class TooFewPoints : public Error {
 public:
  using Error::Error;
};

/// Malformed field dump.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tfw
