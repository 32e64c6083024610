#pragma once

#include <stdexcept>
#include <string>

namespace afc {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument values (violated preconditions, mismatched grids, ...).
class InvalidArgumentError : public Error {
  public:
    explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

/// Grid does not resolve the narrowest spectral feature.
class ResolutionError : public Error {
  public:
    ResolutionError(const std::string& msg, double required_spacing_hz)
        : Error(msg), required_spacing_hz(required_spacing_hz) {}
    double required_spacing_hz;
};

/// Extinction spectrum does not decay enough at the grid edges and no
/// tail extension was requested.
class TailTruncationError : public Error {
  public:
    TailTruncationError(const std::string& msg, double edge_fraction)
        : Error(msg), edge_fraction(edge_fraction) {}
    double edge_fraction;
};

/// Frequency response does not cover the input pulse spectrum.
class CoverageError : public Error {
  public:
    CoverageError(const std::string& msg, double contained_fraction)
        : Error(msg), contained_fraction(contained_fraction) {}
    double contained_fraction;
};

/// Non-finite values encountered during an iterative computation.
class NumericalFailureError : public Error {
  public:
    explicit NumericalFailureError(const std::string& msg) : Error(msg) {}
};

/// A bracketed minimum search found no interior minimum.
class NoMinimumError : public Error {
  public:
    explicit NoMinimumError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file. `line` is 1-based, 0 if not line-specific.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, long line = 0) : Error(msg), line(line) {}
    long line;
};

}  // namespace afc
