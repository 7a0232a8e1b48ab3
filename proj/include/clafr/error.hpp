#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace clafr {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf, non-convergence or a degenerate numeric input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Jacobi SVD ran out of sweeps.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, int sweeps)
      : NumericalError(what), sweeps_(sweeps) {}
  int sweeps() const noexcept { return sweeps_; }

 private:
  int sweeps_;
};

/// All singular values of the classifier weights are zero.
class DegenerateWeightsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed binary tensor file.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Malformed CSV or config text. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) +
              (col ? ", column " + std::to_string(col) : std::string()) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Filesystem failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or missing required setting.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined for the supplied inputs (e.g. empty score set).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// API used inconsistently, e.g. comparing scores from different subspaces.
class MisuseError : public Error {
 public:
  using Error::Error;
};

}  // namespace clafr
