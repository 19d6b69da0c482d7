#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace suglg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Planar site coordinates, one row per location.
using Locations = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad argument to an API call (shape mismatch, out-of-domain value).
struct ArgumentError : Error {
  using Error::Error;
};

/// A covariance or precision matrix failed to factorize.
struct FactorizationError : Error {
  using Error::Error;
};

/// A numerical routine did not reach its requested tolerance.
struct NumericalError : Error {
  using Error::Error;
};

/// Input data violates a structural invariant (duplicate sites, empty sets).
struct ValidationError : Error {
  using Error::Error;
};

/// Malformed input file.
struct FormatError : Error {
  FormatError(const std::string& what, long line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

struct InsufficientSampleError : Error {
  using Error::Error;
};

/// Operation requested on a model kind that lacks the required component.
struct KindError : Error {
  using Error::Error;
};

}  // namespace suglg
