#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace karcher {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A scalar or matrix function was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The Jacobi eigensolver hit its sweep cap.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  NotSymmetric(const std::string& what, double relative_asymmetry)
      : Error(what), relative_asymmetry_(relative_asymmetry) {}
  double relative_asymmetry() const noexcept { return relative_asymmetry_; }

 private:
  double relative_asymmetry_;
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  /// The offending (smallest) eigenvalue.
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class NotCommuting : public Error {
 public:
  using Error::Error;
};

/// Invalid solver or experiment configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `matrix_index()` is set when a specific matrix is at fault.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t matrix_index = npos)
      : Error(what), matrix_index_(matrix_index) {}
  std::size_t matrix_index() const noexcept { return matrix_index_; }

 private:
  std::size_t matrix_index_;
};

}  // namespace karcher
