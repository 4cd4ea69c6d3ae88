#pragma once

#include <stdexcept>
#include <string>

namespace fda {

/// Broad failure class; the CLI maps each one to an exit code.
enum class ErrorKind {
  Argument,   // caller passed something out of range
  Data,       // input data violates a precondition (domain, rank, format)
  Numerical,  // decomposition or iteration failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::Argument, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A point fell outside the closed basis domain.
struct DomainError : DataError {
  using DataError::DataError;
};

/// Least-squares design for a curve does not have full column rank.
struct RankError : DataError {
  using DataError::DataError;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct CollinearityError : NumericalError {
  using NumericalError::NumericalError;
};

/// IRLS hit its iteration limit (or the weights degenerated).
struct ConvergenceError : NumericalError {
  ConvergenceError(const std::string& what, double last_deviance)
      : NumericalError(what), last_deviance_(last_deviance) {}
  double last_deviance() const noexcept { return last_deviance_; }

 private:
  double last_deviance_;
};

}  // namespace fda
