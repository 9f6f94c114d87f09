#pragma once

#include <stdexcept>
#include <string>

namespace potwb {

/// Caller violated a documented precondition (sizes, counts, flags).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument lies outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data (files, samples).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Every observation has the same value; no scale can be estimated.
class DegenerateSampleError : public DataError {
 public:
  using DataError::DataError;
};

/// A numerical procedure did not produce a usable answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BracketExhaustedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnstableBootstrapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridInsufficientError : public NumericalError {
 public:
  GridInsufficientError(const std::string& what, double achieved)
      : NumericalError(what), achieved_(achieved) {}
  [[nodiscard]] double achieved_mass() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace potwb
