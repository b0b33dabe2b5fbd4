#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hsp {

/// Argument outside the support of a density or an invalid parameter value.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent model, prior or run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unusable input data (missing cells, constant columns, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Not enough samples in the region an estimator needs.
class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(const std::string& what, std::size_t observed)
      : std::runtime_error(what), observed_(observed) {}
  std::size_t observed() const noexcept { return observed_; }

 private:
  std::size_t observed_;
};

}  // namespace hsp
