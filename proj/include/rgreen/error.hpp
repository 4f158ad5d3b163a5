#pragma once

#include <stdexcept>
#include <string>

namespace rgreen {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dynamical operation was asked to act with a map whose resultant vanishes.
class DegenerateMapError : public Error {
 public:
  explicit DegenerateMapError(const std::string& what) : Error(what) {}
  DegenerateMapError(const std::string& what, std::size_t index)
      : Error(what + " (orbit index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_ = 0;
};

class RootFindError : public Error {
 public:
  using Error::Error;
};

/// A parameter left the domain of its driver or family.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t index)
      : Error(what + " (orbit index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Numerical pipeline failure that is not a precondition violation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The driver fails the integrability diagnostics and the caller did not force the run.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

}  // namespace rgreen
