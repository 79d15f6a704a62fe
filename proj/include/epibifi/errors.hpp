#pragma once

#include <stdexcept>
#include <string>

namespace epibifi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented precondition (shapes, signs, missing keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A solver produced non-finite or inadmissible values.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long step = -1, int stage = -1, int node = -1)
      : Error(what), step_(step), stage_(stage), node_(node) {}
  long step() const { return step_; }
  int stage() const { return stage_; }
  int node() const { return node_; }

 private:
  long step_;
  int stage_;
  int node_;
};

class UndefinedR0Error : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Pivoted Cholesky ran out of numerical rank before the requested number of picks.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& what, int achievable)
      : Error(what), achievable_(achievable) {}
  int achievable() const { return achievable_; }

 private:
  int achievable_;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class UndefinedErrorNorm : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace epibifi
