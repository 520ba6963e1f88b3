#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A point was evaluated outside the workspace rectangle.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A density did not carry unit (or any) mass.
class NormalizationError : public Error {
public:
  using Error::Error;
};

/// Coefficient vectors or bases of different sizes were combined.
class DimensionError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class InsufficientAgentsError : public Error {
public:
  using Error::Error;
};

/// Empirical dimple distribution requested from zero dimples.
class UndefinedDistributionError : public Error {
public:
  using Error::Error;
};

class ControllerError : public Error {
public:
  ControllerError(const std::string& what, int iteration)
      : Error(what + " (descent iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

/// Controller failure surfaced from inside a simulated trial.
class TrialError : public Error {
public:
  TrialError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace ergo
