#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace greywater {

/// A physical quantity outside the range a conversion accepts.
class RangeError : public std::out_of_range
{
public:
  RangeError(const std::string& what_quantity, double value)
    : std::out_of_range(what_quantity + " out of range: " + std::to_string(value))
    , value_(value)
  {
  }

  [[nodiscard]] double value() const noexcept { return value_; }

private:
  double value_;
};

class FitError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Input file or argument that fails to parse. Carries the 1-based line
/// number when the input is line oriented (0 otherwise).
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& message, std::size_t line = 0)
    : std::runtime_error(line == 0 ? message
                                   : "line " + std::to_string(line) + ": " + message)
    , line_(line)
  {
  }

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Failure inside a simulation run, tagged with the step that raised it.
class SimulationError : public std::runtime_error
{
public:
  SimulationError(std::size_t step, const std::string& cause)
    : std::runtime_error("step " + std::to_string(step) + ": " + cause)
    , step_(step)
  {
  }

  [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

}  // namespace greywater
