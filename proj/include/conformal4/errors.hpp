#pragma once

#include <stdexcept>
#include <string>

namespace conformal4 {

// Each error class maps onto one CLI exit status (see report.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain-error"; }
};

class MetricDegeneracyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "metric-degeneracy"; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "internal-consistency"; }
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "non-convergence"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position = npos)
      : Error(position == npos ? message
                               : message + " at position " + std::to_string(position)),
        position_(position) {}
  const char* kind() const noexcept override { return "parse-error"; }
  std::size_t position() const noexcept { return position_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t position_;
};

}  // namespace conformal4
