#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssi {

/// Precondition violation on a public operation (bad time, zero sigma, shape mismatch, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trajectory produced a non-finite state.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Pearson correlation requested on a constant sample.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Experiment configuration failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssi
