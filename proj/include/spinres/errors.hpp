#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinres {

/// Violated precondition on shapes, sizes or parameter ranges.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Coupling matrix whose spectral radius is too small to normalize.
class DegenerateMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Non-finite state component detected during integration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t oscillator, std::size_t step)
      : std::runtime_error("integration diverged: oscillator " + std::to_string(oscillator) +
                           " is non-finite at step " + std::to_string(step)),
        oscillator_(oscillator),
        step_(step) {}
  std::size_t oscillator() const noexcept { return oscillator_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t oscillator_;
  std::size_t step_;
};

/// Requested backend is not compiled in or not usable on this machine.
class CapabilityError : public std::runtime_error {
 public:
  CapabilityError(const std::string& requested, std::vector<std::string> available)
      : std::runtime_error(make_message(requested, available)), available_(std::move(available)) {}
  const std::vector<std::string>& available() const noexcept { return available_; }

 private:
  static std::string make_message(const std::string& requested,
                                  const std::vector<std::string>& available) {
    std::string msg = "backend '" + requested + "' is not available; available backends:";
    for (const auto& id : available) msg += " " + id;
    return msg;
  }
  std::vector<std::string> available_;
};

/// Malformed config file or flag value. `line()` is 0 when not tied to a file line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spinres
