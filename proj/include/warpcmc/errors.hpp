#pragma once

#include <stdexcept>
#include <string>

namespace warpcmc {

/// Argument outside the domain of an evaluator (negative radius, beyond a table, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed user input: grids too coarse, bad CSV, bad configuration.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical kernel failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// No admissible profile exists for the requested (warping, H, d).
class NoSphereError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace warpcmc
