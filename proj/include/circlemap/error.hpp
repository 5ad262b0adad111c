#pragma once

#include <stdexcept>
#include <string>

namespace circlemap {

/// Malformed input or a violated precondition.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure did not meet its tolerance (solver, quadrature).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A level is too close to a vertex value of the circle map.
class CriticalLevelError : public NumericalError {
 public:
  CriticalLevelError(const std::string& what, double suggested)
      : NumericalError(what), suggested_level_(suggested) {}
  double suggested_level() const { return suggested_level_; }

 private:
  double suggested_level_;
};

/// An internal consistency invariant failed. Indicates a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace circlemap
