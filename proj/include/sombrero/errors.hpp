#pragma once

#include <stdexcept>
#include <string>

namespace sombrero {

// Bad arguments that violate a documented precondition (wrong types/ranges
// of user-supplied parameters).
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mathematically out-of-domain evaluation (negative radius, nonpositive
// trial function, m > l, and similar).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unusable numerical configuration (grid too coarse, domain too short).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Solver was asked to run outside the sufficient convergence window
// without an explicit override.
struct InvalidWindow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterate lost the positivity required to form the next energy shift.
struct NonpositiveIterate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigenvalue search could not bracket a ground state.
struct NoBracket : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sombrero
