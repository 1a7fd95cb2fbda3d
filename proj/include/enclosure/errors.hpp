#pragma once

#include <stdexcept>
#include <string>

namespace enclosure {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a clamped operator has effectively zero trace and cannot be
// renormalized into a state.
struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact word sums refuse to start when |O|^n exceeds the node budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural hypothesis failed: the channel has a nontrivial transient part.
struct TransientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ControllabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical degeneracies (failed refinement, non-cyclic peripheral spectrum,
// collapsed ensemble paths, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace enclosure
