#pragma once

#include <stdexcept>
#include <string>

namespace iscreen {

// Error taxonomy mirrored by the CLI exit codes (see tools/main.cpp):
//   SchemaError -> 2, MissingMomentError -> 3, InfeasibleError -> 4,
//   TheoryUnconfirmedError -> 5, anything else -> 1.

// Malformed or inconsistent input file.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A moment of higher order than the table holds was requested; signals a
// degree/schedule mismatch and is never silently computed around.
struct MissingMomentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameters outside the feasible region (alpha/gamma/topology conflicts,
// enumeration caps, invalid schedule inputs).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A theory-scale schedule was asked to run without the explicit opt-in flag.
struct TheoryUnconfirmedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace iscreen
