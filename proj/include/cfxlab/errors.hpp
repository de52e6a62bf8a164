#pragma once

// Error raised when textual input (rationals, bit strings, DIMACS, JSON)
// fails to parse. Structural problems in already-parsed data use the same
// type so callers can treat "bad input" uniformly at the boundary.

#include <stdexcept>

namespace cfx {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfx
