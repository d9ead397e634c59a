#pragma once

#include <stdexcept>
#include <string>

namespace erbfit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text; message carries a 1-based line number where applicable.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input violating a domain invariant (e.g. radius <= 0).
struct ValidationError : Error {
  using Error::Error;
};

// Non-finite value produced where the math guarantees finiteness on valid input.
struct NumericalError : Error {
  using Error::Error;
};

// Requested computation exceeds a configured size cap.
struct ResourceError : Error {
  using Error::Error;
};

}  // namespace erbfit
