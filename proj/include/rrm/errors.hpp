#pragma once

#include <stdexcept>

namespace rrm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched tensor/layer geometry.
struct ShapeError : Error {
  using Error::Error;
};

// Malformed model/frame files or unparsable option strings.
struct FormatError : Error {
  using Error::Error;
};

// NaN or Inf where finite values are required.
struct NumericError : Error {
  using Error::Error;
};

// Bad call arguments (negative epsilon, empty sequences, ...).
struct InvalidArgument : Error {
  using Error::Error;
};

}  // namespace rrm
