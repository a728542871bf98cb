#pragma once

#include <stdexcept>
#include <string>

namespace dbnet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structural problem in a schema, constraint, query or net.
struct ValidationError : Error {
  using Error::Error;
};

/// Reference to a relation, place, action or query that does not exist.
struct SchemaError : Error {
  using Error::Error;
};

/// A variable needed by an operation has no value.
struct BindingError : Error {
  using Error::Error;
};

/// A value or variable does not have the type its position requires.
struct TypeError : Error {
  using Error::Error;
};

/// Caller broke an operation's precondition (e.g. fired a disabled binding).
struct ContractError : Error {
  using Error::Error;
};

/// Translation input outside the supported fragment.
struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace dbnet
