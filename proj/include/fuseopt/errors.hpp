#ifndef FUSEOPT_ERRORS_HPP
#define FUSEOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fuseopt {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix dimension does not match its context.
class invalid_dimension_error : public error {
 public:
  using error::error;
};

/// An argument violates a precondition (empty batch, non-symmetric matrix, ...).
class invalid_input_error : public error {
 public:
  using error::error;
};

/// A computation produced or received a NaN/Inf.
class numeric_error : public error {
 public:
  using error::error;
};

/// A search direction is not a descent direction.
class invalid_direction_error : public error {
 public:
  using error::error;
};

/// An internal invariant was violated; indicates a bug, not bad input.
class internal_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

/// A cell or token failed to parse.
class parse_error : public error {
 public:
  using error::error;
};

/// A file parsed but its structure is wrong (missing column, zero rows, ...).
class schema_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

}  // namespace fuseopt

#endif  // FUSEOPT_ERRORS_HPP
