#pragma once

#include <stdexcept>
#include <string>

namespace supershift {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class domain_error : public error {
 public:
  using error::error;
};

/// The active precision is below what the guard rule demands.
class precision_error : public error {
 public:
  using error::error;
};

/// A structural invariant (monotone rows, node ranges, family shape) is violated.
class validation_error : public error {
 public:
  using error::error;
};

/// Interpolation nodes coincide within the merge tolerance.
class degenerate_nodes_error : public error {
 public:
  using error::error;
};

/// An interpolation point coincides with a node.
class node_collision_error : public error {
 public:
  using error::error;
};

/// A result would leave the exponent range of the arithmetic.
class overflow_error : public error {
 public:
  using error::error;
};

/// Two objects that must agree in shape do not.
class shape_error : public error {
 public:
  using error::error;
};

/// A request exceeds a configured size cap.
class size_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

}  // namespace supershift
