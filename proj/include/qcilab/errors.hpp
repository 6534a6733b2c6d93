#ifndef QCILAB_ERRORS_HPP
#define QCILAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qcilab {

/// Argument outside the domain of an operation (parameter range, curve range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Structurally invalid input: a profile failing validation, a malformed config.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside a solver (bracketing, convergence, node count).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcilab

#endif  // QCILAB_ERRORS_HPP
