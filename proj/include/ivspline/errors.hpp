#pragma once

#include <stdexcept>
#include <string>

namespace ivspline {

enum class ErrorKind {
  schema,
  parse,
  size,
  dimension,
  degenerate_instrument,
  invalid_argument,
  singular_kernel,
  collinearity,
  conditioning,
  selection,
  solver_stall,
  infeasible,
  report,
};

// Input problems map to exit code 2, numerical failures to 3, and an empty
// monotone feasible set to 4.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int constraint, double slack)
      : Error(ErrorKind::infeasible, what), constraint_(constraint), slack_(slack) {}
  int constraint() const noexcept { return constraint_; }
  double slack() const noexcept { return slack_; }

 private:
  int constraint_;
  double slack_;
};

}  // namespace ivspline
