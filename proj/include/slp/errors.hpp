#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace slp {

/// Base for every failure raised by the library. Precondition violations on
/// plain arguments use std::invalid_argument / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The constraint set of an optimization problem is empty.
///
/// `violation` is the smallest maximum constraint violation the solver found
/// over all candidate points it examined (a Farkas-style residual: strictly
/// positive when the system is infeasible). `user` names the offending user
/// when the infeasibility can be attributed to one.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double violation,
                  std::optional<int> user = std::nullopt)
      : Error(what), violation_(violation), user_(user) {}

  double violation() const noexcept { return violation_; }
  std::optional<int> user() const noexcept { return user_; }

 private:
  double violation_;
  std::optional<int> user_;
};

/// A matrix that must have full row rank does not.
class RankError : public Error {
 public:
  RankError(const std::string& what, int rank) : Error(what), rank_(rank) {}
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

/// An iterative routine stopped before meeting its accuracy contract.
/// `value` carries the best quantity available at that point (a residual for
/// factorizations, a valid lower bound for dual solvers).
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double value)
      : Error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Input that is well-formed but degenerate for the requested quantity
/// (zero vectors, zero power).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace slp
