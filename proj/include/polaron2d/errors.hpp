#pragma once

#include <stdexcept>
#include <string>

namespace polaron2d {

// Thrown when a request would exceed a configured memory or enumeration
// budget.  The message names the budget so callers can raise it.
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iteration fails to converge or a required sign change /
// bracket cannot be established.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a quantity cannot be resolved to the requested tolerance,
// e.g. a secular pole sits too close to a diagonal entry.
class precision_error : public numeric_error {
 public:
  explicit precision_error(const std::string& what) : numeric_error(what) {}
};

// Thrown when a mathematically guaranteed inequality fails beyond the
// combined numeric tolerance.  Indicates an implementation bug or a broken
// input, never a legitimate outcome.
class certification_error : public std::runtime_error {
 public:
  explicit certification_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when a conditional construction is requested outside its
// hypothesis, e.g. the perturbed fixed-point equation when the spectral
// gap condition fails.  Callers may fall back to a weaker bound.
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace polaron2d
