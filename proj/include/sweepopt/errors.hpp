#pragma once

#include <stdexcept>
#include <string>

namespace sweepopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input errors.
class DegenerateInput : public Error { using Error::Error; };
class InvalidOrder : public Error { using Error::Error; };
class InvalidWeight : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class ResolutionTooCoarse : public Error { using Error::Error; };
class DivisionByZero : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

// Numerical and planning failures.
class NumericalError : public Error { using Error::Error; };
class InfeasibleSolution : public Error { using Error::Error; };
class PlacementFailed : public Error { using Error::Error; };

/// Raised when the planner cannot produce a slice; the CLI maps these to exit code 2.
class PlanningError : public Error { using Error::Error; };
class BlockedEndpoint : public PlanningError { using PlanningError::PlanningError; };
class SliceInfeasible : public PlanningError { using PlanningError::PlanningError; };

}  // namespace sweepopt
