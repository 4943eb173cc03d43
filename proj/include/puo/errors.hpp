#pragma once

#include <stdexcept>
#include <string>

namespace puo {

enum class ErrorKind {
  DegenerateFrequencies,
  ChartMismatch,
  SingularBlend,
  SingularHessian,
  NotAntisymmetric,
  InsufficientSamples,
  ComplexBranch,
  DegenerateModel,
  PreconditionViolated,
  NoSolution,
  NonUnique,
  SingularMap,
  NotInSpan,
  SingularCoefficient,
  StepUnderflow,
  AllBounded,
  AllUnbounded,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Carries the norm of the symmetric part of the rejected candidate.
class NotAntisymmetricError : public Error {
 public:
  NotAntisymmetricError(const std::string& what, double symmetric_norm)
      : Error(ErrorKind::NotAntisymmetric, what), symmetric_norm_(symmetric_norm) {}
  double symmetric_norm() const noexcept { return symmetric_norm_; }

 private:
  double symmetric_norm_;
};

/// Raised when sample points cannot separate the nonlinear constraint; `dimension`
/// is the (inflated) solution-space dimension the degenerate samples produced.
class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(const std::string& what, int dimension)
      : Error(ErrorKind::InsufficientSamples, what), dimension_(dimension) {}
  int dimension() const noexcept { return dimension_; }

 private:
  int dimension_;
};

class StepUnderflowError : public Error {
 public:
  StepUnderflowError(const std::string& what, double last_good_time)
      : Error(ErrorKind::StepUnderflow, what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

class NonUniqueError : public Error {
 public:
  NonUniqueError(const std::string& what, int manifold_dimension)
      : Error(ErrorKind::NonUnique, what), manifold_dimension_(manifold_dimension) {}
  int manifold_dimension() const noexcept { return manifold_dimension_; }

 private:
  int manifold_dimension_;
};

}  // namespace puo
