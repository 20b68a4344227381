#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace masskit {

inline constexpr int kMaxDim = 8;

// Small dense types with fixed capacity: no heap traffic in curvature stencils.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using ScalarFn = std::function<double(const Vec&)>;
using RadialFn = std::function<double(double)>;
using TensorFn = std::function<Mat(const Vec&)>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point or stencil outside the chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

// An iterated construction whose tracked quantity stops improving.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Failures that mean "the input is outside the regime where the construction applies".
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::string inequality, double lhs, double rhs)
      : Error(what), inequality_(std::move(inequality)), lhs_(lhs), rhs_(rhs) {}
  explicit PreconditionError(const std::string& what) : Error(what) {}
  const std::string& inequality() const { return inequality_; }
  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }

 private:
  std::string inequality_;
  double lhs_ = 0.0;
  double rhs_ = 0.0;
};

class RegimeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class PipelineError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class ConstructionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class GluingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class InvarianceError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// |S^{n-1}|
double sphere_area(int n);
// (n-2)/(4(n-1))
double conformal_coupling(int n);
// 4/(n-2)
double conformal_power(int n);
// h = min(0.01 r, 0.05)
double default_step(double r);

Vec unit_vector(int n, int axis);
Vec point_on_axis(int n, double r, int axis = 0);

}  // namespace masskit
