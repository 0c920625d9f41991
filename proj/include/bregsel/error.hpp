#pragma once

#include <stdexcept>
#include <string>

namespace bregsel {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! An argument lies outside the domain of the operation.
class DomainError : public Error
{
public:
  using Error::Error;
};

//! A sample is too small for the requested operation.
class SizeError : public Error
{
public:
  using Error::Error;
};

//! Parameter estimation is impossible on this sample (e.g. zero variance).
class DegenerateFitError : public Error
{
public:
  using Error::Error;
};

//! The one-step update left the admissible parameter space.
class StepFailureError : public Error
{
public:
  using Error::Error;
};

class UnsupportedKernelError : public Error
{
public:
  using Error::Error;
};

//! Adaptive quadrature exhausted its depth budget.
class ConvergenceError : public Error
{
public:
  ConvergenceError(const std::string& what, double partial, double error_estimate)
    : Error(what)
    , partial_(partial)
    , error_estimate_(error_estimate)
  {}

  double partial() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_estimate_; }

private:
  double partial_;
  double error_estimate_;
};

//! The truncation set is empty: the density estimate never reaches gamma_n.
class DegenerateEstimateError : public Error
{
public:
  using Error::Error;
};

//! Every bootstrap replicate produced the same divergence difference.
class DegenerateVarianceError : public Error
{
public:
  using Error::Error;
};

} // namespace bregsel
