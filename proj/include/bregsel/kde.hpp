#pragma once

#include "bregsel/sample.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bregsel {

enum class KernelType
{
  gaussian,
  //! Ordinary estimation only; no closed-form bias correction.
  epanechnikov
};

enum class KdeVariant
{
  ordinary,
  bias_reduced
};

double gaussian_kernel(double u);
double gaussian_kernel_second_derivative(double u);
double epanechnikov_kernel(double u);

//! A kernel density estimate bound to a sample and a bandwidth.
//!
//! The ordinary variant is (1/nh) sum K((x - X_i)/h). The bias-reduced
//! variant subtracts the plug-in leading bias term (h^2/2) f''(x) mu_2(K);
//! for the Gaussian kernel it is
//!   (1 / (2 sqrt(2 pi) n h)) sum (3 - u_i^2) exp(-u_i^2 / 2),  u_i = (x - X_i)/h,
//! and may be negative in the tails. No clamping happens here.
class DensityEstimate
{
public:
  DensityEstimate(const Sample& sample,
                  double bandwidth,
                  KdeVariant variant,
                  KernelType kernel = KernelType::gaussian);

  //! Evaluates the estimate in its own variant.
  double operator()(double x) const;

  double bandwidth() const noexcept { return bandwidth_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  KdeVariant variant() const noexcept { return variant_; }
  KernelType kernel() const noexcept { return kernel_; }
  //! Observations in ascending order.
  std::span<const double> points() const noexcept { return sorted_; }

  //! Ordinary estimate regardless of variant.
  double ordinary(double x) const;
  //! Bias-reduced estimate regardless of variant. Gaussian kernel only.
  double bias_reduced(double x) const;

private:
  std::vector<double> sorted_;
  double bandwidth_;
  KdeVariant variant_;
  KernelType kernel_;
};

//! Ordinary estimate at x. Throws DomainError for non-finite x.
double kde_evaluate(const DensityEstimate& est, double x);

//! Bias-reduced estimate at x. Throws UnsupportedKernelError for kernels
//! without a closed-form second derivative.
double kde_bias_reduced_evaluate(const DensityEstimate& est, double x);

//! Least-squares cross-validation criterion
//!   CV(h) = int fhat^2 - (2/n) sum_i fhat_{-i}(X_i)
//! with int fhat^2 from the exact Gaussian convolution identity.
double cv_score(const Sample& sample, double h);

//! Grid minimiser of cv_score; ties go to the smaller bandwidth.
double cv_bandwidth(const Sample& sample, std::span<const double> grid);

//! 1.06 * sd * n^(-1/5).
double reference_bandwidth(const Sample& sample);

//! `points` log-spaced values from 0.05 to 5 times sd * n^(-1/5).
std::vector<double> default_cv_grid(const Sample& sample, std::size_t points = 60);

//! Log-spaced grid on [lo, hi].
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t points);

} // namespace bregsel
