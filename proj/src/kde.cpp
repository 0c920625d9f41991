#include "bregsel/kde.hpp"

#include "bregsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bregsel {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

// exp(-u^2/2) underflows to exactly zero beyond this, so skipping those
// points leaves every sum bit-identical.
constexpr double kGaussianSupport = 39.0;

void
require_finite(double x)
{
  if (!std::isfinite(x)) {
    throw DomainError("density evaluation point must be finite");
  }
}

} // namespace

double
gaussian_kernel(double u)
{
  return kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

double
gaussian_kernel_second_derivative(double u)
{
  return (u * u - 1.0) * gaussian_kernel(u);
}

double
epanechnikov_kernel(double u)
{
  return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

DensityEstimate::DensityEstimate(const Sample& sample,
                                 double bandwidth,
                                 KdeVariant variant,
                                 KernelType kernel)
  : sorted_(sample.values().begin(), sample.values().end())
  , bandwidth_(bandwidth)
  , variant_(variant)
  , kernel_(kernel)
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw DomainError("bandwidth must be positive and finite");
  }
  if (variant == KdeVariant::bias_reduced && kernel != KernelType::gaussian) {
    throw UnsupportedKernelError("bias-reduced estimation needs the Gaussian kernel");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double
DensityEstimate::operator()(double x) const
{
  return variant_ == KdeVariant::ordinary ? ordinary(x) : bias_reduced(x);
}

double
DensityEstimate::ordinary(double x) const
{
  require_finite(x);
  const double h = bandwidth_;
  const double support = kernel_ == KernelType::gaussian ? kGaussianSupport : 1.0;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), x - support * h);
  const auto last = std::upper_bound(first, sorted_.end(), x + support * h);
  double sum = 0.0;
  if (kernel_ == KernelType::gaussian) {
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      sum += std::exp(-0.5 * u * u);
    }
    sum *= kInvSqrt2Pi;
  } else {
    for (auto it = first; it != last; ++it) {
      sum += epanechnikov_kernel((x - *it) / h);
    }
  }
  return sum / (static_cast<double>(sorted_.size()) * h);
}

double
DensityEstimate::bias_reduced(double x) const
{
  if (kernel_ != KernelType::gaussian) {
    throw UnsupportedKernelError("bias-reduced estimation needs the Gaussian kernel");
  }
  require_finite(x);
  const double h = bandwidth_;
  const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), x - kGaussianSupport * h);
  const auto last = std::upper_bound(first, sorted_.end(), x + kGaussianSupport * h);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) {
    const double u = (x - *it) / h;
    const double u2 = u * u;
    sum += (3.0 - u2) * std::exp(-0.5 * u2);
  }
  return sum * kInvSqrt2Pi / (2.0 * static_cast<double>(sorted_.size()) * h);
}

double
kde_evaluate(const DensityEstimate& est, double x)
{
  return est.ordinary(x);
}

double
kde_bias_reduced_evaluate(const DensityEstimate& est, double x)
{
  return est.bias_reduced(x);
}

double
cv_score(const Sample& sample, double h)
{
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("cross-validation bandwidth must be positive, got " + std::to_string(h));
  }
  // sorted so the score does not depend on observation order
  std::vector<double> x(sample.values().begin(), sample.values().end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);

  // int fhat^2 = (1/n^2) sum_ij phi_{h sqrt2}(X_i - X_j); the diagonal gives n terms
  // of 1/(2 h sqrt(pi)). The leave-one-out sum needs only the off-diagonal pairs.
  double pair_conv = 0.0;
  double pair_kernel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = (x[i] - x[j]) / h;
      const double e = std::exp(-0.25 * u * u);
      pair_conv += e;
      pair_kernel += e * e; // exp(-u^2/2)
    }
  }
  const double conv_norm = 1.0 / (2.0 * h * std::sqrt(std::numbers::pi));
  const double integral_sq = conv_norm * (nd + 2.0 * pair_conv) / (nd * nd);
  const double loo_sum = 2.0 * pair_kernel * kInvSqrt2Pi / ((nd - 1.0) * h);
  return integral_sq - 2.0 / nd * loo_sum;
}

double
cv_bandwidth(const Sample& sample, std::span<const double> grid)
{
  if (grid.empty()) {
    throw DomainError("bandwidth grid is empty");
  }
  for (double h : grid) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw DomainError("bandwidth grid entries must be positive, got " + std::to_string(h));
    }
  }
  double best_h = grid[0];
  double best_score = cv_score(sample, grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double s = cv_score(sample, grid[k]);
    if (s < best_score || (s == best_score && grid[k] < best_h)) {
      best_score = s;
      best_h = grid[k];
    }
  }
  return best_h;
}

double
reference_bandwidth(const Sample& sample)
{
  return 1.06 * sample.sd() * std::pow(static_cast<double>(sample.size()), -0.2);
}

std::vector<double>
log_spaced_grid(double lo, double hi, std::size_t points)
{
  if (!(lo > 0.0) || !(hi >= lo) || points == 0) {
    throw DomainError("log-spaced grid needs 0 < lo <= hi and at least one point");
  }
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo * std::exp(step * static_cast<double>(k));
  }
  grid.back() = hi;
  return grid;
}

std::vector<double>
default_cv_grid(const Sample& sample, std::size_t points)
{
  const double scale = sample.sd() * std::pow(static_cast<double>(sample.size()), -0.2);
  if (!(scale > 0.0)) {
    throw DegenerateFitError("cannot build a bandwidth grid for a constant sample");
  }
  return log_spaced_grid(0.05 * scale, 5.0 * scale, points);
}

} // namespace bregsel
