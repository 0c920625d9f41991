#include "bregsel/divergence.hpp"

#include "bregsel/error.hpp"

#include <cmath>
#include <string>

namespace bregsel {

void
BregmanGenerator::validate() const
{
  if (!std::isfinite(beta) || !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(c3)) {
    throw DomainError("generator coefficients must be finite");
  }
  if (!(c1 > 0.0)) {
    throw DomainError("generator needs c1 > 0 for strict convexity, got " + std::to_string(c1));
  }
}

double
TruncationPolicy::gamma_n(std::size_t n) const
{
  if (!(c_gamma > 0.0) || n == 0) {
    throw DomainError("truncation needs c_gamma > 0 and n >= 1");
  }
  return c_gamma / static_cast<double>(n);
}

namespace {

void
require_positive_arg(double t)
{
  if (!(t > 0.0)) {
    throw DomainError("generator argument must be positive, got " + std::to_string(t));
  }
}

} // namespace

double
phi(const BregmanGenerator& gen, double t)
{
  require_positive_arg(t);
  const double affine = gen.c2 * t + gen.c3;
  if (gen.beta == 1.0) {
    return gen.c1 * t * std::log(t) + affine;
  }
  if (gen.beta == 0.0) {
    return -gen.c1 * std::log(t) + affine;
  }
  return gen.c1 * std::pow(t, gen.beta) / (gen.beta * (gen.beta - 1.0)) + affine;
}

double
phi_prime(const BregmanGenerator& gen, double t)
{
  require_positive_arg(t);
  if (gen.beta == 1.0) {
    return gen.c1 * (std::log(t) + 1.0) + gen.c2;
  }
  if (gen.beta == 0.0) {
    return -gen.c1 / t + gen.c2;
  }
  return gen.c1 * std::pow(t, gen.beta - 1.0) / (gen.beta - 1.0) + gen.c2;
}

double
phi_second(const BregmanGenerator& gen, double t)
{
  require_positive_arg(t);
  return gen.c1 * std::pow(t, gen.beta - 2.0);
}

namespace {

// (1 + x) log(1 + x) - x, accurate for x near 0
double
kl_kernel(double x)
{
  if (std::abs(x) < 0.1) {
    // sum_{k>=2} (-1)^k x^k / (k (k - 1))
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double add = term / (k * (k - 1.0));
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) {
        break;
      }
      term *= -x;
    }
    return sum;
  }
  return (1.0 + x) * std::log1p(x) - x;
}

// x - log(1 + x)
double
is_kernel(double x)
{
  if (std::abs(x) < 0.1) {
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) {
        break;
      }
      term *= -x;
    }
    return sum;
  }
  return x - std::log1p(x);
}

// ((1 + x)^b - 1 - b x) / (b (b - 1))
double
power_kernel(double b, double x)
{
  if (std::abs(x) < 0.1) {
    // binomial series; coefficient of x^k is C(b, k) / (b (b - 1))
    double coef = 0.5;
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      const double add = coef * term;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) {
        break;
      }
      coef *= (b - k) / (k + 1.0);
      term *= x;
    }
    return sum;
  }
  return (std::expm1(b * std::log1p(x)) - b * x) / (b * (b - 1.0));
}

} // namespace

double
bregman_pointwise(const BregmanGenerator& gen, double p, double q)
{
  if (!(p > 0.0) || !(q > 0.0)) {
    throw DomainError("Bregman arguments must be positive");
  }
  // The affine part of phi cancels exactly, so every branch is written as
  // q^beta times a function of the relative gap x = (p - q) / q.
  const double d = p - q;
  const double x = d / q;
  double value;
  if (gen.beta == 1.0) {
    value = gen.c1 * q * kl_kernel(x);
  } else if (gen.beta == 0.0) {
    value = gen.c1 * is_kernel(x);
  } else if (gen.beta == 2.0) {
    value = 0.5 * gen.c1 * d * d;
  } else {
    value = gen.c1 * std::pow(q, gen.beta) * power_kernel(gen.beta, x);
  }
  return value > 0.0 ? value : 0.0;
}

double
divergence_exact(const BregmanGenerator& gen,
                 const DensityFn& f,
                 const DensityFn& g,
                 const QuadratureSpec& quad)
{
  gen.validate();
  auto integrand = [&](double x) {
    const double p = f(x);
    const double q = g(x);
    if (!(p >= kDensityFloor) || !(q >= kDensityFloor)) {
      return 0.0;
    }
    return bregman_pointwise(gen, p, q);
  };
  return integrate(integrand, quad).value;
}

namespace {

template<class Pointwise>
double
masked_estimate(const DensityEstimate& est,
                const DensityFn& model_pdf,
                const TruncationPolicy& trunc,
                const QuadratureSpec& quad,
                Pointwise pointwise)
{
  const double threshold = trunc.gamma_n(est.size());
  bool any_kept = false;
  auto integrand = [&](double x) {
    const double p = est(x);
    if (!(p >= threshold)) {
      return 0.0;
    }
    any_kept = true;
    const double q = model_pdf(x);
    if (!(q >= kDensityFloor)) {
      return 0.0;
    }
    return pointwise(p, q);
  };
  const double value = integrate(integrand, quad).value;
  if (!any_kept) {
    throw DegenerateEstimateError("density estimate never reaches gamma_n on the window");
  }
  return value;
}

} // namespace

double
divergence_estimate(const BregmanGenerator& gen,
                    const DensityEstimate& est,
                    const DensityFn& model_pdf,
                    const TruncationPolicy& trunc,
                    const QuadratureSpec& quad)
{
  gen.validate();
  return masked_estimate(est, model_pdf, trunc, quad,
                         [&gen](double p, double q) { return bregman_pointwise(gen, p, q); });
}

namespace {

double
beta3_integrand(double p, double q)
{
  return (p * p * p - 3.0 * p * q * q + 2.0 * q * q * q) / 6.0;
}

} // namespace

double
specialized_beta3_exact(const DensityFn& f, const DensityFn& g, const QuadratureSpec& quad)
{
  auto integrand = [&](double x) {
    const double p = f(x);
    const double q = g(x);
    if (!(p >= kDensityFloor) || !(q >= kDensityFloor)) {
      return 0.0;
    }
    return beta3_integrand(p, q);
  };
  return integrate(integrand, quad).value;
}

double
specialized_beta3_estimate(const DensityEstimate& est,
                           const DensityFn& model_pdf,
                           const TruncationPolicy& trunc,
                           const QuadratureSpec& quad)
{
  return masked_estimate(est, model_pdf, trunc, quad, beta3_integrand);
}

} // namespace bregsel
