#pragma once

#include "bregsel/kde.hpp"
#include "bregsel/quadrature.hpp"

#include <cstddef>
#include <functional>

namespace bregsel {

using DensityFn = std::function<double(double)>;

//! Convex generator of the beta family
//!   beta not in {0,1}: c1 t^beta / (beta (beta - 1)) + c2 t + c3
//!   beta = 1:          c1 t ln t + c2 t + c3
//!   beta = 0:         -c1 ln t + c2 t + c3
struct BregmanGenerator
{
  double beta = 3.0;
  double c1 = 1.0;
  double c2 = 0.0;
  double c3 = 0.0;

  //! Throws DomainError unless c1 > 0 and all fields are finite.
  void validate() const;
};

//! gamma_n(n) = c_gamma / n.
struct TruncationPolicy
{
  double c_gamma = 0.01;

  double gamma_n(std::size_t n) const;
};

//! Densities below this are treated as zero by the divergence integrals.
inline constexpr double kDensityFloor = 1e-300;

double phi(const BregmanGenerator& gen, double t);
double phi_prime(const BregmanGenerator& gen, double t);
double phi_second(const BregmanGenerator& gen, double t);

//! phi(p) - phi(q) - (p - q) phi'(q). Throws DomainError unless p, q > 0.
double bregman_pointwise(const BregmanGenerator& gen, double p, double q);

//! Quadrature of bregman_pointwise(f(x), g(x)) over the quadrature window.
//! Points where either density is below kDensityFloor contribute zero.
double divergence_exact(const BregmanGenerator& gen,
                        const DensityFn& f,
                        const DensityFn& g,
                        const QuadratureSpec& quad);

//! Plug-in estimate of the divergence from a density estimate to a model.
//! The integrand is masked to zero wherever est(x) < gamma_n(n); the
//! estimate is evaluated in its own variant (bias-reduced in practice).
//! Throws DegenerateEstimateError when no quadrature node passes the mask.
double divergence_estimate(const BregmanGenerator& gen,
                           const DensityEstimate& est,
                           const DensityFn& model_pdf,
                           const TruncationPolicy& trunc,
                           const QuadratureSpec& quad);

//! beta = 3, c1 = 1 closed form (1/6) int (f^3 - 3 f g^2 + 2 g^3).
double specialized_beta3_exact(const DensityFn& f, const DensityFn& g, const QuadratureSpec& quad);

//! The same closed form over the truncation set of a density estimate.
double specialized_beta3_estimate(const DensityEstimate& est,
                                  const DensityFn& model_pdf,
                                  const TruncationPolicy& trunc,
                                  const QuadratureSpec& quad);

} // namespace bregsel
