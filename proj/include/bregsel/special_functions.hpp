#pragma once

namespace bregsel {

//! Digamma function psi(x) = Gamma'(x)/Gamma(x) for x > 0.
double digamma(double x);

//! Trigamma function psi_1(x), the derivative of digamma, for x > 0.
double trigamma(double x);

//! Standard normal CDF.
double normal_cdf(double z);

//! Inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);

//! Quantile of Gamma(shape, rate).
double gamma_quantile(double shape, double rate, double p);

//! Quantile of LogNormal(mu, sigma).
double lognormal_quantile(double mu, double sigma, double p);

} // namespace bregsel
