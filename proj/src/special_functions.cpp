#include "bregsel/special_functions.hpp"

#include "bregsel/error.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <string>

namespace bregsel {

namespace {

// Below this the asymptotic series is not used; the recurrence shifts x up.
constexpr double kAsymptoticThreshold = 10.0;

void
require_positive(const char* fn, double x)
{
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

} // namespace

double
digamma(double x)
{
  require_positive("digamma", x);
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  // Bernoulli-number tail: -sum B_2k / (2k x^2k)
  const double tail =
    r * (1.0 / 12 -
         r * (1.0 / 120 -
              r * (1.0 / 252 -
                   r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double
trigamma(double x)
{
  require_positive("trigamma", x);
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double tail =
    r * (1.0 / 6 -
         r * (1.0 / 30 -
              r * (1.0 / 42 -
                   r * (1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6))))));
  return shift + 1.0 / x + 0.5 * r + tail / x;
}

double
normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double
normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double
gamma_quantile(double shape, double rate, double p)
{
  if (!(shape > 0.0) || !(rate > 0.0) || !(p > 0.0 && p < 1.0)) {
    throw DomainError("gamma_quantile: invalid arguments");
  }
  return boost::math::quantile(boost::math::gamma_distribution<double>(shape, 1.0 / rate), p);
}

double
lognormal_quantile(double mu, double sigma, double p)
{
  if (!(sigma > 0.0)) {
    throw DomainError("lognormal_quantile: sigma must be positive");
  }
  return std::exp(mu + sigma * normal_quantile(p));
}

} // namespace bregsel
