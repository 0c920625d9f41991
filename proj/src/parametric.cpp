#include "bregsel/parametric.hpp"

#include "bregsel/error.hpp"
#include "bregsel/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bregsel {

void
GammaParams::validate() const
{
  if (!(alpha > 0.0) || !(eta > 0.0) || !std::isfinite(alpha) || !std::isfinite(eta)) {
    throw DomainError("Gamma parameters must be positive and finite");
  }
}

void
LogNormalParams::validate() const
{
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("log-normal parameters need finite mu and sigma > 0");
  }
}

void
MixtureDGP::validate() const
{
  if (!(pi >= 0.0 && pi <= 1.0)) {
    throw DomainError("mixture weight must lie in [0, 1]");
  }
  gamma.validate();
  lognormal.validate();
}

void
OneStepConfig::validate() const
{
  if (!(delta > 0.5 && delta < 1.0)) {
    throw DomainError("one-step delta must lie in (1/2, 1), got " + std::to_string(delta));
  }
}

std::size_t
OneStepConfig::preliminary_size(std::size_t n) const
{
  validate();
  // the epsilon keeps exact powers (e.g. 32^0.6 = 8) from rounding down
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), delta) + 1e-9));
}

double
gamma_pdf(const GammaParams& p, double x)
{
  if (!(x >= 0.0)) {
    return 0.0;
  }
  if (x == 0.0) {
    // alpha < 1 diverges at the origin; the point is excluded from the support
    return p.alpha == 1.0 ? p.eta : 0.0;
  }
  const double log_pdf =
    p.alpha * std::log(p.eta) - std::lgamma(p.alpha) + (p.alpha - 1.0) * std::log(x) - p.eta * x;
  return std::exp(log_pdf);
}

double
lognormal_pdf(const LogNormalParams& p, double x)
{
  if (!(x > 0.0)) {
    return 0.0;
  }
  const double z = (std::log(x) - p.mu) / p.sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * p.sigma * x);
}

double
mixture_pdf(const MixtureDGP& dgp, double x)
{
  return dgp.pi * gamma_pdf(dgp.gamma, x) + (1.0 - dgp.pi) * lognormal_pdf(dgp.lognormal, x);
}

namespace {

void
require_positive_sample(const Sample& sample)
{
  if (!sample.all_positive()) {
    throw DomainError("sample contains a nonpositive observation");
  }
}

} // namespace

LogNormalParams
lognormal_mle(const Sample& sample)
{
  require_positive_sample(sample);
  const auto x = sample.values();
  const double n = static_cast<double>(x.size());
  double mu = 0.0;
  for (double v : x) {
    mu += std::log(v);
  }
  mu /= n;
  double ss = 0.0;
  for (double v : x) {
    const double d = std::log(v) - mu;
    ss += d * d;
  }
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0)) {
    throw DegenerateFitError("log-normal fit: log-observations have zero variance");
  }
  return { mu, sigma };
}

GammaParams
gamma_preliminary(const Sample& prefix)
{
  const double m = prefix.mean();
  const double v = prefix.variance();
  if (!(v > 0.0)) {
    throw DegenerateFitError("Gamma preliminary fit: prefix has zero variance");
  }
  if (!(m > 0.0)) {
    throw DomainError("Gamma preliminary fit: prefix mean must be positive");
  }
  return { m * m / v, m / v };
}

GammaParams
gamma_one_step_mle(const Sample& sample, const OneStepConfig& cfg)
{
  require_positive_sample(sample);
  const std::size_t n = sample.size();
  const std::size_t prelim_n = cfg.preliminary_size(n);
  if (prelim_n < 2) {
    throw SizeError("one-step MLE needs floor(n^delta) >= 2; n = " + std::to_string(n));
  }
  const double a0 = gamma_preliminary(sample.prefix(prelim_n)).alpha;
  const double mean = sample.mean();
  const double eta0 = a0 / mean;
  const double psi = digamma(a0);
  double score = 0.0;
  for (double x : sample.values()) {
    score += std::log(eta0 * x) - psi;
  }
  const double alpha = a0 + score / (static_cast<double>(n) * trigamma(a0));
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw StepFailureError("one-step update produced alpha = " + std::to_string(alpha));
  }
  return { alpha, alpha / mean };
}

GammaParams
gamma_multi_step_mle(const Sample& sample, const OneStepConfig& cfg, const MultiStepOptions& opts)
{
  require_positive_sample(sample);
  const std::size_t n = sample.size();
  const std::size_t prelim_n = std::max<std::size_t>(cfg.preliminary_size(n), 2);
  const double mean = sample.mean();
  double mean_log = 0.0;
  for (double x : sample.values()) {
    mean_log += std::log(x);
  }
  mean_log /= static_cast<double>(n);
  // s = ln(mean) - mean(ln X) >= 0 by Jensen, zero only for a constant sample
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0)) {
    throw DegenerateFitError("Gamma fit: sample has zero variance");
  }

  double alpha;
  try {
    alpha = gamma_preliminary(sample.prefix(prelim_n)).alpha;
  } catch (const DegenerateFitError&) {
    // a tied prefix says nothing; start from the full-sample moments instead
    alpha = gamma_preliminary(sample).alpha;
  }

  for (int step = 0; step < opts.max_steps; ++step) {
    double delta = (std::log(alpha) - digamma(alpha) - s) / trigamma(alpha);
    while (alpha + delta <= 0.0) {
      delta *= 0.5;
    }
    const double next = alpha + delta;
    if (std::abs(next - alpha) <= opts.rel_tol * next) {
      return { next, next / mean };
    }
    alpha = next;
  }
  throw DegenerateFitError("Gamma multi-step fit did not converge in " +
                           std::to_string(opts.max_steps) + " steps");
}

double
sample_gamma_one(const GammaParams& p, Rng& rng)
{
  // Marsaglia & Tsang squeeze; shapes below one use the U^(1/alpha) boost
  if (p.alpha < 1.0) {
    const double g = sample_gamma_one({ p.alpha + 1.0, 1.0 }, rng);
    return g * std::pow(rng.uniform(), 1.0 / p.alpha) / p.eta;
  }
  const double d = p.alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return d * v / p.eta;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v / p.eta;
    }
  }
}

std::vector<double>
sample_gamma(const GammaParams& p, std::size_t n, Rng& rng)
{
  p.validate();
  std::vector<double> out(n);
  for (auto& v : out) {
    v = sample_gamma_one(p, rng);
  }
  return out;
}

std::vector<double>
sample_lognormal(const LogNormalParams& p, std::size_t n, Rng& rng)
{
  p.validate();
  std::vector<double> out(n);
  for (auto& v : out) {
    v = std::exp(p.mu + p.sigma * rng.normal());
  }
  return out;
}

std::vector<double>
sample_mixture(const MixtureDGP& dgp, std::size_t n, Rng& rng)
{
  dgp.validate();
  std::vector<double> out(n);
  for (auto& v : out) {
    if (rng.uniform() < dgp.pi) {
      v = sample_gamma_one(dgp.gamma, rng);
    } else {
      v = std::exp(dgp.lognormal.mu + dgp.lognormal.sigma * rng.normal());
    }
  }
  return out;
}

std::string
to_string(Family f)
{
  switch (f) {
    case Family::gamma:
      return "gamma";
    case Family::lognormal:
      return "lognormal";
    case Family::mixture:
      return "mixture";
  }
  return "unknown";
}

std::string
to_string(FitMethod m)
{
  switch (m) {
    case FitMethod::one_step:
      return "one-step";
    case FitMethod::multi_step:
      return "multi-step";
    case FitMethod::closed_form:
      return "closed-form";
    case FitMethod::fixed:
      return "fixed";
  }
  return "unknown";
}

Family
parse_family(const std::string& name)
{
  if (name == "gamma") {
    return Family::gamma;
  }
  if (name == "lognormal" || name == "log-normal") {
    return Family::lognormal;
  }
  throw DomainError("unknown model family '" + name + "' (expected gamma or lognormal)");
}

ParametricModel::ParametricModel(GammaParams p)
  : params_(p)
{
  p.validate();
}

ParametricModel::ParametricModel(LogNormalParams p)
  : params_(p)
{
  p.validate();
}

ParametricModel::ParametricModel(MixtureDGP p)
  : params_(p)
{
  p.validate();
}

Family
ParametricModel::family() const noexcept
{
  switch (params_.index()) {
    case 0:
      return Family::gamma;
    case 1:
      return Family::lognormal;
    default:
      return Family::mixture;
  }
}

double
ParametricModel::pdf(double x) const
{
  switch (params_.index()) {
    case 0:
      return gamma_pdf(std::get<GammaParams>(params_), x);
    case 1:
      return lognormal_pdf(std::get<LogNormalParams>(params_), x);
    default:
      return mixture_pdf(std::get<MixtureDGP>(params_), x);
  }
}

std::vector<double>
ParametricModel::sample(std::size_t n, Rng& rng) const
{
  switch (params_.index()) {
    case 0:
      return sample_gamma(std::get<GammaParams>(params_), n, rng);
    case 1:
      return sample_lognormal(std::get<LogNormalParams>(params_), n, rng);
    default:
      return sample_mixture(std::get<MixtureDGP>(params_), n, rng);
  }
}

double
ParametricModel::upper_quantile(double p) const
{
  switch (params_.index()) {
    case 0: {
      const auto& g = std::get<GammaParams>(params_);
      return gamma_quantile(g.alpha, g.eta, p);
    }
    case 1: {
      const auto& l = std::get<LogNormalParams>(params_);
      return lognormal_quantile(l.mu, l.sigma, p);
    }
    default: {
      const auto& m = std::get<MixtureDGP>(params_);
      return std::max(gamma_quantile(m.gamma.alpha, m.gamma.eta, p),
                      lognormal_quantile(m.lognormal.mu, m.lognormal.sigma, p));
    }
  }
}

FitMethod
default_fit_method(Family f)
{
  switch (f) {
    case Family::gamma:
      return FitMethod::multi_step;
    case Family::lognormal:
      return FitMethod::closed_form;
    default:
      return FitMethod::fixed;
  }
}

ParametricModel
fit_model(Family family,
          FitMethod method,
          const Sample& sample,
          const OneStepConfig& cfg,
          const ParametricModel* fixed_model)
{
  if (method == FitMethod::fixed) {
    if (fixed_model == nullptr) {
      throw DomainError("fixed fit method needs a model");
    }
    return *fixed_model;
  }
  switch (family) {
    case Family::gamma:
      if (method == FitMethod::one_step) {
        return ParametricModel(gamma_one_step_mle(sample, cfg));
      }
      if (method == FitMethod::multi_step) {
        return ParametricModel(gamma_multi_step_mle(sample, cfg));
      }
      break;
    case Family::lognormal:
      if (method == FitMethod::closed_form) {
        return ParametricModel(lognormal_mle(sample));
      }
      break;
    case Family::mixture:
      break;
  }
  throw DomainError("fit method " + to_string(method) + " does not apply to family " +
                    to_string(family));
}

} // namespace bregsel
