#pragma once

#include "bregsel/random.hpp"
#include "bregsel/sample.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace bregsel {

//! Gamma with shape alpha and rate eta.
struct GammaParams
{
  double alpha = 1.0;
  double eta = 1.0;

  void validate() const;
};

//! Log-normal: ln X ~ N(mu, sigma^2).
struct LogNormalParams
{
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
};

//! pi * Gamma + (1 - pi) * LogNormal.
struct MixtureDGP
{
  double pi = 0.5;
  GammaParams gamma;
  LogNormalParams lognormal;

  void validate() const;
};

//! Controls the preliminary estimator: it sees the first floor(n^delta)
//! observations.
struct OneStepConfig
{
  double delta = 0.6;

  void validate() const;
  std::size_t preliminary_size(std::size_t n) const;
};

//! Stopping rule for the iterated (multi-step) scoring process.
struct MultiStepOptions
{
  int max_steps = 5000;
  double rel_tol = 1e-12;
};

double gamma_pdf(const GammaParams& p, double x);
double lognormal_pdf(const LogNormalParams& p, double x);
double mixture_pdf(const MixtureDGP& dgp, double x);

//! Closed-form maximum likelihood with the 1/n variance divisor.
LogNormalParams lognormal_mle(const Sample& sample);

//! Method of moments: alpha = mean^2 / var, eta = mean / var (1/n variance).
GammaParams gamma_preliminary(const Sample& prefix);

//! One scoring step from the preliminary estimate:
//!   alpha = a0 + (1 / (n psi_1(a0))) sum [ln(eta0 X_i) - psi(a0)],  eta0 = a0 / mean,
//!   eta = alpha / mean.
//! Throws StepFailureError if the step leaves alpha <= 0.
GammaParams gamma_one_step_mle(const Sample& sample, const OneStepConfig& cfg);

//! The scoring step applied repeatedly until alpha stops moving; the fixed
//! point solves the profiled likelihood equation, i.e. it is the MLE.
//! Steps that would leave alpha <= 0 are halved.
GammaParams gamma_multi_step_mle(const Sample& sample,
                                 const OneStepConfig& cfg,
                                 const MultiStepOptions& opts = {});

double sample_gamma_one(const GammaParams& p, Rng& rng);
std::vector<double> sample_gamma(const GammaParams& p, std::size_t n, Rng& rng);
std::vector<double> sample_lognormal(const LogNormalParams& p, std::size_t n, Rng& rng);
std::vector<double> sample_mixture(const MixtureDGP& dgp, std::size_t n, Rng& rng);

enum class Family
{
  gamma,
  lognormal,
  mixture
};

enum class FitMethod
{
  //! Single scoring step (Gamma only).
  one_step,
  //! Scoring iterated to convergence (Gamma only).
  multi_step,
  //! Closed-form MLE (LogNormal only).
  closed_form,
  //! Parameters are given, never re-estimated.
  fixed
};

std::string to_string(Family f);
std::string to_string(FitMethod m);
Family parse_family(const std::string& name);

//! A fully specified member of one of the supported families.
class ParametricModel
{
public:
  using Params = std::variant<GammaParams, LogNormalParams, MixtureDGP>;

  explicit ParametricModel(GammaParams p);
  explicit ParametricModel(LogNormalParams p);
  explicit ParametricModel(MixtureDGP p);

  Family family() const noexcept;
  const Params& params() const noexcept { return params_; }

  double pdf(double x) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;
  //! Quantile for the quadrature window (mixtures use the larger component quantile).
  double upper_quantile(double p) const;

  const GammaParams& gamma() const { return std::get<GammaParams>(params_); }
  const LogNormalParams& lognormal() const { return std::get<LogNormalParams>(params_); }

private:
  Params params_;
};

//! Default fitting method of a family: multi-step for Gamma, closed form for LogNormal.
FitMethod default_fit_method(Family f);

//! Fits `family` on the sample. With FitMethod::fixed, `fixed_model` is returned.
ParametricModel fit_model(Family family,
                          FitMethod method,
                          const Sample& sample,
                          const OneStepConfig& cfg = {},
                          const ParametricModel* fixed_model = nullptr);

} // namespace bregsel
