#pragma once

#include "bregsel/divergence.hpp"
#include "bregsel/kde.hpp"
#include "bregsel/parametric.hpp"
#include "bregsel/random.hpp"
#include "bregsel/sample.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace bregsel {

//! Everything that defines the divergence statistic apart from the models.
struct SelectionSettings
{
  BregmanGenerator generator{};
  TruncationPolicy truncation{};
  OneStepConfig one_step{};
  //! Number of points in the default cross-validation grid.
  std::size_t cv_grid_points = 60;
  //! When set, skips cross-validation and uses this bandwidth.
  std::optional<double> bandwidth;
  double quad_abs_tol = 1e-10;
  int quad_max_depth = 40;
  //! Window upper end: this quantile of the heavier-tailed model ...
  double window_quantile = 0.99999;
  //! ... plus this many bandwidths (and never below the sample maximum).
  double window_bandwidths = 10.0;
  //! Re-run bandwidth selection on every goodness-of-fit null replicate
  //! instead of reusing the observed sample's bandwidth.
  bool null_reselect_bandwidth = false;

  void validate() const;
};

//! How one candidate is obtained from data.
struct ModelSpec
{
  Family family = Family::gamma;
  FitMethod method = FitMethod::multi_step;
  //! Required for FitMethod::fixed.
  std::optional<ParametricModel> fixed;

  static ModelSpec fitted(Family f) { return { f, default_fit_method(f), std::nullopt }; }
  static ModelSpec fixed_model(const ParametricModel& m)
  {
    return { m.family(), FitMethod::fixed, m };
  }
};

struct PairSpec
{
  ModelSpec a = ModelSpec::fitted(Family::gamma);
  ModelSpec b = ModelSpec::fitted(Family::lognormal);
  SelectionSettings settings{};
};

//! Two candidates fitted on the same sample, with the density estimate
//! and integration window their divergences are computed against.
struct CandidatePair
{
  ModelSpec spec_a;
  ModelSpec spec_b;
  ParametricModel model_a;
  ParametricModel model_b;
  DensityEstimate kde;
  QuadratureSpec quad;
  SelectionSettings settings;
};

enum class Decision
{
  prefer_a,
  prefer_b,
  indecisive
};

std::string to_string(Decision d);

struct SelectionResult
{
  double d_a = 0.0;
  double d_b = 0.0;
  double kappa_hat = 0.0;
  double u = 0.0;
  Decision decision = Decision::indecisive;
  double level = 0.05;
  double critical_value = 0.0;
  std::size_t n = 0;
  //! Set when kappa could not be estimated; the decision is then Indecisive.
  bool kappa_degenerate = false;
  std::size_t bootstrap_used = 0;
};

//! Fits a model per its spec.
ParametricModel fit_candidate(const ModelSpec& spec, const Sample& sample, const SelectionSettings& settings);

//! [0, max(Q_a(q), Q_b(q), max X) + k h] from the settings.
QuadratureSpec divergence_window(const ParametricModel& a,
                                 const ParametricModel& b,
                                 const Sample& sample,
                                 double bandwidth,
                                 const SelectionSettings& settings);

//! Truncated plug-in divergence from the pair's density estimate to `model`.
double estimate_divergence(const DensityEstimate& kde,
                           const ParametricModel& model,
                           const QuadratureSpec& quad,
                           const SelectionSettings& settings);

//! Fits both candidates and builds the bias-reduced estimate with the
//! cross-validated bandwidth (or the fixed one from the settings).
CandidatePair fit_pair(const Sample& sample, const PairSpec& spec);

//! Refits both candidates on `sample`, keeping the pair's bandwidth.
CandidatePair refit_pair(const Sample& sample, const CandidatePair& pair);

//! (D_a, D_b) for the pair.
std::pair<double, double> pair_divergences(const CandidatePair& pair);

//! Nonparametric bootstrap standard deviation of sqrt(n) (D_a* - D_b*).
//! Each resample refits both models and reuses the original bandwidth.
//! Needs B >= 50. Throws DegenerateVarianceError when all replicate
//! differences coincide.
double kappa_bootstrap(const Sample& sample, const CandidatePair& pair, std::size_t B, Rng& rng);

//! Normal critical value z_{1 - level/2}.
double critical_value(double level);

//! PreferA iff u < -z, PreferB iff u > z.
Decision decide(double u, double level);

//! Both divergences, the bootstrap kappa, U = sqrt(n) (D_a - D_b) / kappa,
//! and the three-way decision. A degenerate kappa yields Indecisive.
SelectionResult u_statistic(const Sample& sample,
                            const CandidatePair& pair,
                            std::size_t B,
                            Rng& rng,
                            double level = 0.05);

struct GofResult
{
  ParametricModel model;
  double bandwidth = 0.0;
  double d_hat = 0.0;
  double t_obs = 0.0;
  double p_value = 1.0;
  //! Empirical (1 - level) quantile of the null replicates.
  double critical_value = 0.0;
  std::size_t null_used = 0;
  double level = 0.05;
  bool rejected = false;
};

//! Goodness-of-fit test of T = 2 n D against a parametric-bootstrap null:
//! M samples of size n from the fitted model, each refitted, give T*;
//! p = (1 + #{T* >= T}) / (M + 1). Null replicates reuse the observed
//! sample's bandwidth.
GofResult gof_statistic(const Sample& sample,
                        const ModelSpec& model,
                        const SelectionSettings& settings,
                        std::size_t M,
                        Rng& rng,
                        double level = 0.05);

//! Bootstrap standard deviation of sqrt(n) D* for a single candidate,
//! the plug-in for the normal approximation of the test statistic.
double lambda_bootstrap(const Sample& sample,
                        const ModelSpec& model,
                        const SelectionSettings& settings,
                        std::size_t B,
                        Rng& rng);

struct PowerSpec
{
  double t_alpha = 0.0;
  double lambda_phi = 1.0;
  double d_true = 0.0;
  std::size_t n = 1;
};

//! 1 - Phi((t_alpha - 2 n d) / (2 sqrt(n) lambda)).
double power_estimate(const PowerSpec& spec);

} // namespace bregsel
