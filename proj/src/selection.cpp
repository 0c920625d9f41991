#include "bregsel/selection.hpp"

#include "bregsel/error.hpp"
#include "bregsel/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bregsel {

void
SelectionSettings::validate() const
{
  generator.validate();
  one_step.validate();
  if (!(truncation.c_gamma > 0.0)) {
    throw DomainError("gamma_n constant must be positive");
  }
  if (cv_grid_points == 0) {
    throw DomainError("cross-validation grid needs at least one point");
  }
  if (bandwidth && !(*bandwidth > 0.0)) {
    throw DomainError("fixed bandwidth must be positive");
  }
  if (!(quad_abs_tol > 0.0) || quad_max_depth <= 0) {
    throw DomainError("quadrature tolerance and depth must be positive");
  }
  if (!(window_quantile > 0.0 && window_quantile < 1.0) || !(window_bandwidths >= 0.0)) {
    throw DomainError("invalid integration window settings");
  }
}

std::string
to_string(Decision d)
{
  switch (d) {
    case Decision::prefer_a:
      return "prefer_a";
    case Decision::prefer_b:
      return "prefer_b";
    case Decision::indecisive:
      return "indecisive";
  }
  return "unknown";
}

ParametricModel
fit_candidate(const ModelSpec& spec, const Sample& sample, const SelectionSettings& settings)
{
  return fit_model(spec.family, spec.method, sample, settings.one_step,
                   spec.fixed ? &*spec.fixed : nullptr);
}

QuadratureSpec
divergence_window(const ParametricModel& a,
                  const ParametricModel& b,
                  const Sample& sample,
                  double bandwidth,
                  const SelectionSettings& settings)
{
  const double q = std::max(a.upper_quantile(settings.window_quantile),
                            b.upper_quantile(settings.window_quantile));
  QuadratureSpec quad;
  quad.lower = 0.0;
  quad.upper = std::max(q, sample.max()) + settings.window_bandwidths * bandwidth;
  quad.abs_tol = settings.quad_abs_tol;
  quad.max_depth = settings.quad_max_depth;
  return quad;
}

double
estimate_divergence(const DensityEstimate& kde,
                    const ParametricModel& model,
                    const QuadratureSpec& quad,
                    const SelectionSettings& settings)
{
  return divergence_estimate(settings.generator, kde,
                             [&model](double x) { return model.pdf(x); }, settings.truncation,
                             quad);
}

namespace {

double
select_bandwidth(const Sample& sample, const SelectionSettings& settings)
{
  if (settings.bandwidth) {
    return *settings.bandwidth;
  }
  const auto grid = default_cv_grid(sample, settings.cv_grid_points);
  return cv_bandwidth(sample, grid);
}

CandidatePair
build_pair(const Sample& sample,
           const ModelSpec& spec_a,
           const ModelSpec& spec_b,
           const SelectionSettings& settings,
           double bandwidth)
{
  ParametricModel a = fit_candidate(spec_a, sample, settings);
  ParametricModel b = fit_candidate(spec_b, sample, settings);
  DensityEstimate kde(sample, bandwidth, KdeVariant::bias_reduced);
  QuadratureSpec quad = divergence_window(a, b, sample, bandwidth, settings);
  return CandidatePair{ spec_a, spec_b, std::move(a), std::move(b), std::move(kde), quad, settings };
}

Sample
resample(const Sample& sample, Rng& rng)
{
  const auto x = sample.values();
  std::vector<double> out(x.size());
  for (auto& v : out) {
    v = x[rng.index(x.size())];
  }
  return Sample(std::move(out), sample.label());
}

double
sd_of(const std::vector<double>& v)
{
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

CandidatePair
fit_pair(const Sample& sample, const PairSpec& spec)
{
  spec.settings.validate();
  return build_pair(sample, spec.a, spec.b, spec.settings, select_bandwidth(sample, spec.settings));
}

CandidatePair
refit_pair(const Sample& sample, const CandidatePair& pair)
{
  return build_pair(sample, pair.spec_a, pair.spec_b, pair.settings, pair.kde.bandwidth());
}

std::pair<double, double>
pair_divergences(const CandidatePair& pair)
{
  return { estimate_divergence(pair.kde, pair.model_a, pair.quad, pair.settings),
           estimate_divergence(pair.kde, pair.model_b, pair.quad, pair.settings) };
}

double
kappa_bootstrap(const Sample& sample, const CandidatePair& pair, std::size_t B, Rng& rng)
{
  if (B < 50) {
    throw DomainError("kappa bootstrap needs B >= 50");
  }
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  const std::uint64_t base = rng.split();
  std::vector<double> diffs;
  diffs.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng stream(derive_seed(base, { b }));
    try {
      const Sample star = resample(sample, stream);
      const CandidatePair refit = refit_pair(star, pair);
      const auto [da, db] = pair_divergences(refit);
      diffs.push_back(root_n * (da - db));
    } catch (const Error&) {
      // resamples on which a fit is impossible (e.g. all ties) are dropped
    }
  }
  if (diffs.size() < 2) {
    throw DegenerateVarianceError("fewer than two usable bootstrap resamples");
  }
  const bool all_equal =
    std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); });
  const double kappa = all_equal ? 0.0 : sd_of(diffs);
  if (!(kappa > 0.0)) {
    throw DegenerateVarianceError("all bootstrap divergence differences are identical");
  }
  return kappa;
}

double
critical_value(double level)
{
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("level must lie in (0, 1)");
  }
  return normal_quantile(1.0 - level / 2.0);
}

Decision
decide(double u, double level)
{
  const double z = critical_value(level);
  if (u < -z) {
    return Decision::prefer_a;
  }
  if (u > z) {
    return Decision::prefer_b;
  }
  return Decision::indecisive;
}

SelectionResult
u_statistic(const Sample& sample, const CandidatePair& pair, std::size_t B, Rng& rng, double level)
{
  SelectionResult r;
  r.level = level;
  r.critical_value = critical_value(level);
  r.n = sample.size();
  std::tie(r.d_a, r.d_b) = pair_divergences(pair);
  try {
    r.kappa_hat = kappa_bootstrap(sample, pair, B, rng);
    r.bootstrap_used = B;
  } catch (const DegenerateVarianceError&) {
    r.kappa_degenerate = true;
    r.kappa_hat = 0.0;
    r.u = 0.0;
    r.decision = Decision::indecisive;
    return r;
  }
  r.u = std::sqrt(static_cast<double>(r.n)) * (r.d_a - r.d_b) / r.kappa_hat;
  r.decision = decide(r.u, level);
  return r;
}

namespace {

double
upper_empirical_quantile(std::vector<double> v, double p)
{
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

GofResult
gof_statistic(const Sample& sample,
              const ModelSpec& model,
              const SelectionSettings& settings,
              std::size_t M,
              Rng& rng,
              double level)
{
  settings.validate();
  if (M == 0) {
    throw DomainError("goodness-of-fit bootstrap needs M >= 1");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("level must lie in (0, 1)");
  }
  const std::size_t n = sample.size();
  const double h = select_bandwidth(sample, settings);

  auto statistic = [&](const Sample& s, const ParametricModel& fitted, double bw) {
    DensityEstimate kde(s, bw, KdeVariant::bias_reduced);
    const QuadratureSpec quad = divergence_window(fitted, fitted, s, bw, settings);
    return estimate_divergence(kde, fitted, quad, settings);
  };

  const ParametricModel fitted = fit_candidate(model, sample, settings);
  GofResult out{ fitted };
  out.bandwidth = h;
  out.level = level;
  out.d_hat = statistic(sample, fitted, h);
  out.t_obs = 2.0 * static_cast<double>(n) * out.d_hat;

  const std::uint64_t base = rng.split();
  std::vector<double> null_t;
  null_t.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    Rng stream(derive_seed(base, { m }));
    try {
      const Sample star(fitted.sample(n, stream), "null");
      const ParametricModel refit = fit_candidate(model, star, settings);
      const double bw = settings.null_reselect_bandwidth ? select_bandwidth(star, settings) : h;
      null_t.push_back(2.0 * static_cast<double>(n) * statistic(star, refit, bw));
    } catch (const Error&) {
      // unusable null replicate; it is not counted in M
    }
  }
  if (null_t.empty()) {
    throw DegenerateVarianceError("no usable null replicates");
  }
  const auto exceed = static_cast<double>(
    std::count_if(null_t.begin(), null_t.end(), [&](double t) { return t >= out.t_obs; }));
  out.null_used = null_t.size();
  out.p_value = (1.0 + exceed) / (static_cast<double>(null_t.size()) + 1.0);
  out.critical_value = upper_empirical_quantile(null_t, 1.0 - level);
  out.rejected = out.p_value < level;
  return out;
}

double
lambda_bootstrap(const Sample& sample,
                 const ModelSpec& model,
                 const SelectionSettings& settings,
                 std::size_t B,
                 Rng& rng)
{
  settings.validate();
  if (B < 2) {
    throw DomainError("lambda bootstrap needs B >= 2");
  }
  const double h = select_bandwidth(sample, settings);
  const double root_n = std::sqrt(static_cast<double>(sample.size()));
  const std::uint64_t base = rng.split();
  std::vector<double> values;
  values.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    Rng stream(derive_seed(base, { b }));
    try {
      const Sample star = resample(sample, stream);
      const ParametricModel refit = fit_candidate(model, star, settings);
      DensityEstimate kde(star, h, KdeVariant::bias_reduced);
      const QuadratureSpec quad = divergence_window(refit, refit, star, h, settings);
      values.push_back(root_n * estimate_divergence(kde, refit, quad, settings));
    } catch (const Error&) {
    }
  }
  if (values.size() < 2) {
    throw DegenerateVarianceError("fewer than two usable bootstrap resamples");
  }
  const double lambda = sd_of(values);
  if (!(lambda > 0.0)) {
    throw DegenerateVarianceError("bootstrap divergences are all identical");
  }
  return lambda;
}

double
power_estimate(const PowerSpec& spec)
{
  if (!(spec.lambda_phi > 0.0) || spec.n == 0) {
    throw DomainError("power needs lambda_phi > 0 and n >= 1");
  }
  const double n = static_cast<double>(spec.n);
  const double z = (spec.t_alpha - 2.0 * n * spec.d_true) / (2.0 * std::sqrt(n) * spec.lambda_phi);
  return 1.0 - normal_cdf(z);
}

} // namespace bregsel
