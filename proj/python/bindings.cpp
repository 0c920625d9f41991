#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bregsel/divergence.hpp"
#include "bregsel/error.hpp"
#include "bregsel/kde.hpp"
#include "bregsel/montecarlo.hpp"
#include "bregsel/parametric.hpp"
#include "bregsel/random.hpp"
#include "bregsel/selection.hpp"

namespace py = pybind11;
using namespace bregsel;

namespace {

SelectionSettings
settings(double beta, double c1, double gamma_n, double delta)
{
  SelectionSettings s;
  s.generator.beta = beta;
  s.generator.c1 = c1;
  s.truncation.c_gamma = gamma_n;
  s.one_step.delta = delta;
  return s;
}

py::dict
params_dict(const ParametricModel& m)
{
  py::dict d;
  d["family"] = to_string(m.family());
  if (m.family() == Family::gamma) {
    d["alpha"] = m.gamma().alpha;
    d["eta"] = m.gamma().eta;
  } else {
    d["mu"] = m.lognormal().mu;
    d["sigma"] = m.lognormal().sigma;
  }
  return d;
}

py::dict
mean_sd(const MeanSd& m)
{
  py::dict d;
  d["mean"] = m.mean;
  d["sd"] = m.sd;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Bregman-divergence model selection between Gamma and log-normal candidates";

  //! every library error derives from bregsel.Error, itself a ValueError
  static py::exception<Error> base(m, "Error", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<DegenerateFitError>(m, "DegenerateFitError", base.ptr());
  py::register_exception<StepFailureError>(m, "StepFailureError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<DegenerateEstimateError>(m, "DegenerateEstimateError", base.ptr());
  py::register_exception<DegenerateVarianceError>(m, "DegenerateVarianceError", base.ptr());

  m.def(
    "fit",
    [](std::vector<double> xs, const std::string& family, const std::string& method, double delta) {
      const Sample s(std::move(xs));
      const Family f = parse_family(family);
      FitMethod fm = default_fit_method(f);
      if (method == "one-step") {
        fm = FitMethod::one_step;
      } else if (method == "multi-step") {
        fm = FitMethod::multi_step;
      } else if (method != "default") {
        throw DomainError("unknown fit method '" + method + "'");
      }
      return params_dict(fit_model(f, fm, s, OneStepConfig{ delta }));
    },
    py::arg("data"),
    py::arg("family") = "gamma",
    py::arg("method") = "default",
    py::arg("delta") = 0.6);

  m.def(
    "cv_bandwidth",
    [](std::vector<double> xs, std::size_t grid_points) {
      const Sample s(std::move(xs));
      return cv_bandwidth(s, default_cv_grid(s, grid_points));
    },
    py::arg("data"),
    py::arg("grid_points") = 60);

  m.def(
    "kde",
    [](std::vector<double> xs, const std::vector<double>& at, double bandwidth, bool bias_reduced) {
      const Sample s(std::move(xs));
      const DensityEstimate est(s, bandwidth, bias_reduced ? KdeVariant::bias_reduced : KdeVariant::ordinary);
      std::vector<double> out;
      out.reserve(at.size());
      for (double x : at) {
        out.push_back(est(x));
      }
      return out;
    },
    py::arg("data"),
    py::arg("x"),
    py::arg("bandwidth"),
    py::arg("bias_reduced") = true);

  m.def(
    "bregman",
    [](double p, double q, double beta, double c1) { return bregman_pointwise(BregmanGenerator{ beta, c1 }, p, q); },
    py::arg("p"),
    py::arg("q"),
    py::arg("beta") = 3.0,
    py::arg("c1") = 1.0);

  m.def(
    "select",
    [](std::vector<double> xs,
       const std::string& family_a,
       const std::string& family_b,
       double beta,
       double c1,
       double level,
       std::size_t bootstrap,
       std::uint64_t seed,
       double gamma_n,
       double delta) {
      const Sample s(std::move(xs));
      const PairSpec spec{ ModelSpec::fitted(parse_family(family_a)),
                           ModelSpec::fitted(parse_family(family_b)),
                           settings(beta, c1, gamma_n, delta) };
      const CandidatePair pair = fit_pair(s, spec);
      Rng rng(seed);
      const SelectionResult r = u_statistic(s, pair, bootstrap, rng, level);
      py::dict d;
      d["n"] = r.n;
      d["bandwidth"] = pair.kde.bandwidth();
      d["model_a"] = params_dict(pair.model_a);
      d["model_b"] = params_dict(pair.model_b);
      d["d_a"] = r.d_a;
      d["d_b"] = r.d_b;
      d["kappa_hat"] = r.kappa_hat;
      d["u"] = r.u;
      d["critical_value"] = r.critical_value;
      d["decision"] = to_string(r.decision);
      return d;
    },
    py::arg("data"),
    py::arg("family_a") = "gamma",
    py::arg("family_b") = "lognormal",
    py::arg("beta") = 3.0,
    py::arg("c1") = 1.0,
    py::arg("level") = 0.05,
    py::arg("bootstrap") = 200,
    py::arg("seed") = 42,
    py::arg("gamma_n") = 0.01,
    py::arg("delta") = 0.6);

  m.def(
    "gof",
    [](std::vector<double> xs, const std::string& family, std::size_t M, std::uint64_t seed, double beta, double level) {
      const Sample s(std::move(xs));
      SelectionSettings st;
      st.generator.beta = beta;
      Rng rng(seed);
      const GofResult r = gof_statistic(s, ModelSpec::fitted(parse_family(family)), st, M, rng, level);
      py::dict d;
      d["model"] = params_dict(r.model);
      d["d_hat"] = r.d_hat;
      d["t_obs"] = r.t_obs;
      d["p_value"] = r.p_value;
      d["null_replicates"] = r.null_used;
      d["rejected"] = r.rejected;
      return d;
    },
    py::arg("data"),
    py::arg("family") = "gamma",
    py::arg("M") = 500,
    py::arg("seed") = 42,
    py::arg("beta") = 3.0,
    py::arg("level") = 0.05);

  m.def(
    "simulate",
    [](double pi,
       std::vector<std::size_t> sizes,
       std::size_t replications,
       std::uint64_t seed,
       std::size_t bootstrap,
       unsigned threads) {
      ExperimentConfig c;
      c.pi = pi;
      c.sample_sizes = std::move(sizes);
      c.replications = replications;
      c.master_seed = seed;
      c.bootstrap_B = bootstrap;
      c.threads = threads;
      std::vector<TableRow> rows;
      {
        py::gil_scoped_release release;
        rows = run_experiment(c);
      }
      py::list out;
      for (const auto& r : rows) {
        py::dict d;
        d["n"] = r.n;
        d["alpha"] = mean_sd(r.alpha);
        d["eta"] = mean_sd(r.eta);
        d["mu"] = mean_sd(r.mu);
        d["sigma"] = mean_sd(r.sigma);
        d["d_gamma"] = mean_sd(r.d_gamma);
        d["d_lognormal"] = mean_sd(r.d_lognormal);
        d["u"] = mean_sd(r.u);
        d["pcs"] = py::make_tuple(r.pcs.first, r.pcs.indecisive, r.pcs.last);
        d["skipped"] = r.skipped;
        out.append(d);
      }
      return out;
    },
    py::arg("pi"),
    py::arg("sizes"),
    py::arg("replications"),
    py::arg("seed") = 42,
    py::arg("bootstrap") = 100,
    py::arg("threads") = 0);
}
