#include "cli.hpp"

#include "bregsel/divergence.hpp"
#include "bregsel/kde.hpp"
#include "bregsel/parametric.hpp"
#include "bregsel/selection.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace bregsel::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

ParseError::ParseError(std::size_t line, std::size_t column, std::size_t token, const std::string& text)
  : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": token " +
          std::to_string(token) + " '" + text + "' is not a number")
  , line_(line)
  , column_(column)
  , token_(token)
{}

Sample
parse_dataset(std::istream& in, const std::string& label)
{
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  std::size_t token_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (std::isspace(static_cast<unsigned char>(line[pos])) || line[pos] == ',')) {
        ++pos;
      }
      if (pos >= line.size()) {
        break;
      }
      std::size_t end = pos;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])) && line[end] != ',') {
        ++end;
      }
      ++token_no;
      const std::string token = line.substr(pos, end - pos);
      double v = 0.0;
      const char* begin = token.data();
      const char* stop = token.data() + token.size();
      if (*begin == '+') {
        ++begin;
      }
      const auto [ptr, ec] = std::from_chars(begin, stop, v);
      if (ec != std::errc() || ptr != stop || !std::isfinite(v)) {
        throw ParseError(line_no, pos + 1, token_no, token);
      }
      values.push_back(v);
      pos = end;
    }
  }
  if (values.size() < 2) {
    throw SizeError("dataset needs at least 2 values, found " + std::to_string(values.size()));
  }
  return Sample(std::move(values), label);
}

Sample
read_dataset(const std::string& path, std::istream& stdin_stream)
{
  if (path == "-") {
    return parse_dataset(stdin_stream, "stdin");
  }
  std::ifstream file(path);
  if (!file) {
    throw InputNotFoundError("cannot open input file '" + path + "'");
  }
  return parse_dataset(file, fs::path(path).filename().string());
}

void
write_atomically(const std::string& path, const std::string& content)
{
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw InputNotFoundError("cannot create output file '" + path + "'");
    }
    f << content;
    f.flush();
    if (!f) {
      throw InputNotFoundError("failed writing output file '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputNotFoundError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

namespace {

std::string
num(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string
short_num(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* const kSimulationHeader =
  "n,alpha_mean,alpha_sd,eta_mean,eta_sd,mu_mean,mu_sd,sigma_mean,sigma_sd,"
  "d1_mean,d1_sd,d2_mean,d2_sd,u_mean,u_sd,pcs_a,pcs_ind,pcs_b,skipped";

} // namespace

std::string
simulation_csv(const std::vector<TableRow>& rows)
{
  std::ostringstream os;
  os << kSimulationHeader << '\n';
  for (const auto& r : rows) {
    os << r.n;
    for (const MeanSd* m : { &r.alpha, &r.eta, &r.mu, &r.sigma, &r.d_gamma, &r.d_lognormal, &r.u }) {
      os << ',' << num(m->mean) << ',' << num(m->sd);
    }
    os << ',' << num(r.pcs.first) << ',' << num(r.pcs.indecisive) << ',' << num(r.pcs.last) << ','
       << r.skipped << '\n';
  }
  return os.str();
}

std::vector<TableRow>
parse_simulation_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != kSimulationHeader) {
    throw DomainError("simulation CSV header mismatch");
  }
  std::vector<TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() != 19) {
      throw DomainError("simulation CSV row has " + std::to_string(cells.size()) + " fields");
    }
    auto d = [&](std::size_t i) { return std::strtod(cells[i].c_str(), nullptr); };
    TableRow r;
    r.n = std::stoul(cells[0]);
    MeanSd* stats[] = { &r.alpha, &r.eta, &r.mu, &r.sigma, &r.d_gamma, &r.d_lognormal, &r.u };
    for (std::size_t k = 0; k < 7; ++k) {
      stats[k]->mean = d(1 + 2 * k);
      stats[k]->sd = d(2 + 2 * k);
    }
    r.pcs = { d(15), d(16), d(17) };
    r.skipped = std::stoul(cells[18]);
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct CommonOptions
{
  std::string input = "-";
  std::string format = "text";
  std::uint64_t seed = 42;
  double beta = 3.0;
  double c1 = 1.0;
  double level = 0.05;
  std::size_t bootstrap = 200;
  double gamma_n = 0.01;
  double delta = 0.6;
  std::string out;
  bool quiet = false;
};

void
add_common(CLI::App* cmd, CommonOptions& o, bool with_input = true)
{
  if (with_input) {
    cmd->add_option("--input,-i", o.input, "Dataset path, or - for standard input")
      ->capture_default_str();
  }
  cmd->add_option("--format", o.format, "Output format: text, json or csv")
    ->check(CLI::IsMember({ "text", "json", "csv" }))
    ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--beta", o.beta, "Generator exponent beta")->capture_default_str();
  cmd->add_option("--c1", o.c1, "Generator scale c1 (> 0)")->capture_default_str();
  cmd->add_option("--level", o.level, "Test level in (0, 1)")->capture_default_str();
  cmd->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates for kappa (>= 50)")
    ->capture_default_str();
  cmd->add_option("--gamma-n", o.gamma_n, "Truncation constant c in gamma_n = c / n")
    ->capture_default_str();
  cmd->add_option("--delta", o.delta, "Preliminary-sample exponent in (1/2, 1)")
    ->capture_default_str();
  cmd->add_option("--out,-o", o.out, "Write the report here instead of standard output");
  cmd->add_flag("--quiet,-q", o.quiet, "No diagnostics on standard error");
}

void
validate_common(const CommonOptions& o)
{
  if (!std::isfinite(o.beta)) {
    throw UsageError("--beta must be finite");
  }
  if (!(o.c1 > 0.0)) {
    throw UsageError("--c1 must be positive");
  }
  if (!(o.level > 0.0 && o.level < 1.0)) {
    throw UsageError("--level must lie in (0, 1)");
  }
  if (o.bootstrap < 50) {
    throw UsageError("--bootstrap must be at least 50");
  }
  if (!(o.gamma_n > 0.0)) {
    throw UsageError("--gamma-n must be positive");
  }
  if (!(o.delta > 0.5 && o.delta < 1.0)) {
    throw UsageError("--delta must lie in (1/2, 1)");
  }
}

SelectionSettings
settings_from(const CommonOptions& o)
{
  SelectionSettings s;
  s.generator.beta = o.beta;
  s.generator.c1 = o.c1;
  s.truncation.c_gamma = o.gamma_n;
  s.one_step.delta = o.delta;
  return s;
}

bool
use_color(std::ostream& out)
{
  return &out == &std::cout && std::getenv("NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) != 0;
}

void
emit(const CommonOptions& o, std::ostream& out, const std::string& content)
{
  if (o.out.empty()) {
    out << content;
  } else {
    write_atomically(o.out, content);
  }
}

Sample
load(const CommonOptions& o, std::istream& in, std::ostream& err)
{
  Sample s = read_dataset(o.input, in);
  if (!o.quiet) {
    err << "read " << s.size() << " values from " << (o.input == "-" ? "stdin" : o.input)
        << " (min " << short_num(s.min()) << ", max " << short_num(s.max()) << ")\n";
  }
  return s;
}

json
model_json(const ParametricModel& m, FitMethod method)
{
  json j;
  j["family"] = to_string(m.family());
  j["method"] = to_string(method);
  if (m.family() == Family::gamma) {
    j["alpha"] = m.gamma().alpha;
    j["eta"] = m.gamma().eta;
  } else if (m.family() == Family::lognormal) {
    j["mu"] = m.lognormal().mu;
    j["sigma"] = m.lognormal().sigma;
  }
  return j;
}

std::string
model_text(const ParametricModel& m)
{
  if (m.family() == Family::gamma) {
    return "alpha = " + short_num(m.gamma().alpha) + ", eta = " + short_num(m.gamma().eta);
  }
  return "mu = " + short_num(m.lognormal().mu) + ", sigma = " + short_num(m.lognormal().sigma);
}

// first and second parameter of a fitted model, for CSV columns
std::pair<double, double>
model_params(const ParametricModel& m)
{
  if (m.family() == Family::gamma) {
    return { m.gamma().alpha, m.gamma().eta };
  }
  return { m.lognormal().mu, m.lognormal().sigma };
}

// ---------------------------------------------------------------- fit

struct FitOptions
{
  CommonOptions common;
  std::string gamma_method = "multi-step";
};

int
cmd_fit(const FitOptions& o, std::istream& in, std::ostream& out, std::ostream& err)
{
  validate_common(o.common);
  const Sample s = load(o.common, in, err);
  const FitMethod gm = o.gamma_method == "one-step" ? FitMethod::one_step : FitMethod::multi_step;
  SelectionSettings settings = settings_from(o.common);
  const ParametricModel g = fit_model(Family::gamma, gm, s, settings.one_step);
  const ParametricModel l = fit_model(Family::lognormal, FitMethod::closed_form, s);
  const double h = cv_bandwidth(s, default_cv_grid(s, settings.cv_grid_points));

  std::ostringstream os;
  if (o.common.format == "json") {
    json j;
    j["n"] = s.size();
    j["min"] = s.min();
    j["max"] = s.max();
    j["bandwidth"] = h;
    j["gamma"] = model_json(g, gm);
    j["lognormal"] = model_json(l, FitMethod::closed_form);
    os << j.dump(2) << '\n';
  } else if (o.common.format == "csv") {
    os << "n,bandwidth,alpha,eta,mu,sigma\n"
       << s.size() << ',' << num(h) << ',' << num(g.gamma().alpha) << ',' << num(g.gamma().eta) << ','
       << num(l.lognormal().mu) << ',' << num(l.lognormal().sigma) << '\n';
  } else {
    os << "n = " << s.size() << ", CV bandwidth = " << short_num(h) << '\n'
       << "gamma (" << to_string(gm) << "): " << model_text(g) << '\n'
       << "lognormal (closed-form): " << model_text(l) << '\n';
  }
  emit(o.common, out, os.str());
  return 0;
}

// ---------------------------------------------------------------- select

struct SelectOptions
{
  CommonOptions common;
  std::string families = "gamma,lognormal";
};

std::pair<Family, Family>
parse_families(const std::string& text)
{
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError("--families needs two comma-separated names, e.g. gamma,lognormal");
  }
  try {
    return { parse_family(text.substr(0, comma)), parse_family(text.substr(comma + 1)) };
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::string
decision_label(Decision d, const CandidatePair& pair)
{
  switch (d) {
    case Decision::prefer_a:
      return "prefer " + to_string(pair.model_a.family()) + " (A)";
    case Decision::prefer_b:
      return "prefer " + to_string(pair.model_b.family()) + " (B)";
    default:
      return "indecisive";
  }
}

int
cmd_select(const SelectOptions& o, std::istream& in, std::ostream& out, std::ostream& err)
{
  validate_common(o.common);
  const auto [fa, fb] = parse_families(o.families);
  const Sample s = load(o.common, in, err);
  PairSpec spec{ ModelSpec::fitted(fa), ModelSpec::fitted(fb), settings_from(o.common) };
  const CandidatePair pair = fit_pair(s, spec);
  Rng rng(o.common.seed);
  const SelectionResult r = u_statistic(s, pair, o.common.bootstrap, rng, o.common.level);

  std::ostringstream os;
  if (o.common.format == "json") {
    json j;
    j["n"] = r.n;
    j["bandwidth"] = pair.kde.bandwidth();
    j["model_a"] = model_json(pair.model_a, pair.spec_a.method);
    j["model_b"] = model_json(pair.model_b, pair.spec_b.method);
    j["d_a"] = r.d_a;
    j["d_b"] = r.d_b;
    j["kappa_hat"] = r.kappa_hat;
    j["u"] = r.u;
    j["critical_value"] = r.critical_value;
    j["level"] = r.level;
    j["decision"] = to_string(r.decision);
    j["kappa_degenerate"] = r.kappa_degenerate;
    j["seed"] = o.common.seed;
    os << j.dump(2) << '\n';
  } else if (o.common.format == "csv") {
    const auto [a1, a2] = model_params(pair.model_a);
    const auto [b1, b2] = model_params(pair.model_b);
    os << "n,bandwidth,family_a,a_param1,a_param2,family_b,b_param1,b_param2,d_a,d_b,kappa_hat,u,"
          "critical_value,decision\n"
       << r.n << ',' << num(pair.kde.bandwidth()) << ',' << to_string(pair.model_a.family()) << ','
       << num(a1) << ',' << num(a2) << ',' << to_string(pair.model_b.family()) << ',' << num(b1) << ','
       << num(b2) << ',' << num(r.d_a) << ',' << num(r.d_b) << ',' << num(r.kappa_hat) << ','
       << num(r.u) << ',' << num(r.critical_value) << ',' << to_string(r.decision) << '\n';
  } else {
    const bool color = o.common.out.empty() && use_color(out);
    os << "sample: " << s.label() << " (n = " << s.size() << ")\n"
       << "bandwidth (cross-validated): " << short_num(pair.kde.bandwidth()) << '\n'
       << "A: " << to_string(pair.model_a.family()) << " [" << to_string(pair.spec_a.method)
       << "] " << model_text(pair.model_a) << '\n'
       << "B: " << to_string(pair.model_b.family()) << " [" << to_string(pair.spec_b.method)
       << "] " << model_text(pair.model_b) << '\n'
       << "D_A = " << short_num(r.d_a) << ", D_B = " << short_num(r.d_b) << '\n'
       << "kappa = " << short_num(r.kappa_hat) << (r.kappa_degenerate ? " (degenerate)" : "")
       << ", U = " << short_num(r.u) << ", critical value = " << short_num(r.critical_value)
       << '\n'
       << "decision: " << (color ? "\033[1m" : "") << decision_label(r.decision, pair)
       << (color ? "\033[0m" : "") << '\n';
  }
  emit(o.common, out, os.str());
  switch (r.decision) {
    case Decision::prefer_a:
      return 0;
    case Decision::prefer_b:
      return 1;
    default:
      return 2;
  }
}

// ---------------------------------------------------------------- gof

struct GofOptions
{
  CommonOptions common;
  std::string family = "gamma";
  std::size_t M = 500;
};

int
cmd_gof(const GofOptions& o, std::istream& in, std::ostream& out, std::ostream& err)
{
  validate_common(o.common);
  if (o.M == 0) {
    throw UsageError("--M must be at least 1");
  }
  Family family;
  try {
    family = parse_family(o.family);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const Sample s = load(o.common, in, err);
  Rng rng(o.common.seed);
  const GofResult r =
    gof_statistic(s, ModelSpec::fitted(family), settings_from(o.common), o.M, rng, o.common.level);

  std::ostringstream os;
  if (o.common.format == "json") {
    json j;
    j["n"] = s.size();
    j["model"] = model_json(r.model, default_fit_method(family));
    j["bandwidth"] = r.bandwidth;
    j["d_hat"] = r.d_hat;
    j["t_obs"] = r.t_obs;
    j["p_value"] = r.p_value;
    j["critical_value"] = r.critical_value;
    j["null_replicates"] = r.null_used;
    j["level"] = r.level;
    j["rejected"] = r.rejected;
    os << j.dump(2) << '\n';
  } else if (o.common.format == "csv") {
    const auto [p1, p2] = model_params(r.model);
    os << "n,family,param1,param2,bandwidth,d_hat,t_obs,p_value,critical_value,null_replicates,"
          "rejected\n"
       << s.size() << ',' << to_string(family) << ',' << num(p1) << ',' << num(p2) << ','
       << num(r.bandwidth) << ',' << num(r.d_hat) << ',' << num(r.t_obs) << ',' << num(r.p_value)
       << ',' << num(r.critical_value) << ',' << r.null_used << ',' << (r.rejected ? 1 : 0)
       << '\n';
  } else {
    os << "sample: " << s.label() << " (n = " << s.size() << ")\n"
       << to_string(family) << ": " << model_text(r.model) << '\n'
       << "T = 2nD = " << short_num(r.t_obs) << ", p-value = " << short_num(r.p_value) << " ("
       << r.null_used << " null replicates)\n"
       << (r.rejected ? "rejected" : "not rejected") << " at level " << short_num(r.level)
       << '\n';
  }
  emit(o.common, out, os.str());
  return r.rejected ? 1 : 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions
{
  CommonOptions common;
  int table = 0;
  double pi = -1.0;
  std::vector<std::size_t> sizes;
  std::size_t reps = 1000;
  unsigned threads = 0;
};

std::string
simulation_text(const ExperimentConfig& config, const std::vector<TableRow>& rows)
{
  std::ostringstream os;
  const bool labelled = config.pi == 0.0 || config.pi == 1.0;
  os << "DGP: " << short_num(config.pi) << " Gamma(" << short_num(config.gamma_truth.alpha) << ", "
     << short_num(config.gamma_truth.eta) << ") + " << short_num(1.0 - config.pi)
     << " log-normal(" << short_num(config.lognormal_truth.mu) << ", "
     << short_num(config.lognormal_truth.sigma) << "), " << config.replications
     << " replications\n";
  auto line = [&](const std::string& name, auto getter, int precision) {
    os << std::left << std::setw(14) << name;
    for (const auto& r : rows) {
      const MeanSd m = getter(r);
      std::ostringstream cell;
      cell << std::setprecision(precision) << m.mean << " (" << m.sd << ")";
      os << std::setw(26) << cell.str();
    }
    os << '\n';
  };
  os << std::left << std::setw(14) << "n";
  for (const auto& r : rows) {
    os << std::setw(26) << r.n;
  }
  os << '\n';
  line("alpha", [](const TableRow& r) { return r.alpha; }, 5);
  line("eta", [](const TableRow& r) { return r.eta; }, 4);
  line("mu", [](const TableRow& r) { return r.mu; }, 5);
  line("sigma", [](const TableRow& r) { return r.sigma; }, 4);
  line("D(gamma)", [](const TableRow& r) { return r.d_gamma; }, 3);
  line("D(lognormal)", [](const TableRow& r) { return r.d_lognormal; }, 3);
  line("U", [](const TableRow& r) { return r.u; }, 4);
  const char* names[3] = { labelled ? "correct" : "gamma", "indecisive",
                           labelled ? "incorrect" : "lognormal" };
  for (int k = 0; k < 3; ++k) {
    os << std::left << std::setw(14) << names[k];
    for (const auto& r : rows) {
      const double v = k == 0 ? r.pcs.first : (k == 1 ? r.pcs.indecisive : r.pcs.last);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << v << '%';
      os << std::setw(26) << cell.str();
    }
    os << '\n';
  }
  for (const auto& r : rows) {
    if (r.warning) {
      os << "warning: " << *r.warning << '\n';
    }
  }
  return os.str();
}

int
cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err)
{
  if (o.common.bootstrap < 50) {
    throw UsageError("--bootstrap must be at least 50");
  }
  if (!(o.common.level > 0.0 && o.common.level < 1.0)) {
    throw UsageError("--level must lie in (0, 1)");
  }
  if (!(o.common.c1 > 0.0) || !(o.common.gamma_n > 0.0)) {
    throw UsageError("--c1 and --gamma-n must be positive");
  }
  if (o.reps == 0) {
    throw UsageError("--reps must be at least 1");
  }
  const bool has_table = o.table != 0;
  const bool has_pi = o.pi >= 0.0;
  if (has_table == has_pi) {
    throw UsageError("give exactly one of --table or --pi");
  }
  ExperimentConfig config;
  if (has_table) {
    if (o.table < 1 || o.table > 5) {
      throw UsageError("--table must be 1..5");
    }
    config = table_config(o.table);
  } else {
    if (o.pi > 1.0) {
      throw UsageError("--pi must lie in [0, 1]");
    }
    config.pi = o.pi;
  }
  if (!o.sizes.empty()) {
    config.sample_sizes = o.sizes;
  }
  for (auto n : config.sample_sizes) {
    if (n < 10) {
      throw UsageError("--sizes entries must be at least 10");
    }
  }
  config.replications = o.reps;
  config.master_seed = o.common.seed;
  config.level = o.common.level;
  config.bootstrap_B = o.common.bootstrap;
  config.threads = o.threads;
  config.settings = settings_from(o.common);

  ProgressFn progress;
  if (!o.common.quiet) {
    progress = [&err](std::size_t done, std::size_t total) {
      if (done == total || done % std::max<std::size_t>(1, total / 10) == 0) {
        err << "simulate: " << done << '/' << total << " replications\n";
      }
    };
  }
  const auto rows = run_experiment(config, progress);

  std::string content;
  if (o.common.format == "csv") {
    content = simulation_csv(rows);
  } else if (o.common.format == "json") {
    json j;
    j["pi"] = config.pi;
    j["replications"] = config.replications;
    j["seed"] = config.master_seed;
    j["bootstrap"] = config.bootstrap_B;
    j["rows"] = json::array();
    for (const auto& r : rows) {
      json row;
      row["n"] = r.n;
      auto ms = [](const MeanSd& m) { return json{ { "mean", m.mean }, { "sd", m.sd } }; };
      row["alpha"] = ms(r.alpha);
      row["eta"] = ms(r.eta);
      row["mu"] = ms(r.mu);
      row["sigma"] = ms(r.sigma);
      row["d1"] = ms(r.d_gamma);
      row["d2"] = ms(r.d_lognormal);
      row["u"] = ms(r.u);
      row["pcs"] = { r.pcs.first, r.pcs.indecisive, r.pcs.last };
      row["skipped"] = r.skipped;
      if (r.warning) {
        row["warning"] = *r.warning;
      }
      j["rows"].push_back(row);
    }
    content = j.dump(2) + "\n";
  } else {
    content = simulation_text(config, rows);
  }
  emit(o.common, out, content);
  return 0;
}

// ---------------------------------------------------------------- plotdata

struct PlotOptions
{
  CommonOptions common;
  int bins = 10;
};

int
cmd_plotdata(const PlotOptions& o, std::istream& in, std::ostream& out, std::ostream& err)
{
  if (o.bins < 2) {
    throw UsageError("--bins must be at least 2");
  }
  if (!(o.common.delta > 0.5 && o.common.delta < 1.0)) {
    throw UsageError("--delta must lie in (1/2, 1)");
  }
  const Sample s = load(o.common, in, err);
  const OneStepConfig cfg{ o.common.delta };
  const ParametricModel g = fit_model(Family::gamma, FitMethod::multi_step, s, cfg);
  const ParametricModel l = fit_model(Family::lognormal, FitMethod::closed_form, s);

  const double lo = s.min();
  const double hi = s.max();
  const double width = (hi - lo) / o.bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(o.bins), 0);
  for (double x : s.values()) {
    auto k = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(k, counts.size() - 1)]++;
  }

  std::ostringstream os;
  os << "# histogram\nbin_left,bin_right,density\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double left = lo + static_cast<double>(k) * width;
    const double right = k + 1 == counts.size() ? hi : lo + static_cast<double>(k + 1) * width;
    os << num(left) << ',' << num(right) << ','
       << num(static_cast<double>(counts[k]) / (static_cast<double>(s.size()) * width)) << '\n';
  }
  constexpr int kCurvePoints = 512;
  auto curve = [&](const char* name, const ParametricModel& m) {
    os << "\n# " << name << "\nx,pdf\n";
    for (int k = 0; k < kCurvePoints; ++k) {
      const double x = lo + (hi - lo) * k / (kCurvePoints - 1);
      os << num(x) << ',' << num(m.pdf(x)) << '\n';
    }
  };
  curve("gamma_curve", g);
  curve("lognormal_curve", l);
  emit(o.common, out, os.str());
  return 0;
}

// Splices `key = value` lines from --config into the argument list ahead
// of the user's own flags, so flags win over the file.
std::vector<std::string>
expand_config(const std::vector<std::string>& args)
{
  std::vector<std::string> result;
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) {
    return rest;
  }
  std::ifstream file(config_path);
  if (!file) {
    throw InputNotFoundError("cannot open config file '" + config_path + "'");
  }
  std::vector<std::string> injected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + " is not key = value");
    }
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r\"");
      const auto e = t.find_last_not_of(" \t\r\"");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config line " + std::to_string(line_no) + " has an empty key");
    }
    if (value == "true") {
      injected.push_back("--" + key);
    } else if (value != "false") {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  // program name and subcommand first, then file values, then flags
  std::size_t split = std::min<std::size_t>(2, rest.size());
  result.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(split));
  result.insert(result.end(), injected.begin(), injected.end());
  result.insert(result.end(), rest.begin() + static_cast<std::ptrdiff_t>(split), rest.end());
  return result;
}

} // namespace

int
run(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Model selection between Gamma and log-normal candidates with Bregman "
                "divergences against a bias-reduced kernel density estimate" };
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  FitOptions fit_o;
  SelectOptions select_o;
  GofOptions gof_o;
  SimulateOptions sim_o;
  sim_o.common.bootstrap = 100;
  PlotOptions plot_o;

  auto* fit = app.add_subcommand("fit", "Fit Gamma and log-normal models to a dataset");
  add_common(fit, fit_o.common);
  fit->add_option("--gamma-method", fit_o.gamma_method, "Gamma estimator: multi-step or one-step")
    ->check(CLI::IsMember({ "multi-step", "one-step" }))
    ->capture_default_str();

  auto* select = app.add_subcommand("select", "Choose between two candidate families");
  add_common(select, select_o.common);
  select->add_option("--families", select_o.families, "Candidates A,B")->capture_default_str();

  auto* gof = app.add_subcommand("gof", "Goodness-of-fit test of one family");
  add_common(gof, gof_o.common);
  gof->add_option("--family", gof_o.family, "gamma or lognormal")->capture_default_str();
  gof->add_option("--M", gof_o.M, "Parametric bootstrap null replicates")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Run the mixture simulation study");
  add_common(sim, sim_o.common, false);
  sim->add_option("--table", sim_o.table, "Study table 1..5");
  sim->add_option("--pi", sim_o.pi, "Gamma weight of the mixture DGP");
  sim->add_option("--sizes", sim_o.sizes, "Sample sizes")->delimiter(',');
  sim->add_option("--reps", sim_o.reps, "Replications per sample size")->capture_default_str();
  sim->add_option("--threads", sim_o.threads, "Worker threads (0 = all cores)")
    ->capture_default_str();

  auto* plot = app.add_subcommand("plotdata", "Histogram and fitted densities as CSV");
  add_common(plot, plot_o.common);
  plot->add_option("--bins", plot_o.bins, "Histogram bins (>= 2)")->capture_default_str();

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
      argv.push_back(a.c_str());
    }
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out, err);
      return 0;
    } catch (const CLI::CallForAllHelp& e) {
      app.exit(e, out, err);
      return 0;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return kExitUsage;
    }

    if (fit->parsed()) {
      return cmd_fit(fit_o, in, out, err);
    }
    if (select->parsed()) {
      return cmd_select(select_o, in, out, err);
    }
    if (gof->parsed()) {
      return cmd_gof(gof_o, in, out, err);
    }
    if (sim->parsed()) {
      return cmd_simulate(sim_o, out, err);
    }
    return cmd_plotdata(plot_o, in, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputNotFoundError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoInput;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const SizeError& e) {
    err << "size error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const DegenerateFitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitSoftware;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSoftware;
  }
}

} // namespace bregsel::cli
