#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"

#include "bregsel/parametric.hpp"
#include "bregsel/random.hpp"

#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace bregsel;
namespace fs = std::filesystem;

namespace {

std::vector<double>
as_vector(const Sample& s)
{
  return { s.values().begin(), s.values().end() };
}

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome
invoke(std::vector<std::string> args, const std::string& stdin_text = "")
{
  args.insert(args.begin(), "bregsel");
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return { code, out.str(), err.str() };
}

std::string
fixture()
{
  return std::string(BREGSEL_DATA_DIR) + "/ball_bearings.txt";
}

//! Scratch directory removed at scope exit.
struct TempDir
{
  fs::path path;
  TempDir()
  {
    path = fs::temp_directory_path() / ("bregsel_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter()
  {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void
write_values(const std::string& path, const std::vector<double>& xs)
{
  std::ofstream f(path);
  f.precision(17);
  for (double x : xs) {
    f << x << '\n';
  }
}

std::string
slurp(const std::string& path)
{
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

//! Splits plotdata output into its '#'-headed sections of numeric rows.
std::map<std::string, std::vector<std::vector<double>>>
plot_sections(const std::string& text)
{
  std::map<std::string, std::vector<std::vector<double>>> sections;
  std::istringstream in(text);
  std::string line, current;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      current = line.substr(2);
      std::getline(in, line); // header
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    sections[current].push_back(row);
  }
  return sections;
}

} // namespace

TEST_SUITE("parse_dataset")
{
  TEST_CASE("mixed delimiters")
  {
    std::istringstream in("1.0, 2.0\n3.0");
    const Sample s = cli::parse_dataset(in, "inline");
    CHECK(as_vector(s) == std::vector<double>{ 1.0, 2.0, 3.0 });
  }

  TEST_CASE("comments and blank lines")
  {
    std::istringstream in("# header\n\n  # indented comment\n4.5\t6\n");
    CHECK(as_vector(cli::parse_dataset(in, "inline")) == std::vector<double>{ 4.5, 6.0 });
  }

  TEST_CASE("bad token reports its position")
  {
    std::istringstream in("1.0 abc");
    try {
      cli::parse_dataset(in, "inline");
      FAIL("expected a parse error");
    } catch (const cli::ParseError& e) {
      CHECK(e.token() == 2);
      CHECK(e.line() == 1);
      CHECK(e.column() == 5);
    }
    std::istringstream second("1\n2\n  3x\n");
    try {
      cli::parse_dataset(second, "inline");
      FAIL("expected a parse error");
    } catch (const cli::ParseError& e) {
      CHECK(e.token() == 3);
      CHECK(e.line() == 3);
      CHECK(e.column() == 3);
    }
  }

  TEST_CASE("too few values")
  {
    std::istringstream one("7.5\n");
    CHECK_THROWS_AS(cli::parse_dataset(one, "inline"), SizeError);
    std::istringstream none("# nothing\n");
    CHECK_THROWS_AS(cli::parse_dataset(none, "inline"), SizeError);
  }

  TEST_CASE("bundled fixture")
  {
    const Sample s = cli::read_dataset(fixture(), std::cin);
    CHECK(s.size() == 23);
    CHECK(s.min() == 17.88);
    CHECK(s.max() == 173.40);
    CHECK(as_vector(s) == oracle::ball_bearing_values());
  }

  TEST_CASE("missing file")
  {
    CHECK_THROWS_AS(cli::read_dataset("/nonexistent/data.txt", std::cin), cli::InputNotFoundError);
  }
}

TEST_SUITE("select")
{
  TEST_CASE("ball bearings are indecisive")
  {
    const auto r = invoke({ "select", "--input", fixture() });
    CHECK(r.code == 2);
    CHECK(r.out.find("decision: indecisive") != std::string::npos);
    CHECK(r.err.find("23 values") != std::string::npos);
  }

  TEST_CASE("json report carries the statistic")
  {
    const auto r = invoke({ "select", "--input", fixture(), "--format", "json", "--quiet" });
    REQUIRE(r.code == 2);
    CHECK(r.err.empty());
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["decision"] == "indecisive");
    CHECK(j["n"] == 23);
    CHECK(j["d_a"].get<double>() < j["d_b"].get<double>());
    CHECK(std::abs(j["model_a"]["alpha"].get<double>() - 4.028) < 1e-3);
    CHECK(j["kappa_hat"].get<double>() > 0.0);
  }

  TEST_CASE("large pure-gamma sample prefers the gamma candidate")
  {
    TempDir dir;
    Rng rng(20240501);
    write_values(dir.file("gamma.txt"), sample_gamma({ 4.028, 0.0558 }, 500, rng));
    const auto r = invoke({ "select", "--input", dir.file("gamma.txt"), "--seed", "42", "--format", "json" });
    const auto j = nlohmann::json::parse(r.out);
    MESSAGE("U = " << j["u"] << ", d_a = " << j["d_a"] << ", d_b = " << j["d_b"]);
    CHECK(r.code == 0);
  }

  TEST_CASE("reads standard input")
  {
    std::string text;
    for (double x : oracle::ball_bearing_values()) {
      text += std::to_string(x) + ",";
    }
    CHECK(invoke({ "select", "--quiet" }, text).code == 2);
  }

  TEST_CASE("error exits")
  {
    const auto missing = invoke({ "select", "--input", "/nonexistent/bearings.txt" });
    CHECK(missing.code == 66);
    CHECK(missing.err.find("/nonexistent/bearings.txt") != std::string::npos);
    CHECK(invoke({ "select", "--quiet" }, "1.0 abc").code == 65);
    CHECK(invoke({ "select", "--quiet" }, "3.0").code == 65);
    CHECK(invoke({ "select", "--quiet" }, "1 -2 3").code == 65);
    CHECK(invoke({ "select", "--input", fixture(), "--level", "1.5" }).code == 64);
    CHECK(invoke({ "select", "--input", fixture(), "--bootstrap", "10" }).code == 64);
    CHECK(invoke({ "select", "--input", fixture(), "--families", "gamma" }).code == 64);
    CHECK(invoke({ "select", "--input", fixture(), "--families", "gamma,weibull" }).code == 64);
    CHECK(invoke({ "select", "--input", fixture(), "--format", "xml" }).code == 64);
    CHECK(invoke({ "select", "--no-such-flag" }).code == 64);
    CHECK(invoke({}).code == 64);
    CHECK(invoke({ "--help" }).code == 0);
  }
}

TEST_SUITE("fit")
{
  TEST_CASE("multi-step and one-step")
  {
    auto r = invoke({ "fit", "--input", fixture(), "--format", "json", "--quiet" });
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["gamma"]["alpha"].get<double>() - 4.02804) < 1e-4);
    CHECK(std::abs(j["lognormal"]["mu"].get<double>() - 4.150614) < 1e-5);
    r = invoke({ "fit", "--input", fixture(), "--format", "csv", "--gamma-method", "one-step", "--quiet" });
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("n,bandwidth,alpha,eta,mu,sigma\n23,", 0) == 0);
  }
}

TEST_SUITE("gof")
{
  TEST_CASE("gamma is not rejected on the ball bearings")
  {
    const auto r = invoke({ "gof", "--input", fixture(), "--family", "gamma", "--format", "json", "--quiet" });
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["p_value"].get<double>() > 0.05);
    CHECK(j["null_replicates"].get<int>() >= 490);
    CHECK(std::abs(j["t_obs"].get<double>() - 2.0 * 23 * j["d_hat"].get<double>()) < 1e-15);
  }

  TEST_CASE("usage errors")
  {
    CHECK(invoke({ "gof", "--input", fixture(), "--M", "0" }).code == 64);
    CHECK(invoke({ "gof", "--input", fixture(), "--family", "pareto" }).code == 64);
  }
}

TEST_SUITE("simulate")
{
  TEST_CASE("single replication")
  {
    TempDir dir;
    const auto r = invoke({ "simulate", "--pi", "0.5", "--sizes", "20", "--reps", "1", "--format", "csv", "--out",
                            dir.file("t.csv"), "--quiet" });
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(dir.file("t.csv"));
    const auto rows = cli::parse_simulation_csv(f);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n == 20);
    for (const MeanSd* m : { &rows[0].alpha, &rows[0].eta, &rows[0].mu, &rows[0].sigma, &rows[0].d_gamma,
                             &rows[0].d_lognormal, &rows[0].u }) {
      CHECK(m->sd == 0.0);
    }
    const std::string text = slurp(dir.file("t.csv"));
    CHECK(text.rfind("n,alpha_mean,alpha_sd,eta_mean,eta_sd,mu_mean,mu_sd,sigma_mean,sigma_sd,d1_mean,d1_sd,"
                     "d2_mean,d2_sd,u_mean,u_sd,pcs_a,pcs_ind,pcs_b,skipped\n",
                     0) == 0);
    for (const auto& entry : fs::directory_iterator(dir.path)) {
      CHECK(entry.path().filename() == "t.csv");
    }
  }

  TEST_CASE("csv round trip is bit exact")
  {
    const auto r = invoke({ "simulate", "--pi", "0.25", "--sizes", "20,30", "--reps", "6", "--bootstrap", "50",
                            "--format", "csv", "--quiet" });
    REQUIRE(r.code == 0);
    std::istringstream first(r.out);
    const auto rows = cli::parse_simulation_csv(first);
    REQUIRE(rows.size() == 2);
    CHECK(cli::simulation_csv(rows) == r.out);
    std::istringstream again(cli::simulation_csv(rows));
    const auto back = cli::parse_simulation_csv(again);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(std::bit_cast<std::uint64_t>(rows[i].u.mean) == std::bit_cast<std::uint64_t>(back[i].u.mean));
      CHECK(std::bit_cast<std::uint64_t>(rows[i].d_gamma.sd) == std::bit_cast<std::uint64_t>(back[i].d_gamma.sd));
      CHECK(rows[i].pcs.first == back[i].pcs.first);
    }
  }

  TEST_CASE("progress goes to standard error")
  {
    const auto r = invoke({ "simulate", "--pi", "1", "--sizes", "15", "--reps", "2", "--bootstrap", "50" });
    REQUIRE(r.code == 0);
    CHECK(r.err.find("2/2 replications") != std::string::npos);
    CHECK(r.out.find("DGP") != std::string::npos);
  }

  TEST_CASE("usage errors")
  {
    CHECK(invoke({ "simulate", "--pi", "0.5", "--reps", "0" }).code == 64);
    CHECK(invoke({ "simulate", "--table", "6" }).code == 64);
    CHECK(invoke({ "simulate", "--table", "0" }).code == 64);
    CHECK(invoke({ "simulate", "--table", "1", "--pi", "0.5" }).code == 64);
    CHECK(invoke({ "simulate", "--pi", "1.5" }).code == 64);
    CHECK(invoke({ "simulate", "--pi", "0.5", "--sizes", "5" }).code == 64);
  }
}

TEST_SUITE("plotdata")
{
  TEST_CASE("histogram integrates to one and curves follow the fits")
  {
    const auto r = invoke({ "plotdata", "--input", fixture(), "--bins", "8", "--quiet" });
    REQUIRE(r.code == 0);
    const auto sections = plot_sections(r.out);
    REQUIRE(sections.count("histogram"));
    const auto& hist = sections.at("histogram");
    REQUIRE(hist.size() == 8);
    double area = 0.0;
    for (const auto& row : hist) {
      area += (row[1] - row[0]) * row[2];
    }
    CHECK(std::abs(area - 1.0) <= 1e-9);
    CHECK(hist.front()[0] == 17.88);
    CHECK(hist.back()[1] == 173.40);

    const auto& g = sections.at("gamma_curve");
    const auto& l = sections.at("lognormal_curve");
    REQUIRE(g.size() == 512);
    REQUIRE(l.size() == 512);
    for (std::size_t k = 0; k < 512; k += 37) {
      const double x = g[k][0];
      CHECK(g[k][1] == doctest::Approx(std::exp(oracle::gamma_logpdf(4.02804, 0.055767, x))).epsilon(1e-4));
      CHECK(l[k][1] == doctest::Approx(oracle::lognormal_pdf(4.150614, 0.521485, x)).epsilon(1e-4));
    }
  }

  TEST_CASE("errors")
  {
    CHECK(invoke({ "plotdata", "--input", fixture(), "--bins", "1" }).code == 64);
    CHECK(invoke({ "plotdata", "--quiet" }, "").code == 65);
  }
}

TEST_SUITE("reproducibility")
{
  TEST_CASE("same seed gives byte-identical files")
  {
    TempDir dir;
    for (const std::string cmd : { "select", "gof" }) {
      std::vector<std::string> base{ cmd, "--input", fixture(), "--seed", "7", "--quiet", "--format", "json" };
      if (cmd == "gof") {
        base.insert(base.end(), { "--M", "60" });
      }
      auto a = base;
      a.insert(a.end(), { "--out", dir.file(cmd + "_a.json") });
      auto b = base;
      b.insert(b.end(), { "--out", dir.file(cmd + "_b.json") });
      invoke(a);
      invoke(b);
      CHECK(slurp(dir.file(cmd + "_a.json")) == slurp(dir.file(cmd + "_b.json")));
      CHECK_FALSE(slurp(dir.file(cmd + "_a.json")).empty());
    }
    const std::vector<std::string> sim{ "simulate", "--pi", "0.75", "--sizes", "20", "--reps", "4",
                                        "--bootstrap", "50", "--format", "csv", "--quiet" };
    CHECK(invoke(sim).out == invoke(sim).out);
  }
}

TEST_SUITE("config file")
{
  TEST_CASE("flag over file over default")
  {
    TempDir dir;
    {
      std::ofstream f(dir.file("run.conf"));
      f << "# shared settings\nlevel = 0.2\nseed = 11\nquiet = true\n";
    }
    auto level_of = [](const Outcome& r) { return nlohmann::json::parse(r.out)["level"].get<double>(); };
    const auto defaults = invoke({ "select", "--input", fixture(), "--format", "json", "--quiet" });
    const auto from_file =
      invoke({ "select", "--config", dir.file("run.conf"), "--input", fixture(), "--format", "json" });
    const auto flag = invoke(
      { "select", "--config", dir.file("run.conf"), "--input", fixture(), "--format", "json", "--level", "0.1" });
    CHECK(level_of(defaults) == 0.05);
    CHECK(level_of(from_file) == 0.2);
    CHECK(nlohmann::json::parse(from_file.out)["seed"] == 11);
    CHECK(from_file.err.empty());
    CHECK(level_of(flag) == 0.1);
  }

  TEST_CASE("bad config")
  {
    TempDir dir;
    {
      std::ofstream f(dir.file("bad.conf"));
      f << "level 0.2\n";
    }
    CHECK(invoke({ "select", "--config", dir.file("bad.conf"), "--input", fixture() }).code == 64);
    CHECK(invoke({ "select", "--config", dir.file("absent.conf"), "--input", fixture() }).code == 66);
  }
}

TEST_SUITE("calibration: gof power")
{
  TEST_CASE("log-normal data of size 500 rejects the gamma family")
  {
    TempDir dir;
    constexpr int runs = 100;
    int rejected = 0;
    for (int k = 0; k < runs; ++k) {
      Rng rng(1000 + k);
      write_values(dir.file("ln.txt"), sample_lognormal({ 4.150614, 0.521485 }, 500, rng));
      const auto r = invoke({ "gof", "--input", dir.file("ln.txt"), "--family", "gamma", "--M", "99", "--seed",
                              std::to_string(k), "--quiet" });
      REQUIRE(r.code <= 1);
      rejected += r.code;
    }
    MESSAGE("rejection rate " << static_cast<double>(rejected) / runs);
    CHECK(rejected >= 80);
  }
}
