#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bregsel/error.hpp"
#include "bregsel/montecarlo.hpp"

#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <cstring>

using namespace bregsel;

namespace {

bool
same_bits(double a, double b)
{
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool
same_record(const ReplicationRecord& a, const ReplicationRecord& b)
{
  return a.n == b.n && a.rep_index == b.rep_index && a.skipped == b.skipped && a.skip_reason == b.skip_reason &&
         same_bits(a.gamma_fit.alpha, b.gamma_fit.alpha) && same_bits(a.gamma_fit.eta, b.gamma_fit.eta) &&
         same_bits(a.lognormal_fit.mu, b.lognormal_fit.mu) &&
         same_bits(a.lognormal_fit.sigma, b.lognormal_fit.sigma) && same_bits(a.d_gamma, b.d_gamma) &&
         same_bits(a.d_lognormal, b.d_lognormal) && same_bits(a.u, b.u) && a.decision == b.decision;
}

bool
same_row(const TableRow& a, const TableRow& b)
{
  const MeanSd* x[] = { &a.alpha, &a.eta, &a.mu, &a.sigma, &a.d_gamma, &a.d_lognormal, &a.u };
  const MeanSd* y[] = { &b.alpha, &b.eta, &b.mu, &b.sigma, &b.d_gamma, &b.d_lognormal, &b.u };
  for (int i = 0; i < 7; ++i) {
    if (!same_bits(x[i]->mean, y[i]->mean) || !same_bits(x[i]->sd, y[i]->sd)) {
      return false;
    }
  }
  return a.n == b.n && same_bits(a.pcs.first, b.pcs.first) && same_bits(a.pcs.indecisive, b.pcs.indecisive) &&
         same_bits(a.pcs.last, b.pcs.last) && a.used == b.used && a.skipped == b.skipped;
}

ExperimentConfig
small_config(double pi)
{
  ExperimentConfig c;
  c.pi = pi;
  c.sample_sizes = { 20, 40 };
  c.replications = 12;
  c.bootstrap_B = 50;
  return c;
}

ReplicationRecord
record(Decision d, double u = 0.0, bool skipped = false)
{
  ReplicationRecord r;
  r.decision = d;
  r.u = u;
  r.skipped = skipped;
  r.gamma_fit = { 4.0, 0.05 };
  r.lognormal_fit = { 4.1, 0.5 };
  return r;
}

} // namespace

TEST_SUITE("configuration")
{
  TEST_CASE("table presets")
  {
    CHECK(table_config(1).pi == 0.0);
    CHECK(table_config(2).pi == 1.0);
    CHECK(table_config(3).pi == 0.25);
    CHECK(table_config(4).pi == 0.5);
    CHECK(table_config(5).pi == 0.75);
    CHECK(table_config(1).sample_sizes == std::vector<std::size_t>{ 20, 40, 60, 80, 90 });
    CHECK(table_config(5).sample_sizes.back() == 200);
    CHECK(table_config(1).replications == 1000);
    CHECK(table_config(1).bootstrap_B == 100);
    CHECK_THROWS_AS(table_config(0), DomainError);
    CHECK_THROWS_AS(table_config(6), DomainError);
  }

  TEST_CASE("validation")
  {
    ExperimentConfig c;
    c.replications = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig{};
    c.sample_sizes = { 9 };
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.sample_sizes = {};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig{};
    c.pi = 1.2;
    CHECK_THROWS_AS(c.validate(), DomainError);
  }
}

TEST_SUITE("run_replication")
{
  TEST_CASE("bit-identical on repeat")
  {
    const auto c = small_config(0.5);
    for (std::size_t rep : { 0u, 5u, 11u }) {
      CHECK(same_record(run_replication(c, 40, rep), run_replication(c, 40, rep)));
    }
    CHECK(replication_seed(c, 40, 1) != replication_seed(c, 40, 2));
    CHECK(replication_seed(c, 40, 1) != replication_seed(c, 20, 1));
    auto other = c;
    other.pi = 0.25;
    CHECK(replication_seed(c, 40, 1) != replication_seed(other, 40, 1));
    CHECK_THROWS_AS(run_replication(c, 40, 12), DomainError);
  }

  TEST_CASE("gamma truth at n = 90: rate estimates in range")
  {
    ExperimentConfig c;
    c.pi = 1.0;
    c.sample_sizes = { 90 };
    c.replications = 200;
    c.bootstrap_B = 50;
    int inside = 0, used = 0;
    for (std::size_t rep = 0; rep < c.replications; ++rep) {
      const auto r = run_replication(c, 90, rep);
      if (r.skipped) {
        continue;
      }
      ++used;
      CHECK(std::isfinite(r.gamma_fit.alpha));
      inside += (r.gamma_fit.eta > 0.03 && r.gamma_fit.eta < 0.09) ? 1 : 0;
    }
    CHECK(used >= 198);
    CHECK(inside >= 0.99 * used);
  }
}

TEST_SUITE("label_decisions")
{
  TEST_CASE("gamma truth")
  {
    std::vector<Decision> d(7, Decision::prefer_a);
    d.insert(d.end(), 3, Decision::indecisive);
    const auto p = label_decisions(1.0, d);
    CHECK(p.first == doctest::Approx(70.0));
    CHECK(p.indecisive == doctest::Approx(30.0));
    CHECK(p.last == 0.0);
  }

  TEST_CASE("log-normal truth")
  {
    const std::vector<Decision> d(5, Decision::prefer_a);
    const auto p = label_decisions(0.0, d);
    CHECK(p.first == 0.0);
    CHECK(p.indecisive == 0.0);
    CHECK(p.last == doctest::Approx(100.0));
  }

  TEST_CASE("interior weights keep family order")
  {
    const std::vector<Decision> d{ Decision::prefer_a, Decision::prefer_b, Decision::prefer_b, Decision::indecisive };
    const auto p = label_decisions(0.5, d);
    CHECK(p.first == doctest::Approx(25.0));
    CHECK(p.indecisive == doctest::Approx(25.0));
    CHECK(p.last == doctest::Approx(50.0));
    CHECK_THROWS_AS(label_decisions(-0.1, d), DomainError);
  }
}

TEST_SUITE("run_experiment")
{
  TEST_CASE("one replication gives zero spread and the record's values")
  {
    auto c = small_config(0.5);
    c.sample_sizes = { 20 };
    c.replications = 1;
    std::vector<ReplicationRecord> records;
    const auto rows = run_experiment(c, records);
    REQUIRE(rows.size() == 1);
    REQUIRE(records.size() == 1);
    const auto& r = rows[0];
    const auto& rec = records[0];
    REQUIRE_FALSE(rec.skipped);
    CHECK(r.alpha.mean == rec.gamma_fit.alpha);
    CHECK(r.sigma.mean == rec.lognormal_fit.sigma);
    CHECK(r.u.mean == rec.u);
    for (const MeanSd* m : { &r.alpha, &r.eta, &r.mu, &r.sigma, &r.d_gamma, &r.d_lognormal, &r.u }) {
      CHECK(m->sd == 0.0);
    }
    CHECK(r.pcs.first + r.pcs.indecisive + r.pcs.last == doctest::Approx(100.0));
  }

  TEST_CASE("rows are well formed")
  {
    const auto rows = run_experiment(small_config(0.25));
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(std::abs(r.pcs.first + r.pcs.indecisive + r.pcs.last - 100.0) <= 0.1);
      for (const MeanSd* m : { &r.alpha, &r.eta, &r.mu, &r.sigma, &r.d_gamma, &r.d_lognormal, &r.u }) {
        CHECK(m->sd >= 0.0);
      }
      CHECK(r.used + r.skipped == 12);
    }
  }

  TEST_CASE("identical across thread counts")
  {
    auto c = small_config(0.5);
    c.threads = 1;
    std::vector<ReplicationRecord> r1, r3;
    const auto a = run_experiment(c, r1);
    c.threads = 3;
    const auto b = run_experiment(c, r3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(same_row(a[i], b[i]));
    }
    REQUIRE(r1.size() == r3.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
      CHECK(same_record(r1[i], r3[i]));
    }
  }

  TEST_CASE("progress callback counts every replication")
  {
    auto c = small_config(1.0);
    std::size_t last = 0, total = 0;
    run_experiment(c, [&](std::size_t done, std::size_t all) {
      last = std::max(last, done);
      total = all;
    });
    CHECK(total == 24);
    CHECK(last == 24);
  }
}

TEST_SUITE("aggregate_row")
{
  TEST_CASE("skipped replications are excluded and flagged above five percent")
  {
    std::vector<ReplicationRecord> recs;
    for (int i = 0; i < 18; ++i) {
      recs.push_back(record(Decision::prefer_b, 1.0 + i));
    }
    recs.push_back(record(Decision::prefer_a, 0.0, true));
    recs.push_back(record(Decision::prefer_a, 0.0, true));
    const auto row = aggregate_row(0.0, 40, recs);
    CHECK(row.used == 18);
    CHECK(row.skipped == 2);
    CHECK(row.warning.has_value());
    CHECK(row.pcs.first == doctest::Approx(100.0));
    CHECK(row.u.mean == doctest::Approx(9.5));
    CHECK(row.u.sd == doctest::Approx(oracle::sd({ 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18 })));

    recs.pop_back();
    recs.insert(recs.end(), 2, record(Decision::indecisive));
    const auto ok = aggregate_row(0.0, 40, recs);
    CHECK(ok.skipped == 1);
    CHECK_FALSE(ok.warning.has_value());
  }
}

TEST_SUITE("calibration: study trends")
{
  TEST_CASE("pure designs: sign of U, correct-selection growth, few incorrect choices")
  {
    for (double pi : { 0.0, 1.0 }) {
      ExperimentConfig c = table_config(pi == 0.0 ? 1 : 2);
      const auto rows = run_experiment(c);
      for (const auto& r : rows) {
        MESSAGE("pi = " << pi << ", n = " << r.n << ": U mean " << r.u.mean << ", pcs " << r.pcs.first << " / "
                        << r.pcs.indecisive << " / " << r.pcs.last);
        CHECK(r.pcs.last <= 2.0);
        if (pi == 0.0) {
          CHECK(r.u.mean > 0.0);
        } else {
          CHECK(r.u.mean < 0.0);
        }
      }
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (pi == 0.0) {
          CHECK(rows[i].u.mean > rows[i - 1].u.mean);
        } else {
          CHECK(rows[i].u.mean < rows[i - 1].u.mean);
        }
      }
      CHECK(rows.back().pcs.first - rows.front().pcs.first >= 20.0);
    }
  }
}
