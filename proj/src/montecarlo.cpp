#include "bregsel/montecarlo.hpp"

#include "bregsel/error.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <thread>

namespace bregsel {

void
ExperimentConfig::validate() const
{
  if (!(pi >= 0.0 && pi <= 1.0)) {
    throw DomainError("mixture weight pi must lie in [0, 1]");
  }
  gamma_truth.validate();
  lognormal_truth.validate();
  if (sample_sizes.empty()) {
    throw DomainError("at least one sample size is required");
  }
  for (auto n : sample_sizes) {
    if (n < 10) {
      throw DomainError("sample sizes must be at least 10");
    }
  }
  if (replications == 0) {
    throw DomainError("replications must be at least 1");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("level must lie in (0, 1)");
  }
  if (bootstrap_B < 50) {
    throw DomainError("bootstrap_B must be at least 50");
  }
  settings.validate();
}

ExperimentConfig
table_config(int table_id)
{
  ExperimentConfig config;
  switch (table_id) {
    case 1:
      config.pi = 0.0;
      break;
    case 2:
      config.pi = 1.0;
      break;
    case 3:
      config.pi = 0.25;
      break;
    case 4:
      config.pi = 0.5;
      break;
    case 5:
      config.pi = 0.75;
      config.sample_sizes = { 20, 40, 60, 80, 200 };
      break;
    default:
      throw DomainError("table id must be 1..5, got " + std::to_string(table_id));
  }
  return config;
}

std::uint64_t
replication_seed(const ExperimentConfig& config, std::size_t n, std::size_t rep_index)
{
  return derive_seed(config.master_seed,
                     { std::bit_cast<std::uint64_t>(config.pi), n, rep_index });
}

ReplicationRecord
run_replication(const ExperimentConfig& config, std::size_t n, std::size_t rep_index)
{
  ReplicationRecord rec;
  rec.n = n;
  rec.rep_index = rep_index;
  if (rep_index >= config.replications) {
    throw DomainError("replication index out of range");
  }
  Rng rng(replication_seed(config, n, rep_index));
  const MixtureDGP dgp{ config.pi, config.gamma_truth, config.lognormal_truth };
  try {
    const Sample sample(sample_mixture(dgp, n, rng), "replication");
    PairSpec spec;
    spec.settings = config.settings;
    const CandidatePair pair = fit_pair(sample, spec);
    rec.gamma_fit = pair.model_a.gamma();
    rec.lognormal_fit = pair.model_b.lognormal();
    const SelectionResult r = u_statistic(sample, pair, config.bootstrap_B, rng, config.level);
    rec.d_gamma = r.d_a;
    rec.d_lognormal = r.d_b;
    rec.u = r.u;
    rec.decision = r.decision;
  } catch (const Error& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
  }
  return rec;
}

PcsTriple
label_decisions(double pi, std::span<const Decision> decisions)
{
  if (!(pi >= 0.0 && pi <= 1.0)) {
    throw DomainError("pi must lie in [0, 1]");
  }
  std::size_t a = 0;
  std::size_t ind = 0;
  std::size_t b = 0;
  for (Decision d : decisions) {
    switch (d) {
      case Decision::prefer_a:
        ++a;
        break;
      case Decision::prefer_b:
        ++b;
        break;
      case Decision::indecisive:
        ++ind;
        break;
    }
  }
  if (decisions.empty()) {
    return {};
  }
  const double total = static_cast<double>(decisions.size());
  const double pa = 100.0 * static_cast<double>(a) / total;
  const double pind = 100.0 * static_cast<double>(ind) / total;
  const double pb = 100.0 * static_cast<double>(b) / total;
  // log-normal true: the correct choice is candidate B
  if (pi == 0.0) {
    return { pb, pind, pa };
  }
  return { pa, pind, pb };
}

namespace {

struct Accumulator
{
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x)
  {
    sum += x;
    sum_sq += x * x;
  }

  MeanSd finish(std::size_t count) const
  {
    if (count == 0) {
      return {};
    }
    const double n = static_cast<double>(count);
    const double mean = sum / n;
    if (count == 1) {
      return { mean, 0.0 };
    }
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return { mean, std::sqrt(var) };
  }
};

} // namespace

TableRow
aggregate_row(double pi, std::size_t n, std::span<const ReplicationRecord> records)
{
  TableRow row;
  row.n = n;
  Accumulator alpha, eta, mu, sigma, d1, d2, u;
  std::vector<Decision> decisions;
  for (const auto& r : records) {
    if (r.skipped) {
      ++row.skipped;
      continue;
    }
    alpha.add(r.gamma_fit.alpha);
    eta.add(r.gamma_fit.eta);
    mu.add(r.lognormal_fit.mu);
    sigma.add(r.lognormal_fit.sigma);
    d1.add(r.d_gamma);
    d2.add(r.d_lognormal);
    u.add(r.u);
    decisions.push_back(r.decision);
  }
  row.used = decisions.size();
  row.alpha = alpha.finish(row.used);
  row.eta = eta.finish(row.used);
  row.mu = mu.finish(row.used);
  row.sigma = sigma.finish(row.used);
  row.d_gamma = d1.finish(row.used);
  row.d_lognormal = d2.finish(row.used);
  row.u = u.finish(row.used);
  row.pcs = label_decisions(pi, decisions);
  const std::size_t total = row.used + row.skipped;
  if (total > 0 && 20 * row.skipped > total) {
    row.warning = std::to_string(row.skipped) + " of " + std::to_string(total) +
                  " replications skipped at n = " + std::to_string(n);
  }
  return row;
}

std::vector<TableRow>
run_experiment(const ExperimentConfig& config,
               std::vector<ReplicationRecord>& records,
               const ProgressFn& progress)
{
  config.validate();
  const std::size_t per_size = config.replications;
  const std::size_t total = per_size * config.sample_sizes.size();
  records.assign(total, ReplicationRecord{});

  unsigned threads = config.threads;
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));

  std::atomic<std::size_t> next{ 0 };
  std::atomic<std::size_t> done{ 0 };
  std::mutex progress_mutex;
  auto worker = [&]() {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t n = config.sample_sizes[k / per_size];
      records[k] = run_replication(config, n, k % per_size);
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }

  // aggregation runs in index order, so rows are schedule-independent
  std::vector<TableRow> rows;
  rows.reserve(config.sample_sizes.size());
  for (std::size_t s = 0; s < config.sample_sizes.size(); ++s) {
    const std::span<const ReplicationRecord> cell(records.data() + s * per_size, per_size);
    rows.push_back(aggregate_row(config.pi, config.sample_sizes[s], cell));
  }
  return rows;
}

std::vector<TableRow>
run_experiment(const ExperimentConfig& config, const ProgressFn& progress)
{
  std::vector<ReplicationRecord> records;
  return run_experiment(config, records, progress);
}

} // namespace bregsel
