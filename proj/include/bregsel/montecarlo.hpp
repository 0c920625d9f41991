#pragma once

#include "bregsel/parametric.hpp"
#include "bregsel/selection.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bregsel {

//! Gamma truth of the simulation study.
inline constexpr GammaParams kTableGamma{ 4.02804, 0.05576722 };
//! Log-normal truth of the simulation study.
inline constexpr LogNormalParams kTableLogNormal{ 4.150614, 0.5214847 };

struct ExperimentConfig
{
  double pi = 0.0;
  GammaParams gamma_truth = kTableGamma;
  LogNormalParams lognormal_truth = kTableLogNormal;
  std::vector<std::size_t> sample_sizes{ 20, 40, 60, 80, 90 };
  std::size_t replications = 1000;
  std::uint64_t master_seed = 42;
  double level = 0.05;
  std::size_t bootstrap_B = 100;
  //! Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;
  SelectionSettings settings{};

  void validate() const;
};

//! The five study configurations (table ids 1..5).
ExperimentConfig table_config(int table_id);

struct ReplicationRecord
{
  std::size_t n = 0;
  std::size_t rep_index = 0;
  bool skipped = false;
  std::string skip_reason;
  GammaParams gamma_fit{};
  LogNormalParams lognormal_fit{};
  double d_gamma = 0.0;
  double d_lognormal = 0.0;
  double u = 0.0;
  Decision decision = Decision::indecisive;
};

struct MeanSd
{
  double mean = 0.0;
  double sd = 0.0;
};

//! Selection percentages. For pi = 1 (Gamma true) and pi = 0 (log-normal
//! true) the fields read correct / indecisive / incorrect; otherwise
//! prefer-Gamma / indecisive / prefer-log-normal.
struct PcsTriple
{
  double first = 0.0;
  double indecisive = 0.0;
  double last = 0.0;
};

struct TableRow
{
  std::size_t n = 0;
  MeanSd alpha, eta, mu, sigma, d_gamma, d_lognormal, u;
  PcsTriple pcs;
  std::size_t used = 0;
  std::size_t skipped = 0;
  //! Set when more than 5% of the cell's replications were skipped.
  std::optional<std::string> warning;
};

//! Stream seed of one replication, keyed by (master seed, pi, n, index).
std::uint64_t replication_seed(const ExperimentConfig& config, std::size_t n, std::size_t rep_index);

//! One mixture sample, both fits, both divergences, U and the decision.
//! Failures are recorded as a skipped record, never thrown.
ReplicationRecord run_replication(const ExperimentConfig& config, std::size_t n, std::size_t rep_index);

PcsTriple label_decisions(double pi, std::span<const Decision> decisions);

//! Aggregates replications of one sample size (skipped ones excluded).
TableRow aggregate_row(double pi, std::size_t n, std::span<const ReplicationRecord> records);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

//! All replications for every sample size, one row per size. Results do
//! not depend on the thread count.
std::vector<TableRow> run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

//! Same, but also returns the raw records (ordered by size, then index).
std::vector<TableRow> run_experiment(const ExperimentConfig& config,
                                     std::vector<ReplicationRecord>& records,
                                     const ProgressFn& progress = {});

} // namespace bregsel
