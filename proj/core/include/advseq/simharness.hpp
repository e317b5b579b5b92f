#pragma once

// Monte Carlo harness: samples under a true hypothesis, pushes them through
// the adversary's channel, runs the sequential test and aggregates stopping
// times over an alpha grid.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "advseq/equilibrium.hpp"
#include "advseq/prob.hpp"
#include "advseq/seqtest.hpp"

namespace advseq {

using Rng = std::mt19937_64;

/// 53-bit uniform on [0, 1) built from the raw engine output, so draws do not
/// depend on the standard library's distribution implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

/// Inverse-CDF draw from `p`.
std::size_t sample_index(std::span<const double> p, Rng& rng);

/// Draws X ~ P, then Y from row X of A. Returns Y.
std::size_t sample_through_channel(const Distribution& p, const Channel& a, Rng& rng);

/// Engine for one replication, keyed by (seed, alpha index, hypothesis, replication).
Rng substream(std::uint64_t seed, std::uint64_t alpha_index, std::uint64_t hypothesis,
              std::uint64_t replication);

enum class AdversaryMode {
  /// Rank-one channels onto the aware equilibrium outputs.
  Equilibrium,
  /// One configured channel per hypothesis, aware test.
  Explicit,
  /// One channel shared by both hypotheses, non-aware test (M = 2 only).
  Common,
};

struct ScenarioConfig {
  explicit ScenarioConfig(GameSpec game) : spec(std::move(game)) {}

  GameSpec spec;
  /// Hypotheses to simulate. Empty means all of them.
  std::vector<std::size_t> true_hypotheses;
  AdversaryMode adversary = AdversaryMode::Equilibrium;
  /// M channels for Explicit, exactly one for Common.
  std::vector<Channel> channels;
  std::vector<double> alpha_grid;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultCap;
  std::uint64_t stride = 1;
  double zeta = kDefaultZeta;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  SolverOptions solver;
};

struct ReplicationResult {
  std::uint64_t stopping_time = 0;
  std::optional<std::size_t> decision;
  bool timed_out() const { return !decision.has_value(); }
};

/// A validated scenario with its adversary channels resolved.
class Scenario {
 public:
  /// DomainError for an empty or out-of-range alpha grid, zero replications,
  /// zero cap or stride, or a bad hypothesis index; ShapeError for a wrong
  /// channel count; InfeasibleError for a channel that breaks the budget.
  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return cfg_; }
  const EquilibriumSolution& equilibrium() const { return eq_; }
  /// Channel in effect under each hypothesis.
  const std::vector<Channel>& channels() const { return channels_; }
  const std::vector<std::size_t>& hypotheses() const { return hyps_; }

  /// Deterministic in (seed, alpha_index, hypothesis, replication) only.
  ReplicationResult run_replication(std::size_t alpha_index, std::size_t hypothesis,
                                    std::uint64_t replication) const;

 private:
  ScenarioConfig cfg_;
  EquilibriumSolution eq_;
  std::vector<Channel> channels_;
  std::vector<std::size_t> hyps_;
  std::vector<ThresholdSchedule> schedules_;
  std::optional<CommonChannelSet> common_;
};

struct ReportRow {
  double alpha = 0.0;
  double log_inv_alpha = 0.0;
  std::size_t hypothesis = 0;
  /// Over decided runs only.
  double mean_t = 0.0;
  double std_t = 0.0;
  double stderr_t = 0.0;
  /// log(1/alpha) / mean_T.
  double payoff_estimate = 0.0;
  double theoretical_exponent = 0.0;
  /// Fraction of decided runs that chose a hypothesis other than the true one.
  double error_rate = 0.0;
  std::uint64_t timeouts = 0;
  std::uint64_t replications = 0;
};

struct SimulationReport {
  /// Ordered by alpha index, then hypothesis.
  std::vector<ReportRow> rows;
};

SimulationReport monte_carlo(const Scenario& scenario);

/// monte_carlo over the whole grid; one row per (alpha, hypothesis).
std::vector<ReportRow> alpha_sweep(const Scenario& scenario);

/// Header: alpha,log_inv_alpha,hypothesis,mean_T,std_T,stderr_T,payoff_estimate,
/// theoretical_exponent,error_rate,timeouts,replications
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace advseq
