#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "advseq/equilibrium.hpp"
#include "advseq/simharness.hpp"

namespace advseq::app {

// Flat `key = value` configuration. Lists are comma separated, `#` starts a
// comment. Keys:
//   hypothesis_<i>          distribution of hypothesis i (i = 0..M-1)
//   normalize               rescale hypotheses that do not sum to one
//   delta, measure          distortion budget and tv_l1 | kl
//   lambda                  payoff weights (default all ones)
//   support_floor, separation, solver_tolerance, solver_max_iterations
//   alpha | alpha_grid | log_inv_alpha_grid   (at most one)
//   replications, seed, cap, stride, zeta, threads, true_hypotheses
//   adversary               equilibrium | explicit | common
//   adversary_channel_<i>   K*K row-major entries
struct RunConfig {
  std::vector<std::vector<double>> hypotheses;
  bool normalize = false;
  std::optional<double> delta;
  Measure measure = Measure::TvL1;
  std::vector<double> lambda;
  double support_floor = kDefaultSupportFloor;
  double separation = kDefaultSeparation;
  double solver_tolerance = SolverOptions{}.tolerance;
  std::uint64_t solver_max_iterations = static_cast<std::uint64_t>(SolverOptions{}.max_iterations);

  std::vector<double> alpha_grid;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultCap;
  std::uint64_t stride = 1;
  double zeta = kDefaultZeta;
  std::uint64_t threads = 0;
  std::vector<std::size_t> true_hypotheses;
  AdversaryMode adversary = AdversaryMode::Equilibrium;
  std::vector<std::vector<double>> adversary_channels;

  bool operator==(const RunConfig&) const = default;
};

/// ConfigError on syntax errors, unknown or repeated keys, missing
/// hypotheses or delta, and malformed values.
RunConfig parse_run_config(std::istream& in);
/// IoError when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical form; parse_run_config(dump_run_config(c)) == c.
std::string dump_run_config(const RunConfig& config);

SolverOptions make_solver_options(const RunConfig& config);
/// Downstream validation failures other than infeasibility surface as ConfigError.
GameSpec make_game(const RunConfig& config);
/// Also requires a nonempty alpha grid.
ScenarioConfig make_scenario(const RunConfig& config);

}  // namespace advseq::app
