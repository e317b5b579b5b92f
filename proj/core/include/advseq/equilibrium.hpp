#pragma once

// Adversary-side computations: the aware equilibrium perturbations and the
// resulting payoff, the Bhattacharyya separation B*, and the achievable and
// converse bounds of the non-aware (common-channel) game.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "advseq/divopt.hpp"
#include "advseq/prob.hpp"

namespace advseq {

inline constexpr double kDefaultSeparation = 1e-8;

/// M hypotheses on a common alphabet, the distortion budget, the payoff
/// weights, and the distortion balls they induce.
class GameSpec {
 public:
  /// Validates the game: M >= 2, equal alphabet sizes, pairwise distinct
  /// hypotheses, positive weights (DomainError / ShapeError), centers above
  /// the floor (InfeasibleError), and every pair of balls separated by at
  /// least `separation` in KL (DegenerateGameError).
  static GameSpec create(std::vector<Distribution> hypotheses, double delta, Measure measure,
                         std::vector<double> lambda, double floor = kDefaultSupportFloor,
                         double separation = kDefaultSeparation, const SolverOptions& opts = {});

  std::size_t num_hypotheses() const { return hypotheses_.size(); }
  std::size_t alphabet_size() const { return hypotheses_.front().size(); }
  const std::vector<Distribution>& hypotheses() const { return hypotheses_; }
  const Distribution& hypothesis(std::size_t i) const { return hypotheses_.at(i); }
  double delta() const { return delta_; }
  Measure measure() const { return measure_; }
  const std::vector<double>& lambda() const { return lambda_; }
  double floor() const { return floor_; }
  double separation() const { return separation_; }
  const DistortionBall& ball(std::size_t i) const { return balls_.at(i); }
  const std::vector<DistortionBall>& balls() const { return balls_; }

 private:
  GameSpec() = default;

  std::vector<Distribution> hypotheses_;
  double delta_ = 0.0;
  Measure measure_ = Measure::TvL1;
  std::vector<double> lambda_;
  double floor_ = kDefaultSupportFloor;
  double separation_ = kDefaultSeparation;
  std::vector<DistortionBall> balls_;
};

struct EquilibriumSolution {
  /// Worst-case output distribution P_i A_i* for each hypothesis.
  std::vector<Distribution> q_star;
  /// (i, j) = min over q_j in B_j of D(q_star(i) || q_j); zero on the diagonal.
  std::vector<std::vector<double>> divergence_matrix;
  /// E_i = min over j != i of divergence_matrix(i, j).
  std::vector<double> exponents;
  /// Index j attaining E_i.
  std::vector<std::size_t> closest_rival;
  double payoff = 0.0;
  /// Rank-one witnesses with P_i * witness(i) = q_star(i).
  std::vector<Channel> witnesses;
  bool converged = true;
};

/// Solves every ordered pairwise problem, keeps for each i the rival with the
/// smallest joint minimum, then re-evaluates the inner minimum at the fixed
/// q_star(i) to fill the divergence matrix and the exponents.
EquilibriumSolution solve_aware_equilibrium(const GameSpec& spec, const SolverOptions& opts = {});

/// sum_i lambda_i E_i. DomainError for a nonpositive weight or a length
/// mismatch.
double equilibrium_payoff(const EquilibriumSolution& solution, const std::vector<double>& lambda);

/// B* = min over i != j of the joint minimum of B(q_i, q_j) over B_i x B_j.
double compute_b_star(const GameSpec& spec, const SolverOptions& opts = {});

struct NonAwareBounds {
  double achievable = 0.0;
  double converse = 0.0;
};

/// Limit payoff of the non-aware test against a fixed common channel:
///   min_A max{D(P0 A~ || P1 A), D(P0 A~ || P0 A)}
///   + lambda * min_A max{D(P1 A~ || P0 A), D(P1 A~ || P1 A)}.
/// InfeasibleError when `a_tilde` is outside the common set.
double nonaware_achievable(const CommonChannelSet& set, const Channel& a_tilde, double lambda,
                           const SolverOptions& opts = {});

/// Upper bound D(P0 A~ || P1 A~) + lambda * D(P1 A~ || P0 A~) for any test.
double nonaware_converse(const Distribution& p0, const Distribution& p1, const Channel& a_tilde,
                         double lambda);

NonAwareBounds nonaware_bounds(const CommonChannelSet& set, const Channel& a_tilde, double lambda,
                               const SolverOptions& opts = {});

struct NonAwareAdversary {
  Channel a_star;
  double achievable = 0.0;
  /// The outer problem carries no convexity guarantee; the result is the best
  /// of a multistart local search.
  bool heuristic = true;
  int evaluations = 0;
};

struct MultistartOptions {
  int starts = 32;
  double initial_step = 0.05;
  double final_step = 1e-6;
  std::uint64_t seed = 0x5eedULL;
};

/// Searches the common set for the channel minimizing nonaware_achievable.
NonAwareAdversary solve_nonaware_adversary(const CommonChannelSet& set, double lambda,
                                           const SolverOptions& opts = {},
                                           const MultistartOptions& search = {});

}  // namespace advseq
