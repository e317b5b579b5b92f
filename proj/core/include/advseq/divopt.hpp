#pragma once

// Constrained KL minimization over distortion balls and over the common
// (hypothesis-independent) channel set.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "advseq/prob.hpp"

namespace advseq {

struct SolverOptions {
  /// Relative objective decrease below which an iteration counts as stalled.
  double tolerance = 1e-10;
  int max_iterations = 10000;
  /// Consecutive stalled iterations that end the descent.
  int patience = 5;
  /// Sufficient-decrease constant of the backtracking line search.
  double armijo = 1e-4;
  double backtrack = 0.5;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

/// Output distributions reachable from `center` within distortion `radius`,
/// intersected with the entrywise support floor:
///   { q in simplex : d(center, q) <= radius, q(x) >= floor }.
class DistortionBall {
 public:
  /// InfeasibleError when the center lies below the floor (empty ball),
  /// DomainError for a negative radius or a floor with K * floor >= 1.
  DistortionBall(Distribution center, double radius, Measure measure,
                 double floor = kDefaultSupportFloor);

  const Distribution& center() const { return center_; }
  double radius() const { return radius_; }
  Measure measure() const { return measure_; }
  double floor() const { return floor_; }
  std::size_t size() const { return center_.size(); }

  double distortion_of(std::span<const double> q) const;
  /// Distortion within radius + slack, floor satisfied, entries sum to one.
  bool contains(std::span<const double> q, double slack = 1e-9) const;

  /// Euclidean projection of an arbitrary vector onto the ball.
  void project(std::span<const double> y, std::span<double> out) const;

  /// K == 2 only: the feasible range [lo, hi] of the first coordinate.
  std::pair<double, double> interval() const;

 private:
  void project_tv(std::span<const double> y, std::span<double> out) const;
  void project_kl(std::span<const double> y, std::span<double> out) const;

  Distribution center_;
  double radius_;
  Measure measure_;
  double floor_;
  std::pair<double, double> interval_{0.0, 1.0};
};

struct BallMinimum {
  double value = 0.0;
  Distribution argmin;
  bool converged = true;
  int iterations = 0;
};

struct PairMinimum {
  double value = 0.0;
  Distribution q_i;
  Distribution q_j;
  bool converged = true;
  int iterations = 0;
};

struct ChannelMinimum {
  double value = 0.0;
  Channel channel;
  bool converged = true;
  int iterations = 0;
};

/// Rank-one channel with every row equal to q, so that p * channel = q.
Channel channel_from_output(const Distribution& p, const Distribution& q);

/// min over q in ball of D(qhat || q). Started from the ball center. The
/// value is 0 exactly when qhat itself lies in the ball.
BallMinimum min_divergence_to_ball(const Distribution& qhat, const DistortionBall& ball,
                                   const SolverOptions& opts = {});

/// Value-only variant on a raw type vector; used on the per-sample path of
/// the sequential tests.
double min_divergence_value(std::span<const double> qhat, const DistortionBall& ball,
                            const SolverOptions& opts = {});

/// Joint minimum of D(q_i || q_j) over q_i in ball_i and q_j in ball_j.
PairMinimum pairwise_min_divergence(const DistortionBall& ball_i, const DistortionBall& ball_j,
                                    const SolverOptions& opts = {});

/// Joint minimum of the Bhattacharyya distance B(q_i, q_j) over both balls.
PairMinimum pairwise_min_bhattacharyya(const DistortionBall& ball_i,
                                       const DistortionBall& ball_j,
                                       const SolverOptions& opts = {});

/// The common-channel feasible set
///   { A : d(p0, p0 A) <= delta, d(p1, p1 A) <= delta, p0 A >= floor, p1 A >= floor }.
struct CommonChannelSet {
  Distribution p0;
  Distribution p1;
  double delta = 0.0;
  Measure measure = Measure::TvL1;
  double floor = kDefaultSupportFloor;

  bool contains(const Channel& a, double slack = 1e-9) const;
};

/// min over A in the common set of max{ D(qhat || p0 A), D(qhat || p1 A) }.
/// Solved as an epigraph program with a log-barrier interior-point method.
ChannelMinimum min_max_divergence_over_channel(const Distribution& qhat,
                                               const CommonChannelSet& set,
                                               const SolverOptions& opts = {});

/// min over A in the common set of D(qhat || target A), where `which`
/// selects target = p0 (0) or p1 (1).
ChannelMinimum min_divergence_over_channel(const Distribution& qhat, const CommonChannelSet& set,
                                           int which, const SolverOptions& opts = {});

}  // namespace advseq
