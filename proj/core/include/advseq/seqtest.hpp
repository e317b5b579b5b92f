#pragma once

// Decision-maker procedures: the threshold schedule, the adversary-aware
// universal test, the non-aware (common-channel) test and the matrix SPRT
// baseline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "advseq/divopt.hpp"
#include "advseq/equilibrium.hpp"
#include "advseq/prob.hpp"

namespace advseq {

inline constexpr double kDefaultZeta = 0.85;
inline constexpr double kDefaultConstantTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultCap = 1'000'000;

/// C = sum_{n >= 1} exp(-n^(1 - zeta)), accurate to `abs_tol`.
///
/// The first N - 1 terms are summed directly. The tail from N on is the
/// integral of exp(-x^s) over [N, inf) (an upper incomplete gamma function)
/// plus f(N) / 2; since f is convex the Euler-Maclaurin remainder is bounded
/// by |f'(N)| / 12, and N is grown until that bound is below abs_tol / 2.
double compute_constant_c(double zeta, double abs_tol = kDefaultConstantTolerance);

/// compute_constant_c(zeta, 1e-9), memoized per zeta. Thread-safe.
double cached_constant_c(double zeta);

/// gamma_n = log(C/alpha)/n + n^-zeta + (K log(n+1) + log(M-1))/n.
class ThresholdSchedule {
 public:
  /// DomainError unless 0 < alpha < 1, 0 < zeta < 1, K >= 1, M >= 2.
  ThresholdSchedule(double alpha, std::size_t alphabet_size, std::size_t num_hypotheses,
                    double zeta = kDefaultZeta);
  /// Uses a caller-supplied constant instead of the cached one.
  ThresholdSchedule(double alpha, std::size_t alphabet_size, std::size_t num_hypotheses,
                    double zeta, double c);

  double gamma(std::uint64_t n) const;

  double alpha() const { return alpha_; }
  double zeta() const { return zeta_; }
  double c() const { return c_; }
  std::size_t alphabet_size() const { return k_; }
  std::size_t num_hypotheses() const { return m_; }

 private:
  double alpha_;
  double zeta_;
  double c_;
  std::size_t k_;
  std::size_t m_;
  double log_c_over_alpha_;
  double log_m_minus_one_;
};

enum class TestStatus { Decided, TimedOut };

struct TrajectoryRow {
  std::uint64_t n = 0;
  double gamma = 0.0;
  std::vector<double> statistics;
  bool stopped = false;
  std::optional<std::size_t> decision;
};

struct TestOutcome {
  TestStatus status = TestStatus::TimedOut;
  /// Number of consumed samples; equals the cap for a timed-out run.
  std::uint64_t stopping_time = 0;
  std::optional<std::size_t> decision;
  std::vector<TrajectoryRow> trajectory;
};

struct TestOptions {
  std::uint64_t cap = kDefaultCap;
  /// Stopping condition evaluated every `stride` samples.
  std::uint64_t stride = 1;
  bool record_trajectory = false;
  SolverOptions solver;
};

/// Returns the next observed symbol, or nullopt when the source is exhausted.
using SymbolStream = std::function<std::optional<std::size_t>()>;

/// Z_i = min over j != i of min_{q in B_j} D(qhat || q) for the type of `counts`.
std::vector<double> z_statistics(const EmpiricalCounts& counts, const GameSpec& spec,
                                 const SolverOptions& opts = {});

/// Sequential state of the adversary-aware test. Single owner.
class AwareTest {
 public:
  AwareTest(const GameSpec& spec, ThresholdSchedule schedule, TestOptions opts = {});

  /// Consumes one symbol. Returns the decision when the test stops at this
  /// sample (smallest index among simultaneous crossings), nullopt otherwise.
  /// StateError once the test has stopped.
  std::optional<std::size_t> step(std::size_t y);

  void reset();

  const EmpiricalCounts& counts() const { return counts_; }
  std::uint64_t n() const { return counts_.n(); }
  bool stopped() const { return decision_.has_value(); }
  std::optional<std::size_t> decision() const { return decision_; }
  /// Statistics from the most recent evaluation.
  const std::vector<double>& z() const { return z_; }
  const std::vector<TrajectoryRow>& trajectory() const { return trajectory_; }
  const ThresholdSchedule& schedule() const { return schedule_; }

 private:
  const GameSpec* spec_;
  ThresholdSchedule schedule_;
  TestOptions opts_;
  EmpiricalCounts counts_;
  std::vector<double> qhat_;
  std::vector<double> ball_min_;
  std::vector<double> z_;
  std::optional<std::size_t> decision_;
  std::vector<TrajectoryRow> trajectory_;
};

TestOutcome run_aware(const SymbolStream& stream, const GameSpec& spec,
                      const ThresholdSchedule& schedule, const TestOptions& opts = {});

/// Binary test against an adversary restricted to one common channel.
///
/// Stops at the first n with S_n = min_A max{D(qhat||P0 A), D(qhat||P1 A)}
/// >= gamma_n and decides 0 when min_A D(qhat||P1 A) is the larger of the two
/// single-hypothesis statistics, 1 otherwise (ties go to 0).
class NonAwareTest {
 public:
  NonAwareTest(CommonChannelSet set, ThresholdSchedule schedule, TestOptions opts = {});

  std::optional<std::size_t> step(std::size_t y);
  void reset();

  std::uint64_t n() const { return counts_.n(); }
  bool stopped() const { return decision_.has_value(); }
  std::optional<std::size_t> decision() const { return decision_; }
  /// {S_n, min_A D(qhat||P0 A), min_A D(qhat||P1 A)} from the last evaluation;
  /// the last two are only refreshed when S_n crosses the threshold.
  const std::vector<double>& statistics() const { return stats_; }
  const std::vector<TrajectoryRow>& trajectory() const { return trajectory_; }

 private:
  CommonChannelSet set_;
  ThresholdSchedule schedule_;
  TestOptions opts_;
  EmpiricalCounts counts_;
  std::vector<double> stats_;
  std::optional<std::size_t> decision_;
  std::vector<TrajectoryRow> trajectory_;
};

TestOutcome run_nonaware(const SymbolStream& stream, const CommonChannelSet& set,
                         const ThresholdSchedule& schedule, const TestOptions& opts = {});

/// Boundary matrix of the matrix SPRT: b(i, j) > 0 off the diagonal, 0 on it.
class MsprtConfig {
 public:
  explicit MsprtConfig(std::vector<std::vector<double>> boundary);
  static MsprtConfig uniform(std::size_t m, double value);

  std::size_t size() const { return b_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return b_[i][j]; }

 private:
  std::vector<std::vector<double>> b_;
};

/// Stops at the first n where some i has S_ij(n) >= b(i, j) for every j != i
/// and accepts that i (smallest index on ties).
TestOutcome run_msprt(const SymbolStream& stream, const std::vector<Distribution>& hypotheses,
                      const MsprtConfig& config, std::uint64_t cap = kDefaultCap);

/// CSV rows: n, gamma_n, Z_0..Z_{M-1}, stopped, decision.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          std::size_t num_statistics);

}  // namespace advseq
