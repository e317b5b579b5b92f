#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "advseq/errors.hpp"
#include "advseq/seqtest.hpp"
#include "oracles.hpp"

using namespace advseq;

namespace {

const Distribution kP0({0.38, 0.62});
const Distribution kP1({0.5, 0.5});

// Frozen by tests/oracles/freeze_values.py (direct sum plus quadrature tail).
constexpr double kC085 = 2593.332557009364;
constexpr double kC050 = 1.6704068179663398;
constexpr double kBernoulliE0 = 0.009903836601752272;

GameSpec bernoulli() { return GameSpec::create({kP0, kP1}, 0.05, Measure::TvL1, {1.0, 1.0}); }

SymbolStream iid(const Distribution& q, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  std::vector<double> w(q.probs().begin(), q.probs().end());
  auto dist = std::make_shared<std::discrete_distribution<std::size_t>>(w.begin(), w.end());
  return [rng, dist]() -> std::optional<std::size_t> { return (*dist)(*rng); };
}

SymbolStream constant(std::size_t symbol) {
  return [symbol]() -> std::optional<std::size_t> { return symbol; };
}

SymbolStream finite(std::vector<std::size_t> symbols) {
  auto pos = std::make_shared<std::size_t>(0);
  return [symbols = std::move(symbols), pos]() -> std::optional<std::size_t> {
    if (*pos >= symbols.size()) return std::nullopt;
    return symbols[(*pos)++];
  };
}

}  // namespace

TEST(ConstantC, MatchesFrozenValues) {
  EXPECT_NEAR(compute_constant_c(0.85, 1e-6), kC085, 1e-6);
  EXPECT_NEAR(compute_constant_c(0.5, 1e-9), kC050, 1e-9);
}

TEST(ConstantC, MatchesDirectSumOracle) {
  EXPECT_NEAR(compute_constant_c(0.5, 1e-9), oracle::constant_c(0.5, 1'000'000), 1e-9);
}

TEST(ConstantC, ApproachesGeometricSeriesAsZetaVanishes) {
  EXPECT_NEAR(compute_constant_c(1e-9, 1e-12), 1.0 / (std::exp(1.0) - 1.0), 1e-8);
}

TEST(ConstantC, CachedAgreesWithDirect) {
  EXPECT_EQ(cached_constant_c(0.85), cached_constant_c(0.85));
  EXPECT_NEAR(cached_constant_c(0.85), kC085, 1e-8);
}

TEST(ConstantC, Errors) {
  EXPECT_THROW(compute_constant_c(0.0), DomainError);
  EXPECT_THROW(compute_constant_c(1.0), DomainError);
  EXPECT_THROW(compute_constant_c(0.5, 0.0), DomainError);
}

TEST(ThresholdSchedule, Formula) {
  const ThresholdSchedule s(0.01, 2, 2, 0.85, kC085);
  for (std::uint64_t n : {1ULL, 7ULL, 100ULL, 12345ULL}) {
    const double nd = static_cast<double>(n);
    const double expected = std::log(kC085 / 0.01) / nd + std::pow(nd, -0.85) +
                            (2.0 * std::log(nd + 1.0) + std::log(1.0)) / nd;
    EXPECT_NEAR(s.gamma(n), expected, 1e-12 * expected);
  }
}

TEST(ThresholdSchedule, FirstSampleByHand) {
  const ThresholdSchedule s(0.1, 3, 4, 0.5, 2.0);
  EXPECT_NEAR(s.gamma(1), std::log(20.0) + 1.0 + 3.0 * std::log(2.0) + std::log(3.0), 1e-12);
}

TEST(ThresholdSchedule, DecaysToZero) {
  const ThresholdSchedule s(0.05, 2, 2);
  EXPECT_LT(s.gamma(1'000'000), 1e-2 * s.gamma(100));
  EXPECT_GT(s.gamma(1'000'000), 0.0);
  for (std::uint64_t n = 1; n < 2000; ++n) EXPECT_GT(s.gamma(n), s.gamma(n + 1));
}

TEST(ThresholdSchedule, Errors) {
  EXPECT_THROW(ThresholdSchedule(0.0, 2, 2), DomainError);
  EXPECT_THROW(ThresholdSchedule(1.0, 2, 2), DomainError);
  EXPECT_THROW(ThresholdSchedule(0.1, 0, 2), DomainError);
  EXPECT_THROW(ThresholdSchedule(0.1, 2, 1), DomainError);
  EXPECT_THROW(ThresholdSchedule(0.1, 2, 2, 1.0), DomainError);
  EXPECT_THROW(ThresholdSchedule(0.1, 2, 2).gamma(0), DomainError);
}

TEST(ZStatistics, WorstCaseTypeOfFirstHypothesis) {
  EmpiricalCounts c(2);
  for (int i = 0; i < 81; ++i) c.add(0);
  for (int i = 0; i < 119; ++i) c.add(1);
  const auto z = z_statistics(c, bernoulli());
  EXPECT_NEAR(z[0], kBernoulliE0, 1e-9);
  EXPECT_NEAR(z[0], 0.0099038, 1e-7);
  EXPECT_EQ(z[1], 0.0);
}

TEST(AwareTest, SimultaneousCrossingGoesToSmallestIndex) {
  const GameSpec spec = bernoulli();
  TestOptions o;
  o.stride = 1000;
  AwareTest t(spec, ThresholdSchedule(0.1, 2, 2), o);
  std::optional<std::size_t> d;
  for (int i = 0; i < 1000; ++i) d = t.step(0);
  ASSERT_TRUE(d.has_value());
  EXPECT_GT(t.z()[1], t.z()[0]);
  EXPECT_GE(t.z()[0], t.schedule().gamma(1000));
  EXPECT_EQ(*d, 0u);
}

TEST(AwareTest, StepAfterStopThrows) {
  const GameSpec spec = bernoulli();
  AwareTest t(spec, ThresholdSchedule(0.1, 2, 2));
  while (!t.stopped()) t.step(1);
  EXPECT_EQ(*t.decision(), 0u);
  EXPECT_THROW(t.step(1), StateError);
  t.reset();
  EXPECT_FALSE(t.stopped());
  EXPECT_EQ(t.n(), 0u);
}

TEST(AwareTest, ReplayIsConsistent) {
  const GameSpec spec = bernoulli();
  const auto sol = solve_aware_equilibrium(spec);
  const ThresholdSchedule s(0.05, 2, 2);
  TestOptions o;
  o.record_trajectory = true;
  const auto a = run_aware(iid(sol.q_star[0], 3), spec, s, o);
  const auto b = run_aware(iid(sol.q_star[0], 3), spec, s, o);
  ASSERT_EQ(a.status, TestStatus::Decided);
  EXPECT_EQ(a.stopping_time, b.stopping_time);
  EXPECT_EQ(a.decision, b.decision);
  ASSERT_EQ(a.trajectory.size(), a.stopping_time);

  AwareTest manual(spec, s);
  auto stream = iid(sol.q_star[0], 3);
  std::optional<std::size_t> d;
  while (!d) d = manual.step(*stream());
  EXPECT_EQ(manual.n(), a.stopping_time);
  EXPECT_EQ(d, a.decision);
  EXPECT_TRUE(a.trajectory.back().stopped);
  EXPECT_EQ(a.trajectory.back().statistics, manual.z());
}

TEST(AwareTest, TimesOutAtCap) {
  const GameSpec spec = bernoulli();
  TestOptions o;
  o.cap = 5;
  const auto r = run_aware(iid(kP0, 1), spec, ThresholdSchedule(0.01, 2, 2), o);
  EXPECT_EQ(r.status, TestStatus::TimedOut);
  EXPECT_EQ(r.stopping_time, 5u);
  EXPECT_FALSE(r.decision.has_value());
}

TEST(AwareTest, ExhaustedStreamThrows) {
  const GameSpec spec = bernoulli();
  EXPECT_THROW(run_aware(finite({0, 1, 0}), spec, ThresholdSchedule(0.01, 2, 2)),
               StreamExhaustedError);
  TestOptions o;
  o.cap = 0;
  EXPECT_THROW(run_aware(constant(0), spec, ThresholdSchedule(0.01, 2, 2), o), DomainError);
}

TEST(AwareTest, DecidesCorrectlyUnderWorstCase) {
  const GameSpec spec = bernoulli();
  const auto sol = solve_aware_equilibrium(spec);
  const ThresholdSchedule s(0.01, 2, 2);
  int correct = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const std::size_t h = r % 2;
    const auto out = run_aware(iid(sol.q_star[h], 1000 + r), spec, s);
    if (out.decision == h) ++correct;
  }
  EXPECT_GT(static_cast<double>(correct) / reps, 0.99);
}

TEST(NonAwareTest, CombinedStatisticDominatesSingles) {
  const CommonChannelSet set{kP0, kP1, 0.05, Measure::TvL1};
  TestOptions o;
  o.stride = 200;
  NonAwareTest t(set, ThresholdSchedule(0.1, 2, 2), o);
  auto stream = iid(kP1, 17);
  std::optional<std::size_t> d;
  while (!d && t.n() < 200'000) d = t.step(*stream());
  ASSERT_TRUE(d.has_value());
  const auto& s = t.statistics();
  EXPECT_GE(s[0] + 1e-9, std::max(s[1], s[2]));
  EXPECT_EQ(*d, 1u);
  EXPECT_THROW(t.step(0), StateError);
}

TEST(Msprt, ConfigValidation) {
  EXPECT_THROW(MsprtConfig({{0.0, 1.0}, {1.0, 0.5}}), DomainError);
  EXPECT_THROW(MsprtConfig({{0.0, 0.0}, {1.0, 0.0}}), DomainError);
  EXPECT_EQ(MsprtConfig::uniform(3, 2.0)(1, 2), 2.0);
}

TEST(Msprt, BinaryCaseIsWaldSprt) {
  const std::vector<std::size_t> ys{1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  const double b = 0.5;
  const double up = std::log(0.62 / 0.5);
  const double down = std::log(0.38 / 0.5);
  double llr = 0.0;
  std::uint64_t expected = 0;
  for (std::size_t n = 0; n < ys.size(); ++n) {
    llr += ys[n] == 1 ? up : down;
    if (llr >= b) {
      expected = n + 1;
      break;
    }
  }
  ASSERT_GT(expected, 0u);
  const auto r = run_msprt(finite(ys), {kP0, kP1}, MsprtConfig::uniform(2, b));
  EXPECT_EQ(r.stopping_time, expected);
  EXPECT_EQ(r.decision, 0u);
}

TEST(Msprt, StoppingTimeFollowsLawOfLargeNumbers) {
  const double b = 40.0;
  const double d01 = oracle::kl({0.38, 0.62}, {0.5, 0.5});
  double sum = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto out = run_msprt(iid(kP0, 50 + r), {kP0, kP1}, MsprtConfig::uniform(2, b));
    sum += static_cast<double>(out.stopping_time);
  }
  EXPECT_NEAR(sum / reps / (b / d01), 1.0, 0.1);
}

TEST(Msprt, ErrorRateBelowBoundary) {
  const double alpha = 0.05;
  const int reps = 2000;
  int wrong = 0;
  for (int r = 0; r < reps; ++r) {
    const auto out = run_msprt(iid(kP1, 9000 + r), {kP0, kP1},
                               MsprtConfig::uniform(2, std::log(1.0 / alpha)));
    if (out.decision != 1u) ++wrong;
  }
  const double rate = static_cast<double>(wrong) / reps;
  EXPECT_LE(rate, alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / reps));
}

TEST(TrajectoryCsv, Layout) {
  std::vector<TrajectoryRow> rows(2);
  rows[0] = {1, 2.5, {0.1, 0.0}, false, std::nullopt};
  rows[1] = {2, 1.25, {0.3, 0.0}, true, 0};
  std::ostringstream out;
  write_trajectory_csv(out, rows, 2);
  EXPECT_EQ(out.str(),
            "n,gamma_n,Z_0,Z_1,stopped,decision\n"
            "1,2.5,0.1,0,0,\n"
            "2,1.25,0.3,0,1,0\n");
}
