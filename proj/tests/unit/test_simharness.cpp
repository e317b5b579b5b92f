#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "advseq/errors.hpp"
#include "advseq/simharness.hpp"

using namespace advseq;

namespace {

const Distribution kP0({0.38, 0.62});
const Distribution kP1({0.5, 0.5});

GameSpec bernoulli() { return GameSpec::create({kP0, kP1}, 0.05, Measure::TvL1, {1.0, 1.0}); }

ScenarioConfig base_config(std::vector<double> alphas, std::uint64_t reps) {
  ScenarioConfig c(bernoulli());
  c.alpha_grid = std::move(alphas);
  c.replications = reps;
  c.seed = 2024;
  c.threads = 1;
  return c;
}

// Pearson statistic of observed counts against expected probabilities.
double chi_square(const std::vector<long>& counts, std::span<const double> p, long total) {
  double x = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const double e = p[a] * static_cast<double>(total);
    x += (static_cast<double>(counts[a]) - e) * (static_cast<double>(counts[a]) - e) / e;
  }
  return x;
}

}  // namespace

TEST(Sampling, ChannelOutputMarginal) {
  const Distribution p({0.2, 0.5, 0.3});
  const Channel a(3, {0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.25, 0.25, 0.5});
  const Distribution out = apply_channel(p, a);
  Rng rng(11);
  const long n = 200'000;
  std::vector<long> counts(3, 0);
  for (long i = 0; i < n; ++i) ++counts[sample_through_channel(p, a, rng)];
  // 99.9% quantile of chi-square with two degrees of freedom.
  EXPECT_LT(chi_square(counts, out.probs(), n), 13.82);
}

TEST(Sampling, IndexMarginal) {
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  Rng rng(12);
  const long n = 200'000;
  std::vector<long> counts(4, 0);
  for (long i = 0; i < n; ++i) ++counts[sample_index(p, rng)];
  EXPECT_EQ(counts[1], 0);
  const std::vector<long> nz{counts[0], counts[2], counts[3]};
  const std::vector<double> pz{0.1, 0.6, 0.3};
  EXPECT_LT(chi_square(nz, pz, n), 13.82);
}

TEST(Sampling, RankOneChannelIgnoresInput) {
  const Distribution q({0.405, 0.595});
  const Channel a = Channel::rank_one(q);
  Rng r1(5);
  Rng r2(5);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sample_through_channel(kP0, a, r1), sample_through_channel(kP1, a, r2));
  }
}

TEST(Sampling, ShapeMismatch) {
  Rng rng(1);
  EXPECT_THROW(sample_through_channel(kP0, Channel::identity(3), rng), ShapeError);
}

TEST(Substream, DeterministicAndDistinct) {
  Rng a = substream(7, 0, 0, 0);
  Rng b = substream(7, 0, 0, 0);
  EXPECT_EQ(a(), b());
  EXPECT_NE(substream(7, 0, 0, 0)(), substream(7, 0, 0, 1)());
  EXPECT_NE(substream(7, 0, 0, 0)(), substream(7, 0, 1, 0)());
  EXPECT_NE(substream(7, 0, 0, 0)(), substream(7, 1, 0, 0)());
  EXPECT_NE(substream(7, 0, 0, 0)(), substream(8, 0, 0, 0)());
}

TEST(Substream, NeighbouringStreamsUncorrelated) {
  const int n = 20000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int r = 0; r < n; ++r) {
    Rng a = substream(3, 0, 0, static_cast<std::uint64_t>(r));
    Rng b = substream(3, 0, 0, static_cast<std::uint64_t>(r) + 1);
    const double x = uniform01(a);
    const double y = uniform01(b);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(ScenarioCtor, Errors) {
  EXPECT_THROW(Scenario(base_config({}, 1)), DomainError);
  EXPECT_THROW(Scenario(base_config({1.5}, 1)), DomainError);
  EXPECT_THROW(Scenario(base_config({0.1}, 0)), DomainError);
  auto c = base_config({0.1}, 1);
  c.true_hypotheses = {2};
  EXPECT_THROW(Scenario(std::move(c)), DomainError);
  c = base_config({0.1}, 1);
  c.adversary = AdversaryMode::Explicit;
  c.channels = {Channel::identity(2)};
  EXPECT_THROW(Scenario(std::move(c)), ShapeError);
  c = base_config({0.1}, 1);
  c.adversary = AdversaryMode::Explicit;
  c.channels = {Channel(2, {0.5, 0.5, 0.5, 0.5}), Channel::identity(2)};
  EXPECT_THROW(Scenario(std::move(c)), InfeasibleError);
  c = base_config({0.1}, 1);
  c.adversary = AdversaryMode::Common;
  c.channels = {Channel(2, {0.5, 0.5, 0.5, 0.5})};
  EXPECT_THROW(Scenario(std::move(c)), InfeasibleError);
}

TEST(ScenarioCtor, EquilibriumChannelsAreRankOneOntoWorstCase) {
  const Scenario s(base_config({0.1}, 1));
  ASSERT_EQ(s.channels().size(), 2u);
  EXPECT_NEAR(s.channels()[0](0, 0), 0.405, 1e-7);
  EXPECT_NEAR(s.channels()[0](1, 0), 0.405, 1e-7);
  EXPECT_NEAR(s.channels()[1](0, 0), 0.475, 1e-7);
}

TEST(ScenarioSampling, WorstCaseFrequencyUnderFirstHypothesis) {
  const Scenario s(base_config({0.1}, 1));
  Rng rng(77);
  const long n = 400'000;
  long zeros = 0;
  for (long i = 0; i < n; ++i) zeros += sample_through_channel(kP0, s.channels()[0], rng) == 0;
  const double f = static_cast<double>(zeros) / n;
  EXPECT_NEAR(f, 0.405, 3.0 * std::sqrt(0.405 * 0.595 / n));
}

TEST(Replication, Deterministic) {
  const Scenario s(base_config({0.05}, 1));
  const auto a = s.run_replication(0, 1, 42);
  const auto b = s.run_replication(0, 1, 42);
  EXPECT_EQ(a.stopping_time, b.stopping_time);
  EXPECT_EQ(a.decision, b.decision);
  EXPECT_THROW(s.run_replication(1, 0, 0), DomainError);
  EXPECT_THROW(s.run_replication(0, 2, 0), DomainError);
}

TEST(Replication, CapProducesTimeout) {
  auto c = base_config({0.05}, 1);
  c.cap = 3;
  const Scenario s(std::move(c));
  const auto r = s.run_replication(0, 0, 0);
  EXPECT_TRUE(r.timed_out());
  EXPECT_EQ(r.stopping_time, 3u);
}

TEST(MonteCarlo, SingleReplicationMatchesDirectRun) {
  const Scenario s(base_config({0.05}, 1));
  const auto report = monte_carlo(s);
  ASSERT_EQ(report.rows.size(), 2u);
  for (std::size_t h = 0; h < 2; ++h) {
    const auto r = s.run_replication(0, h, 0);
    EXPECT_EQ(report.rows[h].hypothesis, h);
    EXPECT_EQ(report.rows[h].mean_t, static_cast<double>(r.stopping_time));
    EXPECT_EQ(report.rows[h].std_t, 0.0);
    EXPECT_EQ(report.rows[h].replications, 1u);
  }
}

TEST(MonteCarlo, ErrorRateWithinLevel) {
  const double alpha = 0.1;
  const Scenario s(base_config({alpha}, 1000));
  for (const auto& row : monte_carlo(s).rows) {
    EXPECT_EQ(row.timeouts, 0u);
    const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(row.replications));
    EXPECT_LE(row.error_rate, alpha + 3.0 * se);
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  auto c1 = base_config({0.1, 0.01}, 60);
  auto c3 = base_config({0.1, 0.01}, 60);
  c3.threads = 3;
  const auto a = alpha_sweep(Scenario(std::move(c1)));
  const auto b = alpha_sweep(Scenario(std::move(c3)));
  std::ostringstream sa, sb;
  write_report_csv(sa, a);
  write_report_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(AlphaSweep, RowsAndTrend) {
  const std::vector<double> alphas{std::exp(-2.0), std::exp(-6.0), std::exp(-10.0)};
  const auto rows = alpha_sweep(Scenario(base_config(alphas, 200)));
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& r = rows[a * 2 + h];
      EXPECT_EQ(r.hypothesis, h);
      EXPECT_NEAR(r.log_inv_alpha, -std::log(alphas[a]), 1e-12);
      EXPECT_EQ(r.theoretical_exponent, rows[h].theoretical_exponent);
      EXPECT_NEAR(r.payoff_estimate, r.log_inv_alpha / r.mean_t, 1e-15);
    }
    EXPECT_LT(rows[h].mean_t, rows[2 + h].mean_t);
    EXPECT_LT(rows[2 + h].mean_t, rows[4 + h].mean_t);
  }
}

TEST(AlphaSweep, SingleAlphaGivesOneRowPerHypothesis) {
  EXPECT_EQ(alpha_sweep(Scenario(base_config({0.2}, 5))).size(), 2u);
  auto c = base_config({0.2}, 5);
  c.true_hypotheses = {1};
  const auto rows = alpha_sweep(Scenario(std::move(c)));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].hypothesis, 1u);
}

TEST(ReportCsv, Header) {
  std::ostringstream out;
  write_report_csv(out, {});
  EXPECT_EQ(out.str(),
            "alpha,log_inv_alpha,hypothesis,mean_T,std_T,stderr_T,payoff_estimate,"
            "theoretical_exponent,error_rate,timeouts,replications\n");
}
