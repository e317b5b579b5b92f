#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "advseq/errors.hpp"
#include "advseq/prob.hpp"
#include "oracles.hpp"

using namespace advseq;

namespace {

double sum_of(const Distribution& d) {
  double s = 0.0;
  for (double v : d.probs()) s += v;
  return s;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) s += x = e(rng) + floor;
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

TEST(Normalize, EqualWeights) {
  const std::vector<double> raw{2.0, 2.0};
  const Distribution d = normalize(raw);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], 0.5);
}

TEST(Normalize, PointMassStaysPut) {
  const std::vector<double> raw{1.0, 0.0, 0.0};
  EXPECT_EQ(normalize(raw), Distribution({1.0, 0.0, 0.0}));
}

TEST(Normalize, RenormalizesDigitOneHistogram) {
  const std::vector<double> raw{0.9061, 0.09395};
  const Distribution d = normalize(raw);
  EXPECT_NEAR(d[0], 0.9061 / 1.00005, 1e-15);
  EXPECT_NEAR(d[1], 0.09395 / 1.00005, 1e-15);
  EXPECT_NEAR(d[0], 0.9060547, 1e-7);
  EXPECT_NEAR(sum_of(d), 1.0, 1e-12);
}

TEST(Normalize, RejectsBadWeights) {
  EXPECT_THROW(normalize(std::vector<double>{0.0, 0.0}), ConstructionError);
  EXPECT_THROW(normalize(std::vector<double>{1.0, -0.1}), ConstructionError);
  EXPECT_THROW(normalize(std::vector<double>{}), ConstructionError);
}

TEST(DistributionCtor, RejectsOffSimplexInput) {
  EXPECT_THROW(Distribution({0.9061, 0.09395}), ConstructionError);
  EXPECT_THROW(Distribution({0.5, 0.6}), ConstructionError);
  EXPECT_THROW(Distribution({1.1, -0.1}), ConstructionError);
  EXPECT_THROW(Distribution(std::vector<double>{}), ConstructionError);
}

TEST(DistributionCtor, EverySumWithinTolerance) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Distribution d(random_simplex(rng, 2 + t % 6));
    EXPECT_NEAR(sum_of(d), 1.0, 1e-12);
    for (double v : d.probs()) EXPECT_GE(v, 0.0);
  }
}

TEST(DistributionCtor, FullSupportView) {
  const Distribution d({0.5, 0.5, 0.0});
  EXPECT_FALSE(d.has_full_support(kDefaultSupportFloor));
  EXPECT_TRUE(Distribution::uniform(3).has_full_support(kDefaultSupportFloor));
}

TEST(ApplyChannel, PrintedWitnessForUniformHypothesis) {
  const Channel a(2, {0.15, 0.85, 0.80, 0.20});
  const Distribution q = apply_channel(Distribution({0.5, 0.5}), a);
  EXPECT_NEAR(q[0], 0.475, 1e-15);
  EXPECT_NEAR(q[1], 0.525, 1e-15);
}

TEST(ApplyChannel, IdentityIsNeutral) {
  std::mt19937_64 rng(3);
  for (std::size_t k = 2; k <= 6; ++k) {
    const Distribution p(random_simplex(rng, k));
    EXPECT_LE(apply_channel(p, Channel::identity(k)).max_abs_diff(p), 1e-16);
  }
}

TEST(ApplyChannel, PrintedWitnessForFirstHypothesis) {
  const Channel a(2, {0.5, 0.5, 0.3419, 0.6581});
  const Distribution q = apply_channel(Distribution({0.38, 0.62}), a);
  EXPECT_NEAR(q[0], 0.401978, 1e-12);
  EXPECT_NEAR(q[1], 0.598022, 1e-12);
}

TEST(ApplyChannel, ShapeMismatch) {
  EXPECT_THROW(apply_channel(Distribution::uniform(3), Channel::identity(2)), ShapeError);
}

TEST(ApplyChannel, StaysOnSimplex) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + t % 5;
    std::vector<double> rows;
    for (std::size_t l = 0; l < k; ++l) {
      const auto r = random_simplex(rng, k);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    const Distribution q = apply_channel(Distribution(random_simplex(rng, k)), Channel(k, rows));
    EXPECT_NEAR(sum_of(q), 1.0, 1e-12);
    for (double v : q.probs()) EXPECT_GE(v, 0.0);
  }
}

TEST(ChannelCtor, RejectsNonStochasticRows) {
  EXPECT_THROW(Channel(2, {0.5, 0.6, 0.5, 0.5}), ConstructionError);
  EXPECT_THROW(Channel(2, {0.5, 0.5, 0.5}), ShapeError);
}

TEST(KlDivergence, SelfIsZero) {
  const Distribution p({0.2, 0.3, 0.5});
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(KlDivergence, TwoTermValue) {
  const double v = kl_divergence(Distribution({0.475, 0.525}), Distribution({0.405, 0.595}));
  EXPECT_NEAR(v, oracle::binary_kl(0.475, 0.405), 1e-15);
  EXPECT_NEAR(v, 0.010026, 1e-5);
}

TEST(KlDivergence, AbsoluteContinuityFailure) {
  EXPECT_EQ(kl_divergence(Distribution({1.0, 0.0}), Distribution({0.0, 1.0})),
            std::numeric_limits<double>::infinity());
}

TEST(KlDivergence, Gibbs) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 2 + t % 5;
    const Distribution p(random_simplex(rng, k));
    const Distribution q(random_simplex(rng, k));
    const double d = kl_divergence(p, q);
    EXPECT_GE(d, 0.0);
    if (p.max_abs_diff(q) > 1e-6) EXPECT_GT(d, 0.0);
  }
}

TEST(KlDivergence, Pinsker) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + t % 5;
    const Distribution p(random_simplex(rng, k, 1e-3));
    const Distribution q(random_simplex(rng, k, 1e-3));
    EXPECT_LE(tv_l1(p, q) / 2.0, std::sqrt(kl_divergence(p, q) / 2.0) + 1e-15);
  }
}

TEST(Distortion, SelfIsExactlyZero) {
  const Distribution p({0.1, 0.2, 0.7});
  EXPECT_EQ(distortion(Measure::TvL1, p, p), 0.0);
  EXPECT_EQ(distortion(Measure::Kl, p, p), 0.0);
}

TEST(Distortion, TvIsUnhalved) {
  EXPECT_NEAR(tv_l1(Distribution({0.38, 0.62}), Distribution({0.405, 0.595})), 0.05, 1e-15);
}

TEST(Measure, ParseRoundTrip) {
  EXPECT_EQ(parse_measure(to_string(Measure::TvL1)), Measure::TvL1);
  EXPECT_EQ(parse_measure(to_string(Measure::Kl)), Measure::Kl);
  EXPECT_THROW(parse_measure("hellinger"), DomainError);
}

TEST(BinaryKl, SelfIsZero) { EXPECT_EQ(binary_kl(0.3, 0.3), 0.0); }

TEST(BinaryKl, BoundaryPairValues) {
  EXPECT_NEAR(binary_kl(0.405, 0.475), 0.009896, 1e-5);
  EXPECT_NEAR(binary_kl(0.475, 0.405), 0.010026, 1e-5);
  // Frozen from the brute-force grid in tests/oracles/freeze_values.py.
  EXPECT_NEAR(binary_kl(0.405, 0.475), 0.009903836601752272, 1e-15);
  EXPECT_NEAR(binary_kl(0.475, 0.405), 0.010017524989995322, 1e-15);
}

TEST(BinaryKl, MatchesVectorKl) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 200; ++t) {
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_NEAR(binary_kl(a, b), kl_divergence(Distribution({a, 1 - a}), Distribution({b, 1 - b})),
                1e-14);
  }
}

TEST(BinaryKl, RejectsEndpoints) {
  EXPECT_THROW(binary_kl(0.0, 0.5), DomainError);
  EXPECT_THROW(binary_kl(0.5, 1.0), DomainError);
}

TEST(Bhattacharyya, SelfIsZero) {
  const Distribution q({0.25, 0.25, 0.5});
  EXPECT_NEAR(bhattacharyya(q, q), 0.0, 1e-15);
}

TEST(Bhattacharyya, FormulaValue) {
  const double expect = -std::log(std::sqrt(0.2025) + std::sqrt(0.2975));
  EXPECT_NEAR(bhattacharyya(Distribution({0.5, 0.5}), Distribution({0.405, 0.595})), expect, 1e-15);
}

TEST(Bhattacharyya, RejectsZeroEntries) {
  EXPECT_THROW(bhattacharyya(Distribution({1.0, 0.0}), Distribution({0.5, 0.5})), DomainError);
}

TEST(Bhattacharyya, TwiceEqualsSumKlGridMinimum) {
  const Distribution q0({0.5, 0.5});
  const Distribution q1({0.405, 0.595});
  const auto r = oracle::simplex_min(
      [&](const std::vector<double>& p) { return oracle::kl(p, {0.5, 0.5}) + oracle::kl(p, {0.405, 0.595}); },
      2, 1e-4, 1e-4);
  EXPECT_NEAR(2.0 * bhattacharyya(q0, q1), r.value, 1e-4);
}

TEST(EmpiricalDistribution, BalancedSequence) {
  const std::vector<std::size_t> seq{0, 0, 1, 1};
  EXPECT_EQ(EmpiricalCounts::from_sequence(seq, 2).type(), Distribution({0.5, 0.5}));
}

TEST(EmpiricalDistribution, DegenerateSequence) {
  const std::vector<std::size_t> seq{0, 0, 0};
  EXPECT_EQ(EmpiricalCounts::from_sequence(seq, 2).type(), Distribution({1.0, 0.0}));
}

TEST(EmpiricalDistribution, EmptyIsAnError) {
  EXPECT_THROW(EmpiricalCounts(3).type(), EmptySequenceError);
  const std::vector<std::uint64_t> counts{0, 0};
  EXPECT_THROW(empirical_distribution(counts, 0), EmptySequenceError);
}

TEST(EmpiricalDistribution, CountsMustSumToN) {
  const std::vector<std::uint64_t> counts{1, 2};
  EXPECT_THROW(empirical_distribution(counts, 4), ConstructionError);
}

TEST(EmpiricalDistribution, SymbolOutOfRange) {
  EmpiricalCounts c(2);
  EXPECT_THROW(c.add(2), DomainError);
}

TEST(EmpiricalDistribution, IncrementalMatchesBatch) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> sym(0, 3);
  std::vector<std::size_t> seq;
  EmpiricalCounts inc(4);
  for (int t = 0; t < 300; ++t) {
    seq.push_back(sym(rng));
    inc.add(seq.back());
    const EmpiricalCounts batch = EmpiricalCounts::from_sequence(seq, 4);
    ASSERT_EQ(inc.n(), batch.n());
    EXPECT_EQ(inc.type(), batch.type());
    EXPECT_EQ(inc.type(), empirical_distribution(batch.counts(), batch.n()));
  }
}

TEST(LogLikelihoodRatio, EqualHypothesesGiveZero) {
  const std::vector<std::uint64_t> counts{3, 4};
  const Distribution p({0.3, 0.7});
  EXPECT_EQ(log_likelihood_ratio(counts, p, p), 0.0);
}

TEST(LogLikelihoodRatio, HandValue) {
  const std::vector<std::uint64_t> counts{2, 1};
  const double v = log_likelihood_ratio(counts, Distribution({0.6, 0.4}), Distribution({0.4, 0.6}));
  EXPECT_NEAR(v, 2.0 * std::log(1.5) + std::log(2.0 / 3.0), 1e-15);
}

TEST(LogLikelihoodRatio, Antisymmetric) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::uint64_t> c(0, 50);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 4;
    std::vector<std::uint64_t> counts(k);
    for (auto& x : counts) x = c(rng);
    const Distribution pi(random_simplex(rng, k, 0.01));
    const Distribution pj(random_simplex(rng, k, 0.01));
    EXPECT_NEAR(log_likelihood_ratio(counts, pi, pj), -log_likelihood_ratio(counts, pj, pi), 1e-12);
  }
}

TEST(LogLikelihoodRatio, SignedInfinities) {
  const std::vector<std::uint64_t> counts{1, 1};
  const Distribution full({0.5, 0.5});
  const Distribution point({1.0, 0.0});
  EXPECT_EQ(log_likelihood_ratio(counts, full, point), std::numeric_limits<double>::infinity());
  EXPECT_EQ(log_likelihood_ratio(counts, point, full), -std::numeric_limits<double>::infinity());
}
