#pragma once

// Finite-alphabet probability primitives: distributions, channels,
// divergences, empirical types and log-likelihood ratios.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace advseq {

/// Tolerance on the sum of a constructed distribution (and of channel rows).
inline constexpr double kSumTolerance = 1e-12;
/// Inputs whose sum is off by more than this are rejected instead of rescaled.
inline constexpr double kAcceptSlack = 1e-9;
inline constexpr double kDefaultSupportFloor = 1e-9;

/// Probability vector over the alphabet {0, ..., K-1}. Immutable.
class Distribution {
 public:
  /// Accepts nonnegative entries summing to 1 within kAcceptSlack and rescales
  /// them so the stored sum is 1 within kSumTolerance. Use normalize() for
  /// arbitrary nonnegative weights.
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t k);
  static Distribution point_mass(std::size_t k, std::size_t symbol);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }

  /// Every entry >= floor.
  bool has_full_support(double floor) const;
  double max_abs_diff(const Distribution& other) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> p_;
};

/// Divides nonnegative weights by their sum. Throws ConstructionError for an
/// empty, all-zero or negative input.
Distribution normalize(std::span<const double> raw);

/// K x K row-stochastic matrix; entry (l, j) = Pr(Y = j | X = l).
class Channel {
 public:
  /// `row_major` holds K*K entries; each row must be a valid distribution.
  Channel(std::size_t k, std::vector<double> row_major);

  static Channel identity(std::size_t k);
  /// Every row equal to `row`; maps any input distribution to `row`.
  static Channel rank_one(const Distribution& row);

  std::size_t size() const { return k_; }
  double operator()(std::size_t l, std::size_t j) const { return a_[l * k_ + j]; }
  std::span<const double> row(std::size_t l) const {
    return std::span<const double>(a_).subspan(l * k_, k_);
  }
  std::span<const double> entries() const { return a_; }

  friend bool operator==(const Channel&, const Channel&) = default;

 private:
  std::size_t k_;
  std::vector<double> a_;
};

/// Output distribution P*A. Throws ShapeError on a dimension mismatch.
Distribution apply_channel(const Distribution& p, const Channel& a);

enum class Measure { TvL1, Kl };

std::string_view to_string(Measure m);
/// Accepts "tv_l1" and "kl". Throws DomainError otherwise.
Measure parse_measure(std::string_view name);

/// Unhalved L1 distance sum_x |p(x) - q(x)|.
double tv_l1(std::span<const double> p, std::span<const double> q);
double tv_l1(const Distribution& p, const Distribution& q);

/// D(p || q) in nats with 0 log 0 = 0; +infinity when p(x) > 0 = q(x).
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Distribution& p, const Distribution& q);

/// d(p, q) under the given measure; for Kl this is D(p || q).
double distortion(Measure m, std::span<const double> p, std::span<const double> q);
double distortion(Measure m, const Distribution& p, const Distribution& q);

/// Binary KL divergence D_b(a || b); both arguments strictly inside (0, 1).
double binary_kl(double a, double b);

/// -log sum_x sqrt(q0(x) q1(x)). Both arguments must be strictly positive
/// everywhere (DomainError otherwise).
double bhattacharyya(std::span<const double> q0, std::span<const double> q1);
double bhattacharyya(const Distribution& q0, const Distribution& q1);

/// Per-symbol tallies of an observed sequence, updated one symbol at a time.
class EmpiricalCounts {
 public:
  explicit EmpiricalCounts(std::size_t k);
  static EmpiricalCounts from_sequence(std::span<const std::size_t> symbols, std::size_t k);

  void add(std::size_t symbol);
  void reset();

  std::uint64_t n() const { return n_; }
  std::size_t alphabet_size() const { return counts_.size(); }
  std::span<const std::uint64_t> counts() const { return counts_; }

  /// Writes the empirical distribution into `out` (size K). Requires n >= 1.
  void type_into(std::span<double> out) const;
  /// Empirical distribution; EmptySequenceError when n == 0.
  Distribution type() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

/// Type of a sequence from its tallies. EmptySequenceError when n == 0,
/// ConstructionError when the counts do not sum to n.
Distribution empirical_distribution(std::span<const std::uint64_t> counts, std::uint64_t n);

/// S_ij = sum_a counts(a) log(p_i(a) / p_j(a)); signed infinities propagate.
double log_likelihood_ratio(std::span<const std::uint64_t> counts, const Distribution& p_i,
                            const Distribution& p_j);

}  // namespace advseq
