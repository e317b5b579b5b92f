#include "advseq/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "advseq/errors.hpp"

namespace advseq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

// Validates a probability vector and rescales it to sum to one.
void validate_and_rescale(std::span<double> p, const char* what) {
  if (p.empty()) throw ConstructionError(std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConstructionError(std::string(what) + ": entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kAcceptSlack) {
    throw ConstructionError(std::string(what) + ": entries sum to " + std::to_string(sum) +
                            ", not 1");
  }
  if (sum != 1.0) {
    for (double& v : p) v /= sum;
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
  validate_and_rescale(p_, "Distribution");
}

Distribution Distribution::uniform(std::size_t k) {
  if (k == 0) throw ConstructionError("Distribution: alphabet size must be positive");
  return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Distribution Distribution::point_mass(std::size_t k, std::size_t symbol) {
  if (symbol >= k) throw ConstructionError("Distribution: symbol outside alphabet");
  std::vector<double> p(k, 0.0);
  p[symbol] = 1.0;
  return Distribution(std::move(p));
}

bool Distribution::has_full_support(double floor) const {
  return std::all_of(p_.begin(), p_.end(), [floor](double v) { return v >= floor; });
}

double Distribution::max_abs_diff(const Distribution& other) const {
  check_same_size(size(), other.size(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) m = std::max(m, std::abs(p_[i] - other.p_[i]));
  return m;
}

Distribution normalize(std::span<const double> raw) {
  if (raw.empty()) throw ConstructionError("normalize: empty input");
  double sum = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConstructionError("normalize: entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (sum <= 0.0) throw ConstructionError("normalize: all entries are zero");
  std::vector<double> p(raw.begin(), raw.end());
  for (double& v : p) v /= sum;
  return Distribution(std::move(p));
}

Channel::Channel(std::size_t k, std::vector<double> row_major) : k_(k), a_(std::move(row_major)) {
  if (k_ == 0) throw ConstructionError("Channel: alphabet size must be positive");
  if (a_.size() != k_ * k_) {
    throw ShapeError("Channel: expected " + std::to_string(k_ * k_) + " entries, got " +
                     std::to_string(a_.size()));
  }
  for (std::size_t l = 0; l < k_; ++l) {
    validate_and_rescale(std::span<double>(a_).subspan(l * k_, k_), "Channel row");
  }
}

Channel Channel::identity(std::size_t k) {
  std::vector<double> a(k * k, 0.0);
  for (std::size_t l = 0; l < k; ++l) a[l * k + l] = 1.0;
  return Channel(k, std::move(a));
}

Channel Channel::rank_one(const Distribution& row) {
  const std::size_t k = row.size();
  std::vector<double> a;
  a.reserve(k * k);
  for (std::size_t l = 0; l < k; ++l) a.insert(a.end(), row.probs().begin(), row.probs().end());
  return Channel(k, std::move(a));
}

Distribution apply_channel(const Distribution& p, const Channel& a) {
  check_same_size(p.size(), a.size(), "apply_channel");
  const std::size_t k = p.size();
  std::vector<double> out(k, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    const double pl = p[l];
    if (pl == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) out[j] += pl * a(l, j);
  }
  return Distribution(std::move(out));
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::TvL1:
      return "tv_l1";
    case Measure::Kl:
      return "kl";
  }
  return "unknown";
}

Measure parse_measure(std::string_view name) {
  if (name == "tv_l1") return Measure::TvL1;
  if (name == "kl") return Measure::Kl;
  throw DomainError("unsupported distortion measure '" + std::string(name) +
                    "' (expected tv_l1 or kl)");
}

double tv_l1(std::span<const double> p, std::span<const double> q) {
  check_same_size(p.size(), q.size(), "tv_l1");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

double tv_l1(const Distribution& p, const Distribution& q) { return tv_l1(p.probs(), q.probs()); }

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_same_size(p.size(), q.size(), "kl_divergence");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    s += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value when p and q nearly coincide.
  return std::max(s, 0.0);
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  return kl_divergence(p.probs(), q.probs());
}

double distortion(Measure m, std::span<const double> p, std::span<const double> q) {
  return m == Measure::TvL1 ? tv_l1(p, q) : kl_divergence(p, q);
}

double distortion(Measure m, const Distribution& p, const Distribution& q) {
  return distortion(m, p.probs(), q.probs());
}

double binary_kl(double a, double b) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
    throw DomainError("binary_kl: arguments must lie strictly inside (0, 1)");
  }
  return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

double bhattacharyya(std::span<const double> q0, std::span<const double> q1) {
  check_same_size(q0.size(), q1.size(), "bhattacharyya");
  double bc = 0.0;
  for (std::size_t i = 0; i < q0.size(); ++i) {
    if (!(q0[i] > 0.0) || !(q1[i] > 0.0)) {
      throw DomainError("bhattacharyya: both distributions need full support");
    }
    bc += std::sqrt(q0[i] * q1[i]);
  }
  return std::max(-std::log(bc), 0.0);
}

double bhattacharyya(const Distribution& q0, const Distribution& q1) {
  return bhattacharyya(q0.probs(), q1.probs());
}

EmpiricalCounts::EmpiricalCounts(std::size_t k) : counts_(k, 0) {
  if (k == 0) throw ConstructionError("EmpiricalCounts: alphabet size must be positive");
}

EmpiricalCounts EmpiricalCounts::from_sequence(std::span<const std::size_t> symbols,
                                               std::size_t k) {
  EmpiricalCounts c(k);
  for (std::size_t s : symbols) c.add(s);
  return c;
}

void EmpiricalCounts::add(std::size_t symbol) {
  if (symbol >= counts_.size()) throw DomainError("EmpiricalCounts: symbol outside alphabet");
  ++counts_[symbol];
  ++n_;
}

void EmpiricalCounts::reset() {
  std::fill(counts_.begin(), counts_.end(), 0);
  n_ = 0;
}

void EmpiricalCounts::type_into(std::span<double> out) const {
  if (n_ == 0) throw EmptySequenceError("empirical type of an empty sequence");
  const double inv = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = static_cast<double>(counts_[i]) * inv;
}

Distribution EmpiricalCounts::type() const {
  return empirical_distribution(counts_, n_);
}

Distribution empirical_distribution(std::span<const std::uint64_t> counts, std::uint64_t n) {
  if (n == 0) throw EmptySequenceError("empirical type of an empty sequence");
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total != n) throw ConstructionError("empirical_distribution: counts do not sum to n");
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return Distribution(std::move(p));
}

double log_likelihood_ratio(std::span<const std::uint64_t> counts, const Distribution& p_i,
                            const Distribution& p_j) {
  check_same_size(counts.size(), p_i.size(), "log_likelihood_ratio");
  check_same_size(counts.size(), p_j.size(), "log_likelihood_ratio");
  double s = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0 || p_i[a] == p_j[a]) continue;
    if (p_j[a] == 0.0) {
      s += kInf;
    } else if (p_i[a] == 0.0) {
      s -= kInf;
    } else {
      s += static_cast<double>(counts[a]) * std::log(p_i[a] / p_j[a]);
    }
  }
  return s;
}

}  // namespace advseq
