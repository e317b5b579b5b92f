#include "advseq/seqtest.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>

#include "advseq/csv.hpp"
#include "advseq/errors.hpp"

namespace advseq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kMaxDirectTerms = std::uint64_t{1} << 34;

void check_zeta(double zeta) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw DomainError("zeta must lie in (0, 1)");
}

}  // namespace

double compute_constant_c(double zeta, double abs_tol) {
  check_zeta(zeta);
  if (!(abs_tol > 0.0)) throw DomainError("compute_constant_c: tolerance must be positive");
  const double s = 1.0 - zeta;
  auto f = [s](double x) { return std::exp(-std::pow(x, s)); };
  auto df_abs = [&](double x) { return s * std::pow(x, s - 1.0) * f(x); };

  std::uint64_t n_tail = 64;
  while (df_abs(static_cast<double>(n_tail)) / 12.0 > abs_tol / 2.0) {
    n_tail *= 2;
    if (n_tail > kMaxDirectTerms) throw ResourceError("compute_constant_c: tail too slow");
  }

  long double head = 0.0L;
  for (std::uint64_t n = 1; n < n_tail; ++n) head += std::exp(-std::pow(static_cast<long double>(n), static_cast<long double>(s)));

  const double big_n = static_cast<double>(n_tail);
  // Integral of exp(-x^s) over [N, inf) = Gamma(1/s, N^s) / s.
  const double integral = boost::math::tgamma(1.0 / s, std::pow(big_n, s)) / s;
  const double tail = integral + f(big_n) / 2.0 + df_abs(big_n) / 12.0;
  return static_cast<double>(head) + tail;
}

double cached_constant_c(double zeta) {
  static std::mutex mu;
  static std::map<double, double> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(zeta);
  if (it != cache.end()) return it->second;
  const double c = compute_constant_c(zeta, kDefaultConstantTolerance);
  cache.emplace(zeta, c);
  return c;
}

ThresholdSchedule::ThresholdSchedule(double alpha, std::size_t alphabet_size,
                                     std::size_t num_hypotheses, double zeta)
    : ThresholdSchedule(alpha, alphabet_size, num_hypotheses, zeta,
                        (check_zeta(zeta), cached_constant_c(zeta))) {}

ThresholdSchedule::ThresholdSchedule(double alpha, std::size_t alphabet_size,
                                     std::size_t num_hypotheses, double zeta, double c)
    : alpha_(alpha), zeta_(zeta), c_(c), k_(alphabet_size), m_(num_hypotheses) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ThresholdSchedule: alpha outside (0, 1)");
  check_zeta(zeta);
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("ThresholdSchedule: C must be positive");
  if (k_ < 1) throw DomainError("ThresholdSchedule: alphabet size must be positive");
  if (m_ < 2) throw DomainError("ThresholdSchedule: at least two hypotheses are required");
  log_c_over_alpha_ = std::log(c_ / alpha_);
  log_m_minus_one_ = std::log(static_cast<double>(m_ - 1));
}

double ThresholdSchedule::gamma(std::uint64_t n) const {
  if (n == 0) throw DomainError("ThresholdSchedule: gamma_n needs n >= 1");
  const double nd = static_cast<double>(n);
  return log_c_over_alpha_ / nd + std::pow(nd, -zeta_) +
         (static_cast<double>(k_) * std::log(nd + 1.0) + log_m_minus_one_) / nd;
}

std::vector<double> z_statistics(const EmpiricalCounts& counts, const GameSpec& spec,
                                 const SolverOptions& opts) {
  if (counts.alphabet_size() != spec.alphabet_size()) {
    throw ShapeError("z_statistics: alphabet size mismatch");
  }
  std::vector<double> qhat(counts.alphabet_size());
  counts.type_into(qhat);
  const std::size_t m = spec.num_hypotheses();
  std::vector<double> ball_min(m);
  for (std::size_t j = 0; j < m; ++j) ball_min[j] = min_divergence_value(qhat, spec.ball(j), opts);
  std::vector<double> z(m, kInf);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) z[i] = std::min(z[i], ball_min[j]);
    }
  }
  return z;
}

AwareTest::AwareTest(const GameSpec& spec, ThresholdSchedule schedule, TestOptions opts)
    : spec_(&spec),
      schedule_(schedule),
      opts_(std::move(opts)),
      counts_(spec.alphabet_size()),
      qhat_(spec.alphabet_size()),
      ball_min_(spec.num_hypotheses()),
      z_(spec.num_hypotheses(), 0.0) {
  if (opts_.stride < 1) throw DomainError("AwareTest: stride must be >= 1");
  if (schedule_.num_hypotheses() != spec.num_hypotheses() ||
      schedule_.alphabet_size() != spec.alphabet_size()) {
    throw ShapeError("AwareTest: schedule does not match the game");
  }
}

void AwareTest::reset() {
  counts_.reset();
  std::fill(z_.begin(), z_.end(), 0.0);
  decision_.reset();
  trajectory_.clear();
}

std::optional<std::size_t> AwareTest::step(std::size_t y) {
  if (decision_) throw StateError("AwareTest: the test has already stopped");
  counts_.add(y);
  const std::uint64_t n = counts_.n();
  if (n % opts_.stride != 0) return std::nullopt;

  counts_.type_into(qhat_);
  const std::size_t m = z_.size();
  for (std::size_t j = 0; j < m; ++j) {
    ball_min_[j] = min_divergence_value(qhat_, spec_->ball(j), opts_.solver);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double z = kInf;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i && ball_min_[j] < z) z = ball_min_[j];
    }
    z_[i] = z;
  }
  const double g = schedule_.gamma(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (z_[i] >= g) {
      decision_ = i;
      break;
    }
  }
  if (opts_.record_trajectory) {
    trajectory_.push_back(TrajectoryRow{n, g, z_, decision_.has_value(), decision_});
  }
  return decision_;
}

namespace {

template <typename Test>
TestOutcome drive(Test& test, const SymbolStream& stream, std::uint64_t cap) {
  if (cap < 1) throw DomainError("test cap must be >= 1");
  TestOutcome out;
  while (test.n() < cap) {
    const auto y = stream();
    if (!y) throw StreamExhaustedError("symbol stream ended before the test stopped");
    if (const auto d = test.step(*y)) {
      out.status = TestStatus::Decided;
      out.stopping_time = test.n();
      out.decision = d;
      out.trajectory = test.trajectory();
      return out;
    }
  }
  out.status = TestStatus::TimedOut;
  out.stopping_time = test.n();
  out.trajectory = test.trajectory();
  return out;
}

}  // namespace

TestOutcome run_aware(const SymbolStream& stream, const GameSpec& spec,
                      const ThresholdSchedule& schedule, const TestOptions& opts) {
  AwareTest test(spec, schedule, opts);
  return drive(test, stream, opts.cap);
}

NonAwareTest::NonAwareTest(CommonChannelSet set, ThresholdSchedule schedule, TestOptions opts)
    : set_(std::move(set)),
      schedule_(schedule),
      opts_(std::move(opts)),
      counts_(set_.p0.size()),
      stats_(3, 0.0) {
  if (opts_.stride < 1) throw DomainError("NonAwareTest: stride must be >= 1");
  if (set_.p1.size() != set_.p0.size()) throw ShapeError("NonAwareTest: hypotheses differ in size");
  if (schedule_.num_hypotheses() != 2 || schedule_.alphabet_size() != set_.p0.size()) {
    throw ShapeError("NonAwareTest: schedule must describe a binary game on the same alphabet");
  }
}

void NonAwareTest::reset() {
  counts_.reset();
  std::fill(stats_.begin(), stats_.end(), 0.0);
  decision_.reset();
  trajectory_.clear();
}

std::optional<std::size_t> NonAwareTest::step(std::size_t y) {
  if (decision_) throw StateError("NonAwareTest: the test has already stopped");
  counts_.add(y);
  const std::uint64_t n = counts_.n();
  if (n % opts_.stride != 0) return std::nullopt;

  const Distribution qhat = counts_.type();
  const double g = schedule_.gamma(n);
  stats_[0] = min_max_divergence_over_channel(qhat, set_, opts_.solver).value;
  if (stats_[0] >= g) {
    stats_[1] = min_divergence_over_channel(qhat, set_, 0, opts_.solver).value;
    stats_[2] = min_divergence_over_channel(qhat, set_, 1, opts_.solver).value;
    // A large distance to every P1 A is evidence for hypothesis 0.
    decision_ = stats_[2] >= stats_[1] ? 0 : 1;
  }
  if (opts_.record_trajectory) {
    trajectory_.push_back(TrajectoryRow{n, g, stats_, decision_.has_value(), decision_});
  }
  return decision_;
}

TestOutcome run_nonaware(const SymbolStream& stream, const CommonChannelSet& set,
                         const ThresholdSchedule& schedule, const TestOptions& opts) {
  NonAwareTest test(set, schedule, opts);
  return drive(test, stream, opts.cap);
}

MsprtConfig::MsprtConfig(std::vector<std::vector<double>> boundary) : b_(std::move(boundary)) {
  const std::size_t m = b_.size();
  if (m < 2) throw DomainError("MsprtConfig: at least two hypotheses are required");
  for (std::size_t i = 0; i < m; ++i) {
    if (b_[i].size() != m) throw ShapeError("MsprtConfig: boundary matrix must be square");
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j ? b_[i][j] != 0.0 : !(b_[i][j] > 0.0)) {
        throw DomainError("MsprtConfig: need b(i,i) = 0 and b(i,j) > 0 off the diagonal");
      }
    }
  }
}

MsprtConfig MsprtConfig::uniform(std::size_t m, double value) {
  std::vector<std::vector<double>> b(m, std::vector<double>(m, value));
  for (std::size_t i = 0; i < m; ++i) b[i][i] = 0.0;
  return MsprtConfig(std::move(b));
}

TestOutcome run_msprt(const SymbolStream& stream, const std::vector<Distribution>& hypotheses,
                      const MsprtConfig& config, std::uint64_t cap) {
  const std::size_t m = hypotheses.size();
  if (config.size() != m) throw ShapeError("run_msprt: boundary matrix does not match hypotheses");
  if (cap < 1) throw DomainError("run_msprt: cap must be >= 1");
  const std::size_t k = hypotheses.front().size();
  for (const auto& h : hypotheses) {
    if (h.size() != k) throw ShapeError("run_msprt: hypotheses differ in alphabet size");
  }

  // llr[(i * m + j) * k + a] = log(P_i(a) / P_j(a)).
  std::vector<double> llr(m * m * k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t a = 0; a < k; ++a) {
        const double pi = hypotheses[i][a];
        const double pj = hypotheses[j][a];
        double v = 0.0;
        if (pi != pj) v = pj == 0.0 ? kInf : (pi == 0.0 ? -kInf : std::log(pi / pj));
        llr[(i * m + j) * k + a] = v;
      }
    }
  }

  std::vector<double> s(m * m, 0.0);
  TestOutcome out;
  for (std::uint64_t n = 1; n <= cap; ++n) {
    const auto y = stream();
    if (!y) throw StreamExhaustedError("symbol stream ended before the test stopped");
    if (*y >= k) throw DomainError("run_msprt: symbol outside alphabet");
    for (std::size_t ij = 0; ij < m * m; ++ij) s[ij] += llr[ij * k + *y];
    for (std::size_t i = 0; i < m; ++i) {
      bool accept = true;
      for (std::size_t j = 0; j < m && accept; ++j) {
        if (j != i && !(s[i * m + j] >= config(i, j))) accept = false;
      }
      if (accept) {
        out.status = TestStatus::Decided;
        out.stopping_time = n;
        out.decision = i;
        return out;
      }
    }
  }
  out.status = TestStatus::TimedOut;
  out.stopping_time = cap;
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          std::size_t num_statistics) {
  out << "n,gamma_n";
  for (std::size_t i = 0; i < num_statistics; ++i) out << ",Z_" << i;
  out << ",stopped,decision\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_number(r.gamma);
    for (std::size_t i = 0; i < num_statistics; ++i) {
      out << ',' << (i < r.statistics.size() ? format_number(r.statistics[i]) : std::string());
    }
    out << ',' << (r.stopped ? 1 : 0) << ',';
    if (r.decision) out << *r.decision;
    out << '\n';
  }
}

}  // namespace advseq
