#include "advseq/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "advseq/csv.hpp"
#include "advseq/errors.hpp"

namespace advseq {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t sample_index(std::span<const double> p, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (u < acc) return i;
  }
  // Rounding left the cumulative sum just below 1.
  return last;
}

std::size_t sample_through_channel(const Distribution& p, const Channel& a, Rng& rng) {
  if (a.size() != p.size()) throw ShapeError("sample_through_channel: dimension mismatch");
  const std::size_t x = sample_index(p.probs(), rng);
  return sample_index(a.row(x), rng);
}

Rng substream(std::uint64_t seed, std::uint64_t alpha_index, std::uint64_t hypothesis,
              std::uint64_t replication) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ alpha_index);
  h = splitmix64(h ^ hypothesis);
  h = splitmix64(h ^ replication);
  return Rng(h);
}

Scenario::Scenario(ScenarioConfig config) : cfg_(std::move(config)) {
  const GameSpec& spec = cfg_.spec;
  const std::size_t m = spec.num_hypotheses();
  const std::size_t k = spec.alphabet_size();
  if (cfg_.alpha_grid.empty()) throw DomainError("Scenario: alpha grid is empty");
  for (double a : cfg_.alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("Scenario: alpha values must lie in (0, 1)");
  }
  if (cfg_.replications < 1) throw DomainError("Scenario: replications must be >= 1");
  if (cfg_.cap < 1) throw DomainError("Scenario: cap must be >= 1");
  if (cfg_.stride < 1) throw DomainError("Scenario: stride must be >= 1");
  cfg_.solver.validate();

  hyps_ = cfg_.true_hypotheses;
  if (hyps_.empty()) {
    for (std::size_t i = 0; i < m; ++i) hyps_.push_back(i);
  }
  for (std::size_t h : hyps_) {
    if (h >= m) throw DomainError("Scenario: hypothesis index " + std::to_string(h) + " out of range");
  }

  eq_ = solve_aware_equilibrium(spec, cfg_.solver);

  switch (cfg_.adversary) {
    case AdversaryMode::Equilibrium:
      channels_ = eq_.witnesses;
      break;
    case AdversaryMode::Explicit:
      if (cfg_.channels.size() != m) {
        throw ShapeError("Scenario: expected " + std::to_string(m) + " adversary channels");
      }
      for (std::size_t i = 0; i < m; ++i) {
        const Channel& a = cfg_.channels[i];
        if (a.size() != k) throw ShapeError("Scenario: adversary channel has the wrong size");
        if (!spec.ball(i).contains(apply_channel(spec.hypothesis(i), a).probs())) {
          throw InfeasibleError("Scenario: adversary channel " + std::to_string(i) +
                                " exceeds the distortion budget");
        }
      }
      channels_ = cfg_.channels;
      break;
    case AdversaryMode::Common: {
      if (m != 2) throw ShapeError("Scenario: a common channel needs exactly two hypotheses");
      if (cfg_.channels.size() != 1) throw ShapeError("Scenario: expected one common channel");
      if (cfg_.channels[0].size() != k) throw ShapeError("Scenario: common channel has the wrong size");
      CommonChannelSet set{spec.hypothesis(0), spec.hypothesis(1), spec.delta(), spec.measure(),
                           spec.floor()};
      if (!set.contains(cfg_.channels[0])) {
        throw InfeasibleError("Scenario: common channel exceeds the distortion budget");
      }
      common_ = std::move(set);
      channels_.assign(m, cfg_.channels[0]);
      break;
    }
  }

  for (double a : cfg_.alpha_grid) schedules_.emplace_back(a, k, m, cfg_.zeta);
}

ReplicationResult Scenario::run_replication(std::size_t alpha_index, std::size_t hypothesis,
                                            std::uint64_t replication) const {
  if (alpha_index >= schedules_.size()) throw DomainError("run_replication: alpha index out of range");
  if (hypothesis >= cfg_.spec.num_hypotheses()) {
    throw DomainError("run_replication: hypothesis index out of range");
  }
  Rng rng = substream(cfg_.seed, alpha_index, hypothesis, replication);
  const Distribution& p = cfg_.spec.hypothesis(hypothesis);
  const Channel& a = channels_[hypothesis];
  TestOptions opts;
  opts.cap = cfg_.cap;
  opts.stride = cfg_.stride;
  opts.solver = cfg_.solver;

  ReplicationResult r;
  auto drive = [&](auto& test) {
    while (test.n() < cfg_.cap) {
      if (const auto d = test.step(sample_through_channel(p, a, rng))) {
        r.decision = d;
        break;
      }
    }
    r.stopping_time = test.n();
  };
  if (common_) {
    NonAwareTest test(*common_, schedules_[alpha_index], opts);
    drive(test);
  } else {
    AwareTest test(cfg_.spec, schedules_[alpha_index], opts);
    drive(test);
  }
  return r;
}

SimulationReport monte_carlo(const Scenario& scenario) {
  const ScenarioConfig& cfg = scenario.config();
  const std::size_t na = cfg.alpha_grid.size();
  const std::size_t nh = scenario.hypotheses().size();
  const std::uint64_t reps = cfg.replications;
  const std::size_t jobs = na * nh * reps;
  std::vector<ReplicationResult> results(jobs);

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned t) {
    try {
      for (std::size_t j = t; j < jobs; j += threads) {
        const std::size_t a = j / (nh * reps);
        const std::size_t h = (j / reps) % nh;
        const std::uint64_t r = j % reps;
        results[j] = scenario.run_replication(a, scenario.hypotheses()[h], r);
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimulationReport report;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t hi = 0; hi < nh; ++hi) {
      const std::size_t h = scenario.hypotheses()[hi];
      ReportRow row;
      row.alpha = cfg.alpha_grid[a];
      row.log_inv_alpha = -std::log(row.alpha);
      row.hypothesis = h;
      row.theoretical_exponent = scenario.equilibrium().exponents[h];
      row.replications = reps;
      std::uint64_t decided = 0;
      std::uint64_t wrong = 0;
      double sum = 0.0;
      const std::size_t base = (a * nh + hi) * reps;
      for (std::uint64_t r = 0; r < reps; ++r) {
        const ReplicationResult& rr = results[base + r];
        if (rr.timed_out()) {
          ++row.timeouts;
          continue;
        }
        ++decided;
        sum += static_cast<double>(rr.stopping_time);
        if (*rr.decision != h) ++wrong;
      }
      if (decided == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean_t = row.std_t = row.stderr_t = row.payoff_estimate = nan;
      } else {
        row.mean_t = sum / static_cast<double>(decided);
        double ss = 0.0;
        for (std::uint64_t r = 0; r < reps; ++r) {
          const ReplicationResult& rr = results[base + r];
          if (rr.timed_out()) continue;
          const double d = static_cast<double>(rr.stopping_time) - row.mean_t;
          ss += d * d;
        }
        row.std_t = decided > 1 ? std::sqrt(ss / static_cast<double>(decided - 1)) : 0.0;
        row.stderr_t = row.std_t / std::sqrt(static_cast<double>(decided));
        row.payoff_estimate = row.log_inv_alpha / row.mean_t;
        row.error_rate = static_cast<double>(wrong) / static_cast<double>(decided);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

std::vector<ReportRow> alpha_sweep(const Scenario& scenario) { return monte_carlo(scenario).rows; }

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "alpha,log_inv_alpha,hypothesis,mean_T,std_T,stderr_T,payoff_estimate,"
         "theoretical_exponent,error_rate,timeouts,replications\n";
  for (const auto& r : rows) {
    out << format_number(r.alpha) << ',' << format_number(r.log_inv_alpha) << ',' << r.hypothesis
        << ',' << format_number(r.mean_t) << ',' << format_number(r.std_t) << ','
        << format_number(r.stderr_t) << ',' << format_number(r.payoff_estimate) << ','
        << format_number(r.theoretical_exponent) << ',' << format_number(r.error_rate) << ','
        << r.timeouts << ',' << r.replications << '\n';
  }
}

}  // namespace advseq
