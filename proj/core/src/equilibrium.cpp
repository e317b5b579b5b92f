#include "advseq/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "advseq/errors.hpp"

namespace advseq {

GameSpec GameSpec::create(std::vector<Distribution> hypotheses, double delta, Measure measure,
                          std::vector<double> lambda, double floor, double separation,
                          const SolverOptions& opts) {
  const std::size_t m = hypotheses.size();
  if (m < 2) throw DomainError("GameSpec: at least two hypotheses are required");
  const std::size_t k = hypotheses.front().size();
  for (const auto& h : hypotheses) {
    if (h.size() != k) throw ShapeError("GameSpec: hypotheses differ in alphabet size");
  }
  if (lambda.size() != m) {
    throw ShapeError("GameSpec: expected " + std::to_string(m) + " weights, got " +
                     std::to_string(lambda.size()));
  }
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("GameSpec: weights must be positive");
  }
  if (!(separation > 0.0)) throw DomainError("GameSpec: separation must be positive");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (hypotheses[i].max_abs_diff(hypotheses[j]) <= 1e-9) {
        throw DomainError("GameSpec: hypotheses " + std::to_string(i) + " and " +
                          std::to_string(j) + " coincide");
      }
    }
  }

  GameSpec spec;
  spec.delta_ = delta;
  spec.measure_ = measure;
  spec.lambda_ = std::move(lambda);
  spec.floor_ = floor;
  spec.separation_ = separation;
  spec.balls_.reserve(m);
  for (const auto& h : hypotheses) spec.balls_.emplace_back(h, delta, measure, floor);
  spec.hypotheses_ = std::move(hypotheses);

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double v = pairwise_min_divergence(spec.balls_[i], spec.balls_[j], opts).value;
      if (!(v >= separation)) {
        throw DegenerateGameError("GameSpec: balls " + std::to_string(i) + " and " +
                                  std::to_string(j) + " are not separated (min divergence " +
                                  std::to_string(v) + ")");
      }
    }
  }
  return spec;
}

EquilibriumSolution solve_aware_equilibrium(const GameSpec& spec, const SolverOptions& opts) {
  const std::size_t m = spec.num_hypotheses();
  EquilibriumSolution sol;
  sol.divergence_matrix.assign(m, std::vector<double>(m, 0.0));
  sol.exponents.resize(m);
  sol.closest_rival.resize(m);

  for (std::size_t i = 0; i < m; ++i) {
    std::optional<PairMinimum> best;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      PairMinimum pm = pairwise_min_divergence(spec.ball(i), spec.ball(j), opts);
      sol.converged = sol.converged && pm.converged;
      if (!best || pm.value < best->value) {
        best = std::move(pm);
        best_j = j;
      }
    }
    if (!(best->value >= spec.separation())) {
      throw DegenerateGameError("solve_aware_equilibrium: hypothesis " + std::to_string(i) +
                                " is not separated from its rivals");
    }
    sol.q_star.push_back(best->q_i);
    sol.closest_rival[i] = best_j;
  }

  for (std::size_t i = 0; i < m; ++i) {
    double e = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const BallMinimum bm = min_divergence_to_ball(sol.q_star[i], spec.ball(j), opts);
      sol.converged = sol.converged && bm.converged;
      sol.divergence_matrix[i][j] = bm.value;
      if (bm.value < e) {
        e = bm.value;
        sol.closest_rival[i] = j;
      }
    }
    sol.exponents[i] = e;
    sol.witnesses.push_back(channel_from_output(spec.hypothesis(i), sol.q_star[i]));
  }
  sol.payoff = equilibrium_payoff(sol, spec.lambda());
  return sol;
}

double equilibrium_payoff(const EquilibriumSolution& solution, const std::vector<double>& lambda) {
  if (lambda.size() != solution.exponents.size()) {
    throw DomainError("equilibrium_payoff: weight count does not match the hypotheses");
  }
  double u = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) throw DomainError("equilibrium_payoff: weights must be positive");
    u += lambda[i] * solution.exponents[i];
  }
  return u;
}

double compute_b_star(const GameSpec& spec, const SolverOptions& opts) {
  double b = std::numeric_limits<double>::infinity();
  const std::size_t m = spec.num_hypotheses();
  // B is symmetric, so unordered pairs suffice.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      b = std::min(b, pairwise_min_bhattacharyya(spec.ball(i), spec.ball(j), opts).value);
    }
  }
  return b;
}

double nonaware_achievable(const CommonChannelSet& set, const Channel& a_tilde, double lambda,
                           const SolverOptions& opts) {
  if (!set.contains(a_tilde)) {
    throw InfeasibleError("nonaware_achievable: channel is outside the common feasible set");
  }
  const Distribution q0 = apply_channel(set.p0, a_tilde);
  const Distribution q1 = apply_channel(set.p1, a_tilde);
  return min_max_divergence_over_channel(q0, set, opts).value +
         lambda * min_max_divergence_over_channel(q1, set, opts).value;
}

double nonaware_converse(const Distribution& p0, const Distribution& p1, const Channel& a_tilde,
                         double lambda) {
  const Distribution q0 = apply_channel(p0, a_tilde);
  const Distribution q1 = apply_channel(p1, a_tilde);
  return kl_divergence(q0, q1) + lambda * kl_divergence(q1, q0);
}

NonAwareBounds nonaware_bounds(const CommonChannelSet& set, const Channel& a_tilde, double lambda,
                               const SolverOptions& opts) {
  return NonAwareBounds{nonaware_achievable(set, a_tilde, lambda, opts),
                        nonaware_converse(set.p0, set.p1, a_tilde, lambda)};
}

namespace {

// Free parametrization of a channel: entries (l, j) for j < K-1.
std::optional<Channel> channel_from_free(std::size_t k, const std::vector<double>& v) {
  std::vector<double> a(k * k);
  for (std::size_t l = 0; l < k; ++l) {
    double rest = 1.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double e = v[l * (k - 1) + j];
      if (e < 0.0 || e > 1.0) return std::nullopt;
      a[l * k + j] = e;
      rest -= e;
    }
    if (rest < 0.0) return std::nullopt;
    a[l * k + k - 1] = rest;
  }
  return Channel(k, std::move(a));
}

std::vector<double> free_from_channel(const Channel& a) {
  const std::size_t k = a.size();
  std::vector<double> v;
  v.reserve(k * (k - 1));
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t j = 0; j + 1 < k; ++j) v.push_back(a(l, j));
  }
  return v;
}

// Pattern directions: unit coordinates and pairwise diagonals, both signs.
std::vector<std::vector<double>> pattern_directions(std::size_t n) {
  std::vector<std::vector<double>> dirs;
  for (std::size_t a = 0; a < n; ++a) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> d(n, 0.0);
      d[a] = s;
      dirs.push_back(std::move(d));
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (double sa : {1.0, -1.0}) {
        for (double sb : {1.0, -1.0}) {
          std::vector<double> d(n, 0.0);
          d[a] = sa;
          d[b] = sb;
          dirs.push_back(std::move(d));
        }
      }
    }
  }
  return dirs;
}

}  // namespace

NonAwareAdversary solve_nonaware_adversary(const CommonChannelSet& set, double lambda,
                                           const SolverOptions& opts,
                                           const MultistartOptions& search) {
  const std::size_t k = set.p0.size();
  const Channel id = Channel::identity(k);
  int evaluations = 0;
  auto objective = [&](const Channel& a) {
    ++evaluations;
    return nonaware_achievable(set, a, lambda, opts);
  };
  if (set.delta == 0.0) {
    return NonAwareAdversary{id, objective(id), false, evaluations};
  }

  // Starting points: the identity, identity/uniform mixtures, random channels
  // shrunk toward the identity until feasible.
  std::vector<Channel> starts{id};
  std::mt19937_64 rng(search.seed);
  std::exponential_distribution<double> expo(1.0);
  auto shrink_into_set = [&](const std::vector<double>& r) -> std::optional<Channel> {
    for (double theta = 1.0; theta > 1e-12; theta *= 0.5) {
      std::vector<double> a(k * k);
      for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t j = 0; j < k; ++j) {
          a[l * k + j] = theta * r[l * k + j] + (l == j ? 1.0 - theta : 0.0);
        }
      }
      Channel c(k, std::move(a));
      if (set.contains(c, 0.0)) return c;
    }
    return std::nullopt;
  };
  {
    std::vector<double> uniform(k * k, 1.0 / static_cast<double>(k));
    if (auto c = shrink_into_set(uniform)) starts.push_back(*c);
  }
  int attempts = 0;
  while (static_cast<int>(starts.size()) < search.starts && attempts < 100 * search.starts) {
    ++attempts;
    std::vector<double> r(k * k);
    for (std::size_t l = 0; l < k; ++l) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += r[l * k + j] = expo(rng);
      for (std::size_t j = 0; j < k; ++j) r[l * k + j] /= s;
    }
    if (auto c = shrink_into_set(r)) starts.push_back(*c);
  }

  const auto dirs = pattern_directions(k * (k - 1));
  Channel best = id;
  double best_v = std::numeric_limits<double>::infinity();
  for (const Channel& s : starts) {
    std::vector<double> v = free_from_channel(s);
    double fv = objective(s);
    for (double h = search.initial_step; h >= search.final_step;) {
      bool improved = false;
      for (const auto& d : dirs) {
        std::vector<double> cand(v);
        for (std::size_t a = 0; a < cand.size(); ++a) cand[a] += h * d[a];
        const auto c = channel_from_free(k, cand);
        if (!c || !set.contains(*c, 0.0)) continue;
        const double fc = objective(*c);
        if (fc < fv) {
          v = std::move(cand);
          fv = fc;
          improved = true;
          break;
        }
      }
      if (!improved) h *= 0.5;
    }
    if (fv < best_v) {
      best_v = fv;
      best = *channel_from_free(k, v);
    }
  }
  return NonAwareAdversary{best, best_v, true, evaluations};
}

}  // namespace advseq
