#include "advseq/divopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "advseq/errors.hpp"
#include "barrier.hpp"
#include "pgd.hpp"

namespace advseq {
namespace {

constexpr int kBisectionSteps = 200;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Root of a nonincreasing function on [lo, hi] with f(lo) >= target >= f(hi);
// returns the endpoint on the f <= target side.
template <typename F>
double bisect_down(F&& f, double lo, double hi, double target) {
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Pushes the rounding residual of a near-normalized vector onto its largest
// entry so the floor on the other entries is left untouched.
void settle_sum(std::span<double> q) {
  double s = 0.0;
  for (double v : q) s += v;
  auto it = std::max_element(q.begin(), q.end());
  *it += 1.0 - s;
}

Distribution to_distribution(std::span<const double> q) {
  return Distribution(std::vector<double>(q.begin(), q.end()));
}

// min over the ball of D(w || q) from the KKT conditions. For multipliers
// nu (sum) and mu (distortion) each coordinate has a closed-form minimizer:
//   KL: q = (w + mu p) / nu
//   TV: q = w / (nu + mu) above p, w / (nu - mu) below p, else p
// clamped to the floor. nu is set by bisection on the sum, mu on the radius.
std::vector<double> dual_ball_minimum(std::span<const double> w, const DistortionBall& ball) {
  const auto p = ball.center().probs();
  const std::size_t k = p.size();
  const double floor = ball.floor();
  const bool tv = ball.measure() == Measure::TvL1;
  std::vector<double> q(k);
  if (ball.radius() == 0.0) {
    std::copy(p.begin(), p.end(), q.begin());
    return q;
  }

  auto fill = [&](double nu, double mu) {
    double s = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      double v;
      if (tv) {
        const double up = nu + mu > 0.0 ? w[x] / (nu + mu) : kInf;
        const double down = nu - mu > 0.0 ? w[x] / (nu - mu) : kInf;
        v = up > p[x] ? up : (down < p[x] ? down : p[x]);
      } else {
        v = (w[x] + mu * p[x]) / nu;
      }
      q[x] = std::max(floor, v);
      s += q[x];
    }
    return s;
  };
  auto solve_sum = [&](double mu) {
    // The sum is nonincreasing in nu and exceeds 1 as nu approaches the pole.
    const double lo = tv ? -mu : 0.0;
    double hi = std::max(1.0, 2.0 * mu + 1.0);
    while (fill(hi, mu) > 1.0 && hi < 1e300) hi *= 2.0;
    const double nu = bisect_down([&](double v) { return v <= lo ? kInf : fill(v, mu); }, lo, hi, 1.0);
    const double s = fill(nu, mu);
    for (double& v : q) v /= s;
    settle_sum(q);
    return distortion(ball.measure(), p, q);
  };

  if (solve_sum(0.0) <= ball.radius()) return q;
  double mu_hi = 1.0;
  while (solve_sum(mu_hi) > ball.radius() && mu_hi < 1e300) mu_hi *= 2.0;
  const double mu = bisect_down(solve_sum, 0.0, mu_hi, ball.radius());
  solve_sum(mu);
  return q;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tolerance > 0.0)) throw DomainError("SolverOptions: tolerance must be positive");
  if (max_iterations < 1) throw DomainError("SolverOptions: max_iterations must be >= 1");
  if (patience < 1) throw DomainError("SolverOptions: patience must be >= 1");
  if (!(armijo > 0.0 && armijo < 1.0)) throw DomainError("SolverOptions: armijo outside (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw DomainError("SolverOptions: backtrack outside (0, 1)");
  }
}

DistortionBall::DistortionBall(Distribution center, double radius, Measure measure, double floor)
    : center_(std::move(center)), radius_(radius), measure_(measure), floor_(floor) {
  const double k = static_cast<double>(center_.size());
  if (!(radius_ >= 0.0) || !std::isfinite(radius_)) {
    throw DomainError("DistortionBall: radius must be finite and nonnegative");
  }
  if (!(floor_ >= 0.0) || floor_ * k >= 0.5) {
    throw DomainError("DistortionBall: support floor must satisfy 0 <= floor < 1/(2K)");
  }
  if (!center_.has_full_support(floor_)) {
    throw InfeasibleError("DistortionBall: center has an entry below the support floor");
  }
  if (center_.size() == 2) {
    const double p = center_[0];
    if (measure_ == Measure::TvL1) {
      interval_ = {std::max(floor_, p - radius_ / 2.0), std::min(1.0 - floor_, p + radius_ / 2.0)};
    } else {
      auto d = [&](double t) {
        const double q[2] = {t, 1.0 - t};
        return kl_divergence(center_.probs(), q);
      };
      double lo = floor_;
      if (d(lo) > radius_) lo = bisect_down([&](double t) { return d(t); }, floor_, p, radius_);
      double hi = 1.0 - floor_;
      if (d(hi) > radius_) {
        hi = -bisect_down([&](double t) { return d(-t); }, -(1.0 - floor_), -p, radius_);
      }
      interval_ = {std::min(lo, p), std::max(hi, p)};
    }
  }
}

double DistortionBall::distortion_of(std::span<const double> q) const {
  return distortion(measure_, center_.probs(), q);
}

bool DistortionBall::contains(std::span<const double> q, double slack) const {
  if (q.size() != size()) return false;
  double s = 0.0;
  for (double v : q) {
    if (v < floor_ * (1.0 - 1e-12)) return false;
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12 * static_cast<double>(q.size()) + 1e-15) return false;
  return distortion_of(q) <= radius_ + slack;
}

std::pair<double, double> DistortionBall::interval() const {
  if (size() != 2) throw ShapeError("DistortionBall::interval: alphabet size must be 2");
  return interval_;
}

void DistortionBall::project(std::span<const double> y, std::span<double> out) const {
  if (y.size() != size() || out.size() != size()) throw ShapeError("DistortionBall::project");
  if (radius_ == 0.0) {
    std::copy(center_.probs().begin(), center_.probs().end(), out.begin());
    return;
  }
  if (size() == 2) {
    const double t = std::clamp(0.5 * (y[0] - y[1] + 1.0), interval_.first, interval_.second);
    out[0] = t;
    out[1] = 1.0 - t;
    return;
  }
  if (measure_ == Measure::TvL1) {
    project_tv(y, out);
  } else {
    project_kl(y, out);
  }
}

// Per-coordinate minimizer of 1/2 (q - y)^2 + nu q + mu |q - p| over q >= floor,
// with nu set by bisection so the entries sum to one and mu so the L1
// constraint holds.
void DistortionBall::project_tv(std::span<const double> y, std::span<double> out) const {
  const auto p = center_.probs();
  const std::size_t k = size();
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());

  auto fill = [&](double nu, double mu) {
    double s = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      const double z = y[x] - nu - p[x];
      const double shrunk = z > mu ? z - mu : (z < -mu ? z + mu : 0.0);
      out[x] = std::max(floor_, p[x] + shrunk);
      s += out[x];
    }
    return s;
  };
  auto solve_sum = [&](double mu) {
    const double nu = bisect_down([&](double v) { return fill(v, mu); }, *ymin - mu - 1.0,
                                  *ymax + mu + 1.0, 1.0);
    fill(nu, mu);
    settle_sum(out);
    return tv_l1(p, out);
  };

  if (solve_sum(0.0) <= radius_) return;
  double mu_hi = 1.0;
  while (solve_sum(mu_hi) > radius_) mu_hi *= 2.0;
  const double mu = bisect_down(solve_sum, 0.0, mu_hi, radius_);
  solve_sum(mu);
}

// Same scheme with the KL sublevel set: the stationarity condition
// q - y + nu - mu p / q = 0 gives q in closed form for fixed (nu, mu).
void DistortionBall::project_kl(std::span<const double> y, std::span<double> out) const {
  const auto p = center_.probs();
  const std::size_t k = size();
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());

  auto fill = [&](double nu, double mu) {
    double s = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
      const double u = y[x] - nu;
      const double q = mu > 0.0 ? 0.5 * (u + std::sqrt(u * u + 4.0 * mu * p[x])) : u;
      out[x] = std::max(floor_, q);
      s += out[x];
    }
    return s;
  };
  auto solve_sum = [&](double mu) {
    const double nu = bisect_down([&](double v) { return fill(v, mu); }, *ymin - 1.0,
                                  *ymax + 2.0 * mu + 1.0, 1.0);
    fill(nu, mu);
    settle_sum(out);
    return kl_divergence(p, out);
  };

  if (solve_sum(0.0) <= radius_) return;
  double mu_hi = 1.0;
  while (solve_sum(mu_hi) > radius_) mu_hi *= 2.0;
  const double mu = bisect_down(solve_sum, 0.0, mu_hi, radius_);
  solve_sum(mu);
}

Channel channel_from_output(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw ShapeError("channel_from_output: size mismatch");
  return Channel::rank_one(q);
}

double min_divergence_value(std::span<const double> qhat, const DistortionBall& ball,
                            const SolverOptions& opts) {
  if (qhat.size() != ball.size()) throw ShapeError("min_divergence_to_ball: size mismatch");
  if (ball.size() == 2) {
    // D(qhat || (t, 1-t)) is convex in t with its minimum at t = qhat[0].
    const auto [lo, hi] = ball.interval();
    if (qhat[0] >= lo && qhat[0] <= hi && qhat[1] >= ball.floor()) return 0.0;
    const double t = std::clamp(qhat[0], lo, hi);
    const double q[2] = {t, 1.0 - t};
    return kl_divergence(qhat, q);
  }
  return min_divergence_to_ball(to_distribution(qhat), ball, opts).value;
}

BallMinimum min_divergence_to_ball(const Distribution& qhat, const DistortionBall& ball,
                                   const SolverOptions& opts) {
  opts.validate();
  if (qhat.size() != ball.size()) throw ShapeError("min_divergence_to_ball: size mismatch");
  if (ball.size() == 2) {
    const auto [lo, hi] = ball.interval();
    if (qhat[0] >= lo && qhat[0] <= hi && qhat[1] >= ball.floor()) {
      return BallMinimum{0.0, qhat, true, 0};
    }
    const double t = std::clamp(qhat[0], lo, hi);
    Distribution q({t, 1.0 - t});
    const double v = kl_divergence(qhat, q);
    return BallMinimum{v, std::move(q), true, 0};
  }
  if (ball.contains(qhat.probs(), 0.0)) return BallMinimum{0.0, qhat, true, 0};

  std::vector<double> q = dual_ball_minimum(qhat.probs(), ball);
  const double v = kl_divergence(qhat.probs(), q);
  return BallMinimum{v, Distribution(std::move(q)), true, 0};
}

PairMinimum pairwise_min_divergence(const DistortionBall& ball_i, const DistortionBall& ball_j,
                                    const SolverOptions& opts) {
  opts.validate();
  if (ball_i.size() != ball_j.size()) throw ShapeError("pairwise_min_divergence: size mismatch");
  const std::size_t k = ball_i.size();

  auto f = [k](std::span<const double> x) {
    return kl_divergence(x.first(k), x.subspan(k, k));
  };
  auto grad = [k](std::span<const double> x, std::span<double> g) {
    for (std::size_t a = 0; a < k; ++a) {
      const double qi = x[a];
      const double qj = x[k + a];
      g[a] = std::log(qi / qj) + 1.0;
      g[k + a] = -qi / qj;
    }
  };
  auto proj = [&](std::span<const double> y, std::span<double> out) {
    ball_i.project(y.first(k), out.first(k));
    ball_j.project(y.subspan(k, k), out.subspan(k, k));
  };
  std::vector<double> x0(ball_i.center().probs().begin(), ball_i.center().probs().end());
  x0.insert(x0.end(), ball_j.center().probs().begin(), ball_j.center().probs().end());

  auto res = detail::projected_gradient(f, grad, proj, x0, opts);
  const std::span<const double> x(res.x);
  return PairMinimum{res.value, to_distribution(x.first(k)), to_distribution(x.subspan(k, k)),
                     res.converged, res.iterations};
}

PairMinimum pairwise_min_bhattacharyya(const DistortionBall& ball_i,
                                       const DistortionBall& ball_j,
                                       const SolverOptions& opts) {
  opts.validate();
  if (ball_i.size() != ball_j.size()) {
    throw ShapeError("pairwise_min_bhattacharyya: size mismatch");
  }
  const std::size_t k = ball_i.size();

  auto f = [k](std::span<const double> x) { return bhattacharyya(x.first(k), x.subspan(k, k)); };
  auto grad = [k](std::span<const double> x, std::span<double> g) {
    double bc = 0.0;
    for (std::size_t a = 0; a < k; ++a) bc += std::sqrt(x[a] * x[k + a]);
    for (std::size_t a = 0; a < k; ++a) {
      const double r = std::sqrt(x[k + a] / x[a]);
      g[a] = -0.5 * r / bc;
      g[k + a] = -0.5 / (r * bc);
    }
  };
  auto proj = [&](std::span<const double> y, std::span<double> out) {
    ball_i.project(y.first(k), out.first(k));
    ball_j.project(y.subspan(k, k), out.subspan(k, k));
  };
  std::vector<double> x0(ball_i.center().probs().begin(), ball_i.center().probs().end());
  x0.insert(x0.end(), ball_j.center().probs().begin(), ball_j.center().probs().end());

  auto res = detail::projected_gradient(f, grad, proj, x0, opts);
  const std::span<const double> x(res.x);
  return PairMinimum{res.value, to_distribution(x.first(k)), to_distribution(x.subspan(k, k)),
                     res.converged, res.iterations};
}

bool CommonChannelSet::contains(const Channel& a, double slack) const {
  if (a.size() != p0.size() || p1.size() != p0.size()) return false;
  for (const auto* p : {&p0, &p1}) {
    const Distribution out = apply_channel(*p, a);
    if (!out.has_full_support(floor * (1.0 - 1e-12))) return false;
    if (distortion(measure, *p, out) > delta + slack) return false;
  }
  return true;
}

namespace {

// Epigraph program over the free channel entries a(l, j), j < K-1 (the last
// column is 1 - sum of the others), an epigraph variable t, and for the L1
// measure one slack per (hypothesis, symbol).
ChannelMinimum solve_common_channel(const Distribution& qhat, const CommonChannelSet& set,
                                    const std::vector<int>& targets, const SolverOptions& opts) {
  opts.validate();
  const std::size_t k = set.p0.size();
  if (qhat.size() != k || set.p1.size() != k) {
    throw ShapeError("common-channel solve: size mismatch");
  }
  if (!(set.delta >= 0.0)) throw DomainError("common-channel solve: delta must be nonnegative");
  const Distribution* ps[2] = {&set.p0, &set.p1};

  auto evaluate = [&](const Channel& a) {
    double v = 0.0;
    for (int t : targets) v = std::max(v, kl_divergence(qhat, apply_channel(*ps[t], a)));
    return v;
  };

  // Strictly interior start: a mixture of the identity and the uniform channel.
  const std::size_t kk = k * k;
  auto mixture = [&](double theta) {
    std::vector<double> a(kk, theta / static_cast<double>(k));
    for (std::size_t l = 0; l < k; ++l) a[l * k + l] += 1.0 - theta;
    return Channel(k, std::move(a));
  };
  double theta = 0.5;
  auto interior = [&](double th) {
    const Channel a = mixture(th);
    for (const auto* p : ps) {
      const Distribution out = apply_channel(*p, a);
      if (distortion(set.measure, *p, out) >= 0.5 * set.delta) return false;
      for (double v : out.probs()) {
        if (v <= set.floor) return false;
      }
    }
    return true;
  };
  int halvings = 0;
  while (!interior(theta) && halvings < 80) {
    theta *= 0.5;
    ++halvings;
  }
  if (set.delta == 0.0 || !interior(theta)) {
    // The identity is the only generic feasible point left.
    const Channel id = Channel::identity(k);
    return ChannelMinimum{evaluate(id), id, set.delta == 0.0, 0};
  }

  const bool tv = set.measure == Measure::TvL1;
  const Eigen::Index n_a = static_cast<Eigen::Index>(k * (k - 1));
  const Eigen::Index idx_t = n_a;
  const Eigen::Index idx_s = n_a + 1;
  const Eigen::Index n = idx_s + (tv ? static_cast<Eigen::Index>(2 * k) : 0);
  const Eigen::Index kk_i = static_cast<Eigen::Index>(k);
  auto var = [k](std::size_t l, std::size_t j) { return static_cast<Eigen::Index>(l * (k - 1) + j); };

  // Output map r = J x + e for input distribution p.
  auto output_map = [&](const Distribution& p, Eigen::MatrixXd& J, Eigen::VectorXd& e) {
    J.setZero(kk_i, n);
    e.setZero(kk_i);
    e[kk_i - 1] = 1.0;
    for (std::size_t l = 0; l < k; ++l) {
      for (std::size_t j = 0; j + 1 < k; ++j) {
        J(static_cast<Eigen::Index>(j), var(l, j)) = p[l];
        J(kk_i - 1, var(l, j)) = -p[l];
      }
    }
  };
  Eigen::MatrixXd J[2];
  Eigen::VectorXd e;
  output_map(set.p0, J[0], e);
  output_map(set.p1, J[1], e);

  detail::BarrierProgram prog;
  prog.c = Eigen::VectorXd::Zero(n);
  prog.c[idx_t] = 1.0;

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> offsets;
  auto add_linear = [&](Eigen::RowVectorXd row, double off) {
    rows.push_back(std::move(row));
    offsets.push_back(off);
  };
  // Channel entries stay nonnegative.
  for (std::size_t l = 0; l < k; ++l) {
    Eigen::RowVectorXd last = Eigen::RowVectorXd::Zero(n);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r[var(l, j)] = -1.0;
      add_linear(r, 0.0);
      last[var(l, j)] = 1.0;
    }
    add_linear(last, -1.0);
  }
  for (int h = 0; h < 2; ++h) {
    const Distribution& p = *ps[h];
    // Output floor: floor - r(x) <= 0.
    for (Eigen::Index x = 0; x < kk_i; ++x) add_linear(-J[h].row(x), set.floor - e[x]);
    if (tv) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(n);
      for (Eigen::Index x = 0; x < kk_i; ++x) {
        const Eigen::Index s = idx_s + h * kk_i + x;
        const double off = e[x] - p[static_cast<std::size_t>(x)];
        Eigen::RowVectorXd up = J[h].row(x);
        up[s] = -1.0;
        add_linear(up, off);
        Eigen::RowVectorXd down = -J[h].row(x);
        down[s] = -1.0;
        add_linear(down, -off);
        sum[s] = 1.0;
      }
      add_linear(sum, -set.delta);
    } else {
      detail::KlConstraint kc;
      kc.J = J[h];
      kc.e = e;
      kc.w = Eigen::Map<const Eigen::VectorXd>(p.probs().data(), kk_i);
      kc.a = Eigen::VectorXd::Zero(n);
      kc.b = -set.delta;
      prog.nonlinear.push_back(std::move(kc));
    }
  }
  prog.G.resize(static_cast<Eigen::Index>(rows.size()), n);
  prog.h.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    prog.G.row(static_cast<Eigen::Index>(i)) = rows[i];
    prog.h[static_cast<Eigen::Index>(i)] = offsets[i];
  }
  for (int t : targets) {
    detail::KlConstraint kc;
    kc.J = J[t];
    kc.e = e;
    kc.w = Eigen::Map<const Eigen::VectorXd>(qhat.probs().data(), kk_i);
    kc.a = Eigen::VectorXd::Zero(n);
    kc.a[idx_t] = -1.0;
    prog.nonlinear.push_back(std::move(kc));
  }

  // Starting point.
  const Channel start = mixture(theta);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t j = 0; j + 1 < k; ++j) x0[var(l, j)] = start(l, j);
  }
  x0[idx_t] = evaluate(start) + 1.0;
  if (tv) {
    for (int h = 0; h < 2; ++h) {
      const Distribution out = apply_channel(*ps[h], start);
      const double used = tv_l1(*ps[h], out);
      const double spare = (set.delta - used) / static_cast<double>(2 * k);
      for (std::size_t x = 0; x < k; ++x) {
        x0[idx_s + h * kk_i + static_cast<Eigen::Index>(x)] =
            std::abs(out[x] - (*ps[h])[x]) + spare;
      }
    }
  }

  const double gap = std::max(opts.tolerance, 1e-13);
  auto res = detail::solve_barrier(prog, x0, gap, std::max(opts.max_iterations, 200));

  std::vector<double> entries(kk);
  for (std::size_t l = 0; l < k; ++l) {
    double rest = 1.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double v = std::max(0.0, res.x[var(l, j)]);
      entries[l * k + j] = v;
      rest -= v;
    }
    entries[l * k + k - 1] = std::max(0.0, rest);
  }
  Channel a(k, std::move(entries));
  double value = evaluate(a);

  if (!res.converged || !std::isfinite(value)) {
    // Fall back to the better of the interior start and the identity.
    const Channel id = Channel::identity(k);
    const double v_start = evaluate(start);
    const double v_id = evaluate(id);
    const Channel& best = v_start <= v_id ? start : id;
    const double best_v = std::min(v_start, v_id);
    if (!std::isfinite(value) || best_v < value) {
      return ChannelMinimum{best_v, best, false, res.newton_steps};
    }
  }
  return ChannelMinimum{value, std::move(a), res.converged, res.newton_steps};
}

}  // namespace

ChannelMinimum min_max_divergence_over_channel(const Distribution& qhat,
                                               const CommonChannelSet& set,
                                               const SolverOptions& opts) {
  return solve_common_channel(qhat, set, {0, 1}, opts);
}

ChannelMinimum min_divergence_over_channel(const Distribution& qhat, const CommonChannelSet& set,
                                           int which, const SolverOptions& opts) {
  if (which != 0 && which != 1) throw DomainError("min_divergence_over_channel: which must be 0 or 1");
  return solve_common_channel(qhat, set, {which}, opts);
}

}  // namespace advseq
