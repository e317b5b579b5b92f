#include "pgd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advseq::detail {
namespace {

constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e12;
constexpr int kMaxBacktracks = 60;
// Projected-gradient residual that certifies a stalled run as stationary.
constexpr double kStationarity = 1e-7;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

PgdOutcome projected_gradient(const Objective& f, const Gradient& grad, const Projection& project,
                              std::span<const double> x0, const SolverOptions& opts) {
  const std::size_t n = x0.size();
  std::vector<double> x(n), g(n), xn(n), gn(n), trial(n);
  project(x0, x);
  double fx = f(x);
  grad(x, g);

  auto stationarity = [&]() {
    for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - g[i];
    project(trial, xn);
    return max_abs_diff(xn, x);
  };

  PgdOutcome out;
  double step = 1.0;
  int stalled = 0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    bool accepted = false;
    double t = step;
    double fn = fx;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - t * g[i];
      project(trial, xn);
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += g[i] * (xn[i] - x[i]);
      fn = f(xn);
      if (fn <= fx + opts.armijo * slope) {
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      // No representable descent step along the arc.
      out.converged = stationarity() <= kStationarity;
      break;
    }

    grad(xn, gn);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = xn[i] - x[i];
      ss += s * s;
      sy += s * (gn[i] - g[i]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, kMinStep, kMaxStep) : std::min(2.0 * t, kMaxStep);

    const double decrease = fx - fn;
    const double moved = max_abs_diff(xn, x);
    std::swap(x, xn);
    std::swap(g, gn);
    fx = fn;

    const double scale = std::max(std::abs(fx), std::numeric_limits<double>::min());
    if (decrease <= opts.tolerance * scale || moved == 0.0) {
      if (++stalled >= opts.patience) {
        if (stationarity() <= kStationarity) {
          out.converged = true;
          ++it;
          break;
        }
        stalled = 0;
        step = 1.0;
      }
    } else {
      stalled = 0;
    }
  }

  out.value = fx;
  out.x = std::move(x);
  out.iterations = it;
  return out;
}

}  // namespace advseq::detail
