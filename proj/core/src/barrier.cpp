#include "barrier.hpp"

#include <cmath>
#include <limits>

namespace advseq::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTauGrowth = 10.0;
constexpr double kNewtonDecrement = 1e-12;

double kl_value(const KlConstraint& k, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = k.J * x + k.e;
  double v = k.a.dot(x) + k.b;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (k.w[j] <= 0.0) continue;
    if (!(r[j] > 0.0)) return kInf;
    v += k.w[j] * std::log(k.w[j] / r[j]);
  }
  return v;
}

// Barrier objective; +inf outside the strict interior.
double barrier_value(const BarrierProgram& p, double tau, const Eigen::VectorXd& x) {
  double v = tau * p.c.dot(x);
  if (p.G.rows() > 0) {
    const Eigen::VectorXd l = p.G * x + p.h;
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (!(l[i] < 0.0)) return kInf;
      v -= std::log(-l[i]);
    }
  }
  for (const auto& k : p.nonlinear) {
    const double g = kl_value(k, x);
    if (!(g < 0.0)) return kInf;
    v -= std::log(-g);
  }
  return v;
}

void barrier_derivatives(const BarrierProgram& p, double tau, const Eigen::VectorXd& x,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const Eigen::Index n = x.size();
  grad = tau * p.c;
  hess.setZero(n, n);
  if (p.G.rows() > 0) {
    const Eigen::VectorXd l = p.G * x + p.h;
    const Eigen::VectorXd inv = (-l).cwiseInverse();
    grad += p.G.transpose() * inv;
    hess += p.G.transpose() * inv.cwiseAbs2().asDiagonal() * p.G;
  }
  for (const auto& k : p.nonlinear) {
    const Eigen::VectorXd r = k.J * x + k.e;
    Eigen::VectorXd dr = Eigen::VectorXd::Zero(r.size());
    Eigen::VectorXd d2r = Eigen::VectorXd::Zero(r.size());
    double g = k.a.dot(x) + k.b;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      if (k.w[j] <= 0.0) continue;
      g += k.w[j] * std::log(k.w[j] / r[j]);
      dr[j] = -k.w[j] / r[j];
      d2r[j] = k.w[j] / (r[j] * r[j]);
    }
    const Eigen::VectorXd gg = k.J.transpose() * dr + k.a;
    const Eigen::MatrixXd gh = k.J.transpose() * d2r.asDiagonal() * k.J;
    grad += gg / (-g);
    hess += gg * gg.transpose() / (g * g) + gh / (-g);
  }
}

}  // namespace

BarrierOutcome solve_barrier(const BarrierProgram& prog, const Eigen::VectorXd& x0, double gap,
                             int max_newton_steps) {
  BarrierOutcome out;
  out.x = x0;
  const double m = static_cast<double>(prog.G.rows() + static_cast<Eigen::Index>(prog.nonlinear.size()));
  if (!std::isfinite(barrier_value(prog, 1.0, x0))) return out;

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double tau = 1.0;
  int steps = 0;
  while (true) {
    // Centering.
    for (int inner = 0; inner < 100 && steps < max_newton_steps; ++inner, ++steps) {
      barrier_derivatives(prog, tau, out.x, grad, hess);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      Eigen::VectorXd dx = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !dx.allFinite()) {
        const double reg = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        hess.diagonal().array() += reg;
        dx = hess.ldlt().solve(-grad);
        if (!dx.allFinite()) return out;
      }
      const double decrement = -grad.dot(dx);
      if (decrement / 2.0 <= kNewtonDecrement) break;

      const double phi = barrier_value(prog, tau, out.x);
      double s = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 80; ++bt, s *= 0.5) {
        const double trial = barrier_value(prog, tau, out.x + s * dx);
        if (std::isfinite(trial) && trial <= phi - 0.25 * s * decrement) {
          out.x += s * dx;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (m / tau < gap) {
      out.converged = steps < max_newton_steps;
      break;
    }
    if (steps >= max_newton_steps) break;
    tau *= kTauGrowth;
  }
  out.newton_steps = steps;
  return out;
}

}  // namespace advseq::detail
