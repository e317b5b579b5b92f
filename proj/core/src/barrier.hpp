#pragma once

// Log-barrier interior-point method for small convex programs of the form
//
//   minimize c'x  subject to  G x + h <= 0,  g_k(x) <= 0,
//
// where every nonlinear g_k is a KL-type term
//   g_k(x) = sum_j w_j log(w_j / r_j(x)) + a'x + b,   r(x) = J x + e.
// That family covers every constraint of the common-channel programs.

#include <Eigen/Dense>
#include <vector>

namespace advseq::detail {

struct KlConstraint {
  Eigen::MatrixXd J;
  Eigen::VectorXd e;
  Eigen::VectorXd w;
  Eigen::VectorXd a;
  double b = 0.0;
};

struct BarrierProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<KlConstraint> nonlinear;
};

struct BarrierOutcome {
  Eigen::VectorXd x;
  bool converged = false;
  int newton_steps = 0;
};

/// `x0` must be strictly feasible. Stops once the duality-gap bound m / tau
/// drops below `gap`.
BarrierOutcome solve_barrier(const BarrierProgram& prog, const Eigen::VectorXd& x0, double gap,
                             int max_newton_steps);

}  // namespace advseq::detail
