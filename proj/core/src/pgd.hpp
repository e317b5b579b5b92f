#pragma once

// Projected gradient descent with Barzilai-Borwein trial steps and an
// Armijo backtracking search along the projection arc. Internal to the
// library; the public solvers wrap it with problem-specific callbacks.

#include <functional>
#include <span>
#include <vector>

#include "advseq/divopt.hpp"

namespace advseq::detail {

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<void(std::span<const double>, std::span<double>)>;
using Projection = std::function<void(std::span<const double>, std::span<double>)>;

struct PgdOutcome {
  double value = 0.0;
  std::vector<double> x;
  bool converged = false;
  int iterations = 0;
};

PgdOutcome projected_gradient(const Objective& f, const Gradient& grad, const Projection& project,
                              std::span<const double> x0, const SolverOptions& opts);

}  // namespace advseq::detail
