#pragma once

#include <functional>

#include "rgcov/types.hpp"

namespace rgcov::optim {

using Objective = std::function<double(const Vector&)>;

struct Result {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_iterations = 0;      // 0 -> 400 * dim
  double f_tolerance = 1e-12;  // relative spread of simplex values
  double x_tolerance = 1e-9;   // relative spread of simplex vertices
  double initial_step = 0.25;  // relative per-coordinate simplex size
};

struct BfgsOptions {
  int max_iterations = 120;
  double gradient_tolerance = 1e-8;  // on the max-norm of the gradient
  double fd_step = 1e-6;             // relative central-difference step
};

// Derivative-free simplex descent. The objective may return +inf to mark
// infeasible points; such vertices are simply the worst in the ordering.
Result nelder_mead(const Objective& fn, const Vector& x0,
                   const NelderMeadOptions& options = {});

// Quasi-Newton polish with numeric (central-difference) gradients and an
// Armijo backtracking line search.
Result bfgs(const Objective& fn, const Vector& x0, const BfgsOptions& options = {});

// The central-difference gradient the quasi-Newton step uses, exposed for
// validation: step_i = step_rel * (1 + |x_i|) per coordinate.
Vector fd_gradient(const Objective& fn, const Vector& x, double step_rel = 1e-6);

}  // namespace rgcov::optim
