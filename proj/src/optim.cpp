#include "rgcov/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rgcov::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& fn, const Vector& x, int& evals) {
  ++evals;
  const double f = fn(x);
  return std::isnan(f) ? kInf : f;
}

}  // namespace

Result nelder_mead(const Objective& fn, const Vector& x0, const NelderMeadOptions& options) {
  const int dim = static_cast<int>(x0.size());
  require(dim >= 1, ErrorKind::Domain, "nelder_mead: empty start point");
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : 400 * dim;

  // Standard coefficients: reflection, expansion, contraction, shrink.
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  int evals = 0;
  std::vector<Vector> xs(dim + 1, x0);
  std::vector<double> fs(dim + 1);
  for (int i = 1; i <= dim; ++i) {
    xs[i](i - 1) += options.initial_step * (1.0 + std::abs(x0(i - 1)));
  }
  for (int i = 0; i <= dim; ++i) fs[i] = safe_eval(fn, xs[i], evals);

  std::vector<int> order(dim + 1);
  std::iota(order.begin(), order.end(), 0);

  Result result;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = order[0], worst = order[dim], second_worst = order[dim - 1];

    if (std::isinf(fs[best])) break;  // nowhere feasible to go

    // Convergence: simplex collapsed in both value and position.
    const double f_spread = fs[worst] - fs[best];
    double x_spread = 0.0;
    for (int i = 1; i <= dim; ++i) {
      x_spread = std::max(x_spread, (xs[order[i]] - xs[best]).cwiseAbs().maxCoeff());
    }
    const double f_scale = std::abs(fs[best]) + options.f_tolerance;
    const double x_scale = 1.0 + xs[best].cwiseAbs().maxCoeff();
    if (f_spread <= options.f_tolerance * f_scale &&
        x_spread <= options.x_tolerance * x_scale) {
      result.converged = true;
      break;
    }

    // Centroid of all but the worst vertex.
    Vector centroid = Vector::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += xs[order[i]];
    centroid /= dim;

    Vector xr = centroid + alpha * (centroid - xs[worst]);
    const double fr = safe_eval(fn, xr, evals);

    if (fr < fs[best]) {
      Vector xe = centroid + gamma * (xr - centroid);
      const double fe = safe_eval(fn, xe, evals);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second_worst]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      // Contraction (outside when the reflected point improved on the worst).
      const bool outside = fr < fs[worst];
      Vector xc;
      if (outside)
        xc = centroid + rho * (xr - centroid);
      else
        xc = centroid - rho * (centroid - xs[worst]);
      const double fc = safe_eval(fn, xc, evals);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 1; i <= dim; ++i) {
          xs[order[i]] = xs[best] + sigma * (xs[order[i]] - xs[best]);
          fs[order[i]] = safe_eval(fn, xs[order[i]], evals);
        }
      }
    }
  }

  std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
  result.x = xs[order[0]];
  result.value = fs[order[0]];
  result.iterations = iter;
  result.evaluations = evals;
  return result;
}

Vector fd_gradient(const Objective& fn, const Vector& x, double step_rel) {
  const int dim = static_cast<int>(x.size());
  Vector g(dim);
  Vector xp = x;
  for (int i = 0; i < dim; ++i) {
    const double h = step_rel * (1.0 + std::abs(x(i)));
    const double xi = x(i);
    xp(i) = xi + h;
    const double fp = fn(xp);
    xp(i) = xi - h;
    const double fm = fn(xp);
    xp(i) = xi;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Result bfgs(const Objective& fn, const Vector& x0, const BfgsOptions& options) {
  const int dim = static_cast<int>(x0.size());
  require(dim >= 1, ErrorKind::Domain, "bfgs: empty start point");

  int evals = 0;
  Result result;
  Vector x = x0;
  double f = safe_eval(fn, x, evals);
  if (std::isinf(f)) {
    result.x = x;
    result.value = f;
    result.evaluations = evals;
    return result;
  }

  auto gradient = [&](const Vector& at) {
    evals += 2 * dim;
    return fd_gradient(fn, at, options.fd_step);
  };

  Matrix h_inv = Matrix::Identity(dim, dim);
  Vector g = gradient(x);
  bool scaled = false;

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (!g.allFinite()) break;
    if (g.cwiseAbs().maxCoeff() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    Vector d = -(h_inv * g);
    double slope = g.dot(d);
    if (slope >= 0.0) {
      // Reset a corrupted metric and take a plain gradient step.
      h_inv = Matrix::Identity(dim, dim);
      d = -g;
      slope = g.dot(d);
      if (slope >= 0.0) break;
    }

    // Armijo backtracking.
    double step = 1.0;
    double f_new = kInf;
    Vector x_new;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      x_new = x + step * d;
      f_new = safe_eval(fn, x_new, evals);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent along this direction at any tried step; treat the current
      // point as converged if the gradient is small-ish, otherwise give up.
      result.converged = g.cwiseAbs().maxCoeff() <= 1e2 * options.gradient_tolerance;
      break;
    }

    Vector g_new = gradient(x_new);
    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho_bfgs = 1.0 / sy;
      Matrix outer_sy = s * y.transpose();
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      Matrix hy = h_inv;
      hy -= rho_bfgs * outer_sy * h_inv;
      h_inv = hy - rho_bfgs * (hy * y) * s.transpose();
      h_inv += rho_bfgs * s * s.transpose();
      // Symmetrize against drift.
      h_inv = 0.5 * (h_inv + h_inv.transpose());
    }

    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
  }

  result.x = x;
  result.value = f;
  result.iterations = iter;
  result.evaluations = evals;
  return result;
}

}  // namespace rgcov::optim
