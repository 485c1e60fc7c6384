#pragma once

#include <vector>

#include "rgcov/types.hpp"

namespace rgcov {

// Symmetric eigendecomposition with a deterministic convention:
// eigenvalues in descending order, each eigenvector scaled so its
// largest-magnitude coordinate is positive (first such coordinate on ties).
struct SpectralDecomposition {
  Vector values;   // descending
  Matrix vectors;  // columns aligned with values
};

// Sample autocovariance of a K x T series at non-negative lag h:
//   Gamma(h) = (1/T) * sum_{t=h+1..T} (v_t - vbar)(v_{t-h} - vbar)'
// with vbar the full-sample mean and divisor 1/T regardless of lag.
// Throws Domain for h < 0 or h >= T, Data for non-finite input.
Matrix autocovariance(const Matrix& v, int lag);

// Same, for several lags at once (shares the centering pass).
std::vector<Matrix> autocovariances(const Matrix& v, int max_lag);

// m + delta * I, delta >= 0.
Matrix ridge(const Matrix& m, double delta);

// One Sherman–Morrison step:
//   C - rho2 * (C x)(C x)' / (1 + rho2 * x' C x)
// which is (C^{-1} + rho2 * x x')^{-1} when C is symmetric positive definite.
Matrix sm_update(const Matrix& c_prev, const Vector& x, double rho2);

// Recursive inverse of (rho1 * I + rho2 * sum_t x_t x_t') built from one
// Sherman–Morrison pass over the columns of xs (K x T, T >= 1), seeded with
// the closed-form one-observation inverse. rho1 > 0, rho2 > 0.
Matrix recursive_inverse(const Matrix& xs, double rho1, double rho2);

// Symmetric eigendecomposition (input must be symmetric within 1e-12
// relatively; Domain error otherwise).
SpectralDecomposition sym_eigen(const Matrix& m);

// Inverse symmetric square root via sym_eigen. Eigenvalues at or below
// `floor` raise NearSingular naming the offending eigenvalue. A negative
// floor means the default 1e-12 * lambda_max.
Matrix inv_sqrt(const Matrix& m, double floor = -1.0);

// Condition number (ratio of extreme absolute eigenvalues) of a symmetric
// matrix; +inf when the smallest is zero.
double sym_cond(const Matrix& m);

}  // namespace rgcov
