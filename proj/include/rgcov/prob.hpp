#pragma once

// Small probability toolbox: regularized incomplete gamma, chi-square CDF,
// standard normal CDF. Hand-rolled so that p-values are identical across
// platforms and standard-library versions.

namespace rgcov::prob {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Chi-square CDF with (possibly non-integer) df > 0.
double chi2_cdf(double x, double df);

// Upper tail of the chi-square distribution, 1 - CDF.
double chi2_sf(double x, double df);

// Standard normal CDF / survival function.
double normal_cdf(double z);
double normal_sf(double z);

// log Gamma(x), x > 0 (Lanczos).
double log_gamma(double x);

}  // namespace rgcov::prob
