#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgcov/estimator.hpp"
#include "rgcov/transforms.hpp"
#include "rgcov/types.hpp"

namespace rgcov {

// ---------------------------------------------------------------------------
// Serial-dependence tests.  The statistic is always Tv times the estimator
// objective evaluated on the tested (transformed) series — one shared code
// path, so the equality is exact by construction.
// ---------------------------------------------------------------------------
enum class LawKind { ChiSq, Mixture, NormalApprox };

const char* law_name(LawKind law);

struct TestResult {
    double statistic = 0.0;
    LawKind law = LawKind::ChiSq;
    int df = 0;                    // ChiSq: degrees of freedom; NormalApprox: nu
    std::vector<double> weights;   // Mixture: one weight per chi-square component
    int per_weight_df = 0;         // Mixture: df of each component (the lag window H)
    double p_value = 0.0;
    double p_se = 0.0;             // Monte Carlo / bootstrap standard error (0 = analytic)
    double z = 0.0;                // NormalApprox: the normal score
    int lags = 0;                  // H
    int k = 0;                     // transformed dimension
    int dim_theta = 0;             // estimated parameters absorbed by the statistic
    double delta_used = 0.0;
    std::size_t sample_size = 0;
    std::vector<std::string> notes;
};

struct TestOptions {
    long mc_draws = 100000;        // mixture tail-probability sample size
    std::uint64_t seed = 987654321ull;
    int bootstrap_replications = 199;
    int bootstrap_burn = 200;
    // Context for the fixed-delta specification test with estimated
    // parameters: the original data panel and the estimator settings used to
    // produce the result (required for the parametric bootstrap).
    const Matrix* data = nullptr;
    const EstimatorConfig* estimator = nullptr;
};

// Mixture-law machinery -------------------------------------------------------

// Weights of the regularized null law: all ordered pairwise products
// mu_j * mu_k, where mu are the eigenvalues of the lag-0 autocovariance
// whitened by its ridge-shrunk counterpart — each mu equals
// lambda / (lambda + delta) for an eigenvalue lambda of gamma0, so every
// weight lies in (0, 1] and the set collapses to all-ones at delta = 0.
std::vector<double> eigen_product_weights(const Matrix& gamma0, double delta);

// Monte Carlo tail probability P(sum_l w_l * chisq_l(df) > statistic), with
// the standard error of the estimate.  Deterministic in the seed, and
// monotone non-increasing in the statistic for a fixed seed.
struct MixturePValue {
    double p = 0.0;
    double se = 0.0;
};
MixturePValue mixture_pvalue(double statistic, const std::vector<double>& weights,
                             int per_weight_df, long draws, std::uint64_t seed);

// Tests ------------------------------------------------------------------------

// Serial-independence test on raw data: transform, then test all lag
// autocovariances up to H.  delta = 0 uses the chi-square law with K^2*H
// degrees of freedom; delta > 0 uses the eigenvalue-product mixture law.
TestResult rnlsd(const Matrix& data, const TransformSpec& spec, int lags, double delta,
                 const TestOptions& options = {});

// Same test on an already-transformed series (K x Tv).
TestResult rnlsd_transformed(const Matrix& v, int lags, double delta,
                             const TestOptions& options = {});

// Specification test on an estimation result.  The vanishing-shrinkage
// regime (or delta = 0) uses the chi-square law with K^2*H - dim(theta)
// degrees of freedom.  A fixed delta > 0 with estimated parameters has no
// closed-form null law; it is approximated by a parametric bootstrap
// (re-simulate from the fitted model with resampled residuals, re-estimate,
// recompute the statistic), which requires options.data and
// options.estimator.  With dim(theta) = 0 the test reduces exactly to
// rnlsd_transformed on the same input.
TestResult rgcov_spec_test(const EstimationResult& result, int lags,
                           const ShrinkageRegime& regime, const TestOptions& options = {});

// Normal approximation for a large-df chi-square statistic:
// z = sqrt(2*statistic) - sqrt(2*nu - 1), upper-tail p-value.  Intended for
// nu > 30; smaller nu still computes but a note is attached.
TestResult zeta_approx(double statistic, int nu);

std::string test_result_to_json(const TestResult& result);

}  // namespace rgcov
