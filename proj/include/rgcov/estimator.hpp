#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rgcov/transforms.hpp"
#include "rgcov/types.hpp"
#include "rgcov/var_process.hpp"

namespace rgcov {

// ---------------------------------------------------------------------------
// Shrinkage regime: either a fixed ridge level delta, or a vanishing level
// eta / T that decays with the (transformed) sample size.
// ---------------------------------------------------------------------------
enum class RegimeKind { Fixed, OverT };

struct ShrinkageRegime {
    RegimeKind kind = RegimeKind::Fixed;
    double value = 0.0;  // delta when Fixed, eta when OverT

    double effective(std::size_t sample_size) const;

    static ShrinkageRegime fixed(double delta);
    static ShrinkageRegime over_t(double eta);
};

enum class Weighting { Full, Diagonal };
enum class InversionBackend { DenseFactorization, ShermanMorrison };

const char* weighting_name(Weighting w);
const char* backend_name(InversionBackend b);
const char* regime_name(RegimeKind k);

// ---------------------------------------------------------------------------
// Optimizer protocol settings.  The estimator assembles a pool of starting
// points (least-squares fit, zero, seeded random perturbations of the LS fit,
// and eigenvalue-reflection candidates derived from the LS fit), runs a cheap
// "probe" polish on every candidate, ranks them, and then spends a deep
// polish budget on the best `polish_top` candidates.
// ---------------------------------------------------------------------------
struct OptimizerSettings {
    int random_starts = 3;          // seeded perturbations of the LS start
    bool reflection_starts = true;  // eigenvalue-reflection candidates
    int probe_nm_iterations = 400;
    int probe_bfgs_iterations = 60;
    int polish_top = 8;             // deep-polish this many ranked candidates
    int deep_nm_iterations = 3000;
    int deep_bfgs_iterations = 250;
    int deep_restart_iterations = 1500;
    double f_tolerance = 1e-12;
    std::uint64_t seed = 20240711ull;
};

struct EstimatorConfig {
    int lags = 1;  // H: number of autocovariance lags in the objective
    TransformSpec transforms;
    ShrinkageRegime regime;
    Weighting weighting = Weighting::Full;
    InversionBackend backend = InversionBackend::DenseFactorization;
    OptimizerSettings optimizer;
    bool compute_asymptotic_cov = true;
    // Scale-stable variant: divide each transformed component by its sample
    // standard deviation before the autocovariances, so the ridge acts on a
    // correlation-scale matrix.  At delta = 0 the scaling cancels exactly and
    // the objective is unchanged; at delta > 0 it makes shrinkage levels
    // commensurate across transforms of very different magnitudes (heavy
    // batteries mixing, say, cubes with signs), at the cost of the raw-scale
    // ridge semantics of the default.  Off by default.
    bool standardize_transforms = false;
};

struct TraceEntry {
    std::string stage;
    double start_objective = 0.0;
    double end_objective = 0.0;
    long evaluations = 0;
};

struct EstimationResult {
    int n = 0;
    int p = 0;
    std::vector<Matrix> phi;    // estimated coefficient matrices
    Vector theta;               // packed coefficients (column-major per matrix)
    double objective_value = 0.0;
    Matrix residuals;           // n x (T - p)
    Matrix transformed;         // K x (T - p)
    Matrix asymptotic_cov;      // dim(theta) x dim(theta); empty if skipped
    bool weak_identification = false;
    double delta_used = 0.0;    // effective shrinkage at the sample size used
    std::size_t sample_size = 0;  // length of the transformed sample
    bool converged = false;
    std::vector<TraceEntry> trace;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Parameter packing: theta stacks vec(Phi_1), ..., vec(Phi_p) column-major.
// ---------------------------------------------------------------------------
Vector pack_theta(const std::vector<Matrix>& phi);
std::vector<Matrix> unpack_theta(const Vector& theta, int n, int p);

// ---------------------------------------------------------------------------
// Objective core on an already-transformed series v (K x Tv).  This is the
// single code path shared by the estimator and the serial-dependence tests:
// the test statistic equals Tv * gcov_objective(...) exactly.
//
// objective(v) = sum_{h=1..lags} Tr[ Gamma(h) W Gamma(h)' W ]
// with W = (Gamma(0) + delta I)^-1 (Full) or (diag(Gamma(0)) + delta I)^-1
// (Diagonal).  Throws NearSingular when the weight matrix cannot be formed.
// ---------------------------------------------------------------------------
struct GcovParts {
    double objective = 0.0;
    Matrix gamma0;               // sample autocovariance at lag 0
    std::vector<Matrix> gammas;  // lags 1..H
    Matrix w;                    // weight matrix actually used
};

GcovParts gcov_objective_parts(const Matrix& v, int lags, double delta,
                               Weighting weighting = Weighting::Full,
                               InversionBackend backend = InversionBackend::DenseFactorization);

double gcov_objective(const Matrix& v, int lags, double delta,
                      Weighting weighting = Weighting::Full,
                      InversionBackend backend = InversionBackend::DenseFactorization);

// Objective as a function of VAR coefficients on raw data y (n x T):
// residuals -> transforms -> gcov_objective.  Throws on invalid input or a
// singular weight matrix.
double objective(const Matrix& y, const std::vector<Matrix>& phi,
                 const EstimatorConfig& config);

// Full estimation: multistart minimization of the objective over theta.
EstimationResult estimate(const Matrix& y, int p, const EstimatorConfig& config);

// Asymptotic covariance of theta-hat at a given parameter (sandwich form,
// already divided by the transformed sample size).  Exposed separately so it
// can be audited against finite differences; `estimate` calls it when
// compute_asymptotic_cov is set.
struct AsymptoticCov {
    Matrix cov;          // dim x dim covariance of theta-hat
    Matrix j;            // outer Hessian-like matrix
    Matrix i;            // inner long-run matrix
    bool weak_identification = false;
};

AsymptoticCov asymptotic_covariance(const Matrix& y, const std::vector<Matrix>& phi,
                                    const EstimatorConfig& config);

// Finite-difference Jacobian D_h = d vec(Gamma_h(theta)) / d theta' for
// h = 0..lags as one stacked matrix per lag.  Used internally and by tests.
std::vector<Matrix> autocov_jacobians(const Matrix& y, const std::vector<Matrix>& phi,
                                      const EstimatorConfig& config, double step_rel = 1e-6);

// ---------------------------------------------------------------------------
// Shrinkage-level selection by grid cross-validation: fit on the first 80%
// of the sample (contiguous), score each candidate delta by the objective of
// the trained parameter on the held-out 20%, pick the minimizer (ties toward
// the smaller delta).
// ---------------------------------------------------------------------------
struct DeltaSelection {
    double best = 0.0;
    std::vector<double> grid;
    std::vector<double> heldout_objective;
};

DeltaSelection select_shrinkage_cv(const Matrix& y, int p, const EstimatorConfig& base,
                                   const std::vector<double>& grid);

// JSON bridges (nlohmann syntax handled in the implementation file).
EstimatorConfig estimator_config_from_json(const std::string& text);
std::string estimator_config_to_json(const EstimatorConfig& config);
std::string estimation_result_to_json(const EstimationResult& result);

}  // namespace rgcov
