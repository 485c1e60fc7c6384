#include "rgcov/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "json.hpp"
#include "rgcov/matrix.hpp"
#include "rgcov/optim.hpp"
#include "rgcov/random.hpp"

namespace rgcov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCondLimit = 1e12;      // weight-matrix condition ceiling
constexpr double kThetaBound = 1e6;      // coefficient magnitude fence
constexpr double kRcondPinv = 1e-12;     // pseudo-inverse threshold for J

Vector vec_of(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, int rows, int cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

void validate_panel(const Matrix& y, int p, const EstimatorConfig& config) {
    require(y.rows() >= 1 && y.cols() >= 2, ErrorKind::Data, "data panel is empty");
    require(y.allFinite(), ErrorKind::Data, "data panel contains non-finite values");
    require(p >= 1, ErrorKind::Config, "autoregressive order must be at least 1");
    require(config.lags >= 1, ErrorKind::Config, "lag window H must be at least 1");
    require(config.transforms.size() >= 1, ErrorKind::Config, "transform set is empty");
    require(y.cols() > p + config.lags + 2, ErrorKind::Data,
            "sample too short for the requested order and lag window");
}

// Least-squares VAR fit: regress y_t on (y_{t-1}, ..., y_{t-p}).
std::vector<Matrix> ls_fit(const Matrix& y, int p) {
    const int n = static_cast<int>(y.rows());
    const auto t_total = y.cols();
    const auto tv = t_total - p;
    Matrix x(n * p, tv);
    Matrix yt(n, tv);
    for (Eigen::Index t = p; t < t_total; ++t) {
        const auto col = t - p;
        yt.col(col) = y.col(t);
        for (int k = 1; k <= p; ++k) x.block((k - 1) * n, col, n, 1) = y.col(t - k);
    }
    // Solve B X = Y row-wise in the least-squares sense.
    Matrix b = x.transpose().colPivHouseholderQr().solve(yt.transpose()).transpose();
    std::vector<Matrix> phi(p);
    for (int k = 0; k < p; ++k) phi[k] = b.block(0, k * n, n, n);
    return phi;
}

// Enumerate the diagonal structure of a real block-diagonal matrix whose
// blocks are 1x1 scalars or 2x2 rotation-scale blocks.
struct Unit {
    int offset = 0;
    int size = 1;
};

std::vector<Unit> block_units(const Matrix& j) {
    std::vector<Unit> units;
    const int m = static_cast<int>(j.rows());
    int i = 0;
    while (i < m) {
        if (i + 1 < m && (j(i + 1, i) != 0.0 || j(i, i + 1) != 0.0)) {
            units.push_back({i, 2});
            i += 2;
        } else {
            units.push_back({i, 1});
            i += 1;
        }
    }
    return units;
}

bool invert_unit_in_place(Matrix& j, const Unit& u) {
    if (u.size == 1) {
        const double lam = j(u.offset, u.offset);
        if (std::abs(lam) < 1e-8) return false;
        j(u.offset, u.offset) = 1.0 / lam;
        return true;
    }
    const double a = j(u.offset, u.offset);
    const double b = j(u.offset, u.offset + 1);
    const double det = a * a + b * b;
    if (det < 1e-16) return false;
    j(u.offset, u.offset) = a / det;
    j(u.offset + 1, u.offset + 1) = a / det;
    j(u.offset, u.offset + 1) = -b / det;
    j(u.offset + 1, u.offset) = b / det;
    return true;
}

// Eigenvalue-reflection starting points: take the least-squares fit, move
// subsets of its eigen-units across the unit circle (lambda -> 1/lambda),
// and rebuild coefficients in the same eigenbasis.  For p > 1 the reflection
// acts on the companion matrix and the first block row is kept.
std::vector<std::pair<std::string, Vector>> reflection_candidates(
    const std::vector<Matrix>& phi_ls, int n, int p) {
    std::vector<std::pair<std::string, Vector>> out;
    Matrix comp = companion(phi_ls);
    CausalNoncausalSplit split = decompose(comp);
    const int m = static_cast<int>(comp.rows());
    Matrix jfull = Matrix::Zero(m, m);
    if (split.n1 > 0) jfull.topLeftCorner(split.n1, split.n1) = split.j1;
    if (split.n2 > 0) jfull.bottomRightCorner(split.n2, split.n2) = split.j2;
    const std::vector<Unit> units = block_units(jfull);
    const int mu = static_cast<int>(units.size());

    std::vector<std::uint64_t> masks;
    if (mu <= 6) {
        for (std::uint64_t mask = 1; mask < (1ull << mu); ++mask) masks.push_back(mask);
    } else {
        for (int i = 0; i < mu; ++i) masks.push_back(1ull << i);
        masks.push_back((1ull << mu) - 1);
    }

    for (std::uint64_t mask : masks) {
        Matrix jflip = jfull;
        bool ok = true;
        for (int i = 0; i < mu && ok; ++i)
            if (mask & (1ull << i)) ok = invert_unit_in_place(jflip, units[i]);
        if (!ok) continue;
        Matrix reflected = split.a * jflip * split.a_inv;
        std::vector<Matrix> phi(p);
        for (int k = 0; k < p; ++k) phi[k] = reflected.block(0, k * n, n, n);
        char label[32];
        std::snprintf(label, sizeof(label), "reflect:%llu",
                      static_cast<unsigned long long>(mask));
        out.emplace_back(label, pack_theta(phi));
    }
    return out;
}

struct Candidate {
    std::string label;
    Vector theta;
    double value = kInf;
    bool converged = false;
};

}  // namespace

// ---------------------------------------------------------------------------
// Regime
// ---------------------------------------------------------------------------
double ShrinkageRegime::effective(std::size_t sample_size) const {
    require(value >= 0.0 && std::isfinite(value), ErrorKind::Config,
            "shrinkage level must be finite and non-negative");
    if (kind == RegimeKind::Fixed) return value;
    require(sample_size > 0, ErrorKind::Config, "sample size must be positive");
    return value / static_cast<double>(sample_size);
}

ShrinkageRegime ShrinkageRegime::fixed(double delta) {
    require(std::isfinite(delta) && delta >= 0.0, ErrorKind::Config,
            "shrinkage level must be finite and non-negative");
    return {RegimeKind::Fixed, delta};
}
ShrinkageRegime ShrinkageRegime::over_t(double eta) {
    require(std::isfinite(eta) && eta >= 0.0, ErrorKind::Config,
            "shrinkage level must be finite and non-negative");
    return {RegimeKind::OverT, eta};
}

const char* weighting_name(Weighting w) {
    return w == Weighting::Full ? "full" : "diagonal";
}
const char* backend_name(InversionBackend b) {
    return b == InversionBackend::DenseFactorization ? "dense" : "sherman_morrison";
}
const char* regime_name(RegimeKind k) { return k == RegimeKind::Fixed ? "fixed" : "over_t"; }

// ---------------------------------------------------------------------------
// Packing
// ---------------------------------------------------------------------------
Vector pack_theta(const std::vector<Matrix>& phi) {
    require(!phi.empty(), ErrorKind::Config, "coefficient list is empty");
    const int n = static_cast<int>(phi[0].rows());
    Vector theta(static_cast<Eigen::Index>(phi.size()) * n * n);
    Eigen::Index at = 0;
    for (const Matrix& m : phi) {
        require(m.rows() == n && m.cols() == n, ErrorKind::Config,
                "coefficient matrices must be square with a common dimension");
        theta.segment(at, n * n) = vec_of(m);
        at += n * n;
    }
    return theta;
}

std::vector<Matrix> unpack_theta(const Vector& theta, int n, int p) {
    require(n >= 1 && p >= 1, ErrorKind::Config, "invalid dimensions");
    require(theta.size() == static_cast<Eigen::Index>(p) * n * n, ErrorKind::Config,
            "parameter vector length does not match p * n^2");
    std::vector<Matrix> phi(p);
    for (int k = 0; k < p; ++k) phi[k] = unvec(theta.segment(k * n * n, n * n), n, n);
    return phi;
}

// ---------------------------------------------------------------------------
// Objective core
// ---------------------------------------------------------------------------
GcovParts gcov_objective_parts(const Matrix& v, int lags, double delta,
                               Weighting weighting, InversionBackend backend) {
    require(lags >= 1, ErrorKind::Config, "lag window H must be at least 1");
    require(delta >= 0.0 && std::isfinite(delta), ErrorKind::Config,
            "shrinkage level must be finite and non-negative");
    require(v.cols() > lags, ErrorKind::Data, "series shorter than the lag window");
    const auto tv = v.cols();
    const int k = static_cast<int>(v.rows());

    GcovParts parts;
    std::vector<Matrix> gam = autocovariances(v, lags);
    parts.gamma0 = gam[0];
    parts.gammas.assign(gam.begin() + 1, gam.end());

    if (weighting == Weighting::Diagonal) {
        Vector d = parts.gamma0.diagonal().array() + delta;
        const double dmax = d.maxCoeff();
        const double dmin = d.minCoeff();
        require(dmin > 0.0 && dmin * kCondLimit > dmax, ErrorKind::NearSingular,
                "diagonal weight matrix is near singular; use a positive shrinkage level");
        parts.w = Matrix(d.cwiseInverse().asDiagonal());
    } else if (backend == InversionBackend::ShermanMorrison) {
        require(delta > 0.0, ErrorKind::Config,
                "the recursive inversion backend requires a strictly positive shrinkage level");
        Matrix centered = v.colwise() - v.rowwise().mean();
        parts.w = recursive_inverse(centered, delta, 1.0 / static_cast<double>(tv));
    } else {
        Matrix s = ridge(parts.gamma0, delta);
        Eigen::LLT<Matrix> llt(s);
        bool ok = llt.info() == Eigen::Success;
        if (ok) {
            Vector ld = llt.matrixLLT().diagonal();
            const double lmax = ld.maxCoeff();
            const double lmin = ld.minCoeff();
            ok = lmin > 0.0 && (lmax / lmin) * (lmax / lmin) < kCondLimit;
        }
        require(ok, ErrorKind::NearSingular,
                "weight matrix is near singular; use a positive shrinkage level");
        parts.w = llt.solve(Matrix::Identity(k, k));
    }

    double obj = 0.0;
    for (int h = 1; h <= lags; ++h) {
        const Matrix& g = gam[h];
        Matrix m1 = g * parts.w;
        Matrix m2 = g.transpose() * parts.w;
        obj += (m1.array() * m2.transpose().array()).sum();
    }
    require(std::isfinite(obj), ErrorKind::Data, "objective is not finite");
    parts.objective = obj;
    return parts;
}

double gcov_objective(const Matrix& v, int lags, double delta, Weighting weighting,
                      InversionBackend backend) {
    return gcov_objective_parts(v, lags, delta, weighting, backend).objective;
}

namespace {

// Transformed series for an estimator config: the raw transform battery, or
// the per-component standardized variant (each row scaled to unit sample
// variance, 1/T mean-corrected — the same moment convention as the
// autocovariances, so the delta = 0 objective is unchanged exactly).
// Zero-variance components are left unscaled; centering annihilates them in
// every autocovariance anyway.
Matrix transformed_values(const Matrix& resid, const EstimatorConfig& config) {
    TransformedSeries ts = apply(resid, config.transforms);
    if (config.standardize_transforms) {
        const double t = static_cast<double>(ts.values.cols());
        for (Eigen::Index r = 0; r < ts.values.rows(); ++r) {
            const double mean = ts.values.row(r).mean();
            const double var = (ts.values.row(r).array() - mean).square().sum() / t;
            if (var > 0.0) ts.values.row(r) /= std::sqrt(var);
        }
    }
    return std::move(ts.values);
}

double objective_at(const Matrix& y, const std::vector<Matrix>& phi,
                    const EstimatorConfig& config, double delta,
                    Matrix* out_resid = nullptr, Matrix* out_transformed = nullptr) {
    Matrix resid = residuals(y, phi);
    Matrix v = transformed_values(resid, config);
    double obj = gcov_objective(v, config.lags, delta, config.weighting, config.backend);
    if (out_resid) *out_resid = std::move(resid);
    if (out_transformed) *out_transformed = std::move(v);
    return obj;
}

}  // namespace

double objective(const Matrix& y, const std::vector<Matrix>& phi,
                 const EstimatorConfig& config) {
    validate_panel(y, static_cast<int>(phi.size()), config);
    const auto tv = y.cols() - static_cast<Eigen::Index>(phi.size());
    return objective_at(y, phi, config, config.regime.effective(tv));
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------
EstimationResult estimate(const Matrix& y, int p, const EstimatorConfig& config) {
    validate_panel(y, p, config);
    const int n = static_cast<int>(y.rows());
    const auto tv = y.cols() - p;
    const double delta = config.regime.effective(tv);
    const int k = config.transforms.size() * n;
    const int dim = p * n * n;

    EstimationResult res;
    res.n = n;
    res.p = p;
    res.sample_size = static_cast<std::size_t>(tv);
    res.delta_used = delta;

    require(static_cast<long long>(k) * k * config.lags >= dim, ErrorKind::Config,
            "K^2 * H is below the parameter dimension; enlarge the transform set or lag window");
    if (config.transforms.size() < p * n)
        res.warnings.push_back(
            "transform count per component is below p*n; identification may be weak");
    if (config.backend == InversionBackend::ShermanMorrison)
        require(delta > 0.0, ErrorKind::Config,
                "the recursive inversion backend requires a strictly positive shrinkage level");

    const optim::Objective fn = [&](const Vector& theta) -> double {
        if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > kThetaBound) return kInf;
        try {
            return objective_at(y, unpack_theta(theta, n, p), config, delta);
        } catch (const Error&) {
            return kInf;
        }
    };

    // --- Starting pool -----------------------------------------------------
    std::vector<Candidate> pool;
    std::vector<Matrix> phi_ls = ls_fit(y, p);
    Vector theta_ls = pack_theta(phi_ls);
    pool.push_back({"ls", theta_ls});
    pool.push_back({"zero", Vector::Zero(dim)});

    Rng rng(config.optimizer.seed);
    for (int i = 0; i < config.optimizer.random_starts; ++i) {
        Vector t = theta_ls;
        for (Eigen::Index j = 0; j < t.size(); ++j) t(j) += 0.3 * rng.normal();
        char label[32];
        std::snprintf(label, sizeof(label), "perturb:%d", i + 1);
        pool.push_back({label, t});
    }

    if (config.optimizer.reflection_starts) {
        try {
            for (auto& [label, theta] : reflection_candidates(phi_ls, n, p))
                pool.push_back({label, theta});
        } catch (const Error& e) {
            res.warnings.push_back(std::string("reflection starts skipped: ") + e.what());
        }
    }

    // --- Probe polish: cheap descent on every candidate --------------------
    for (Candidate& c : pool) {
        const double f0 = fn(c.theta);
        optim::NelderMeadOptions nm;
        nm.max_iterations = config.optimizer.probe_nm_iterations;
        nm.f_tolerance = config.optimizer.f_tolerance;
        nm.initial_step = 0.25;
        optim::Result r1 = optim::nelder_mead(fn, c.theta, nm);
        optim::BfgsOptions bo;
        bo.max_iterations = config.optimizer.probe_bfgs_iterations;
        optim::Result r2 = optim::bfgs(fn, r1.x, bo);
        if (r2.value <= r1.value) {
            c.theta = r2.x;
            c.value = r2.value;
        } else {
            c.theta = r1.x;
            c.value = r1.value;
        }
        res.trace.push_back({"probe:" + c.label, f0, c.value,
                             static_cast<long>(r1.evaluations + r2.evaluations)});
    }

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pool[a].value < pool[b].value; });

    // --- Deep polish on the ranked top ------------------------------------
    const std::size_t top = std::min<std::size_t>(
        pool.size(), static_cast<std::size_t>(std::max(1, config.optimizer.polish_top)));
    Candidate best;
    for (std::size_t rank = 0; rank < top; ++rank) {
        Candidate& c = pool[order[rank]];
        if (!std::isfinite(c.value) && rank > 0) continue;
        const double f0 = c.value;

        optim::NelderMeadOptions nm1;
        nm1.max_iterations = config.optimizer.deep_nm_iterations;
        nm1.f_tolerance = config.optimizer.f_tolerance;
        nm1.initial_step = 0.35;  // wide simplex escapes shallow shelves
        optim::Result r1 = optim::nelder_mead(fn, c.theta, nm1);

        optim::BfgsOptions bo;
        bo.max_iterations = config.optimizer.deep_bfgs_iterations;
        optim::Result r2 = optim::bfgs(fn, r1.x, bo);
        if (r2.value > r1.value) r2 = r1;

        optim::NelderMeadOptions nm2;
        nm2.max_iterations = config.optimizer.deep_restart_iterations;
        nm2.f_tolerance = config.optimizer.f_tolerance;
        nm2.initial_step = 0.1;
        optim::Result r3 = optim::nelder_mead(fn, r2.x, nm2);
        if (r3.value > r2.value) r3 = r2;

        c.theta = r3.x;
        c.value = r3.value;
        // Converged means the fit is at a numerical minimum: either a stage
        // met its own tolerance, or the final restart could no longer improve
        // the objective by a meaningful relative amount (iteration caps alone
        // must not disqualify an otherwise stationary fit).
        const bool stalled = std::isfinite(r3.value) &&
                             (r2.value - r3.value) <= 1e-6 * (std::abs(r3.value) + 1e-12);
        c.converged = r3.converged || r2.converged || stalled;
        res.trace.push_back({"deep:" + c.label, f0, c.value,
                             static_cast<long>(r1.evaluations + r2.evaluations + r3.evaluations)});
        if (c.value < best.value || best.theta.size() == 0) best = c;
    }

    require(std::isfinite(best.value), ErrorKind::Estimation,
            "objective was not finite at any starting point; the weight matrix is singular "
            "along the search path — use a positive shrinkage level");

    res.theta = best.theta;
    res.phi = unpack_theta(best.theta, n, p);
    res.converged = best.converged;

    Matrix resid, transformed;
    res.objective_value =
        objective_at(y, res.phi, config, delta, &resid, &transformed);
    res.residuals = std::move(resid);
    res.transformed = std::move(transformed);

    if (config.compute_asymptotic_cov) {
        try {
            AsymptoticCov ac = asymptotic_covariance(y, res.phi, config);
            res.asymptotic_cov = std::move(ac.cov);
            res.weak_identification = ac.weak_identification;
        } catch (const Error& e) {
            res.warnings.push_back(std::string("asymptotic covariance unavailable: ") + e.what());
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Asymptotic covariance
// ---------------------------------------------------------------------------
std::vector<Matrix> autocov_jacobians(const Matrix& y, const std::vector<Matrix>& phi,
                                      const EstimatorConfig& config, double step_rel) {
    const int p = static_cast<int>(phi.size());
    validate_panel(y, p, config);
    const int n = static_cast<int>(y.rows());
    const int dim = p * n * n;
    const int h_max = config.lags;
    Vector theta = pack_theta(phi);

    const auto gammas_at = [&](const Vector& th) {
        Matrix resid = residuals(y, unpack_theta(th, n, p));
        return autocovariances(transformed_values(resid, config), h_max);
    };

    const int k = config.transforms.size() * n;
    std::vector<Matrix> jac(h_max, Matrix(k * k, dim));
    for (int i = 0; i < dim; ++i) {
        const double step = step_rel * (1.0 + std::abs(theta(i)));
        Vector tp = theta, tm = theta;
        tp(i) += step;
        tm(i) -= step;
        std::vector<Matrix> gp = gammas_at(tp);
        std::vector<Matrix> gm = gammas_at(tm);
        for (int h = 1; h <= h_max; ++h)
            jac[h - 1].col(i) = (vec_of(gp[h]) - vec_of(gm[h])) / (2.0 * step);
    }
    return jac;
}

AsymptoticCov asymptotic_covariance(const Matrix& y, const std::vector<Matrix>& phi,
                                    const EstimatorConfig& config) {
    const int p = static_cast<int>(phi.size());
    validate_panel(y, p, config);
    const int n = static_cast<int>(y.rows());
    const auto tv = y.cols() - p;
    const double delta = config.regime.effective(tv);
    const int k = config.transforms.size() * n;
    const int dim = p * n * n;

    Matrix resid = residuals(y, phi);
    TransformedSeries ts = apply(resid, config.transforms);
    GcovParts parts =
        gcov_objective_parts(ts.values, config.lags, delta, config.weighting, config.backend);
    const Matrix& w = parts.w;
    const Matrix& g0 = parts.gamma0;

    std::vector<Matrix> jac = autocov_jacobians(y, phi, config);

    // (W (x) W) vec(U) = vec(W U W); the long-run middle adds G0 _ G0.
    const auto apply_ww = [&](const Matrix& d) {
        Matrix out(d.rows(), d.cols());
        for (Eigen::Index c = 0; c < d.cols(); ++c) {
            Matrix u = unvec(d.col(c), k, k);
            out.col(c) = vec_of(Matrix(w * u * w));
        }
        return out;
    };

    Matrix jmat = Matrix::Zero(dim, dim);
    Matrix imat = Matrix::Zero(dim, dim);
    for (const Matrix& d : jac) {
        Matrix wd = apply_ww(d);
        jmat.noalias() += 2.0 * d.transpose() * wd;
        Matrix mid(wd.rows(), wd.cols());
        for (Eigen::Index c = 0; c < wd.cols(); ++c) {
            Matrix u = unvec(wd.col(c), k, k);
            mid.col(c) = vec_of(Matrix(w * (g0 * u * g0) * w));
        }
        imat.noalias() += 4.0 * d.transpose() * mid;
    }
    jmat = 0.5 * (jmat + jmat.transpose());
    imat = 0.5 * (imat + imat.transpose());

    AsymptoticCov out;
    out.j = jmat;
    out.i = imat;

    SpectralDecomposition eig = sym_eigen(jmat);
    const double lmax = eig.values.cwiseAbs().maxCoeff();
    require(lmax > 0.0 && std::isfinite(lmax), ErrorKind::NearSingular,
            "curvature matrix is identically zero");
    Vector inv_vals(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) > lmax * kRcondPinv) {
            inv_vals(i) = 1.0 / eig.values(i);
        } else {
            inv_vals(i) = 0.0;
            out.weak_identification = true;
        }
    }
    Matrix jinv = eig.vectors * inv_vals.asDiagonal() * eig.vectors.transpose();
    out.cov = jinv * imat * jinv / static_cast<double>(tv);
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

// ---------------------------------------------------------------------------
// Shrinkage cross-validation
// ---------------------------------------------------------------------------
DeltaSelection select_shrinkage_cv(const Matrix& y, int p, const EstimatorConfig& base,
                                   const std::vector<double>& grid) {
    require(!grid.empty(), ErrorKind::Config, "shrinkage grid is empty");
    for (double d : grid)
        require(std::isfinite(d) && d >= 0.0, ErrorKind::Config,
                "shrinkage grid values must be finite and non-negative");
    validate_panel(y, p, base);

    const auto t_total = y.cols();
    const auto t_train = static_cast<Eigen::Index>(0.8 * static_cast<double>(t_total));
    const auto t_val = t_total - t_train;
    require(t_train > p + base.lags + 2 && t_val > p + base.lags + 2, ErrorKind::Data,
            "sample too short for an 80/20 train/validation split");

    Matrix y_train = y.leftCols(t_train);
    Matrix y_val = y.rightCols(t_val);

    DeltaSelection sel;
    sel.grid = grid;
    sel.heldout_objective.resize(grid.size());
    double best_val = kInf;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EstimatorConfig cfg = base;
        cfg.regime = ShrinkageRegime::fixed(grid[i]);
        cfg.compute_asymptotic_cov = false;
        EstimationResult fit = estimate(y_train, p, cfg);
        double score;
        try {
            score = objective_at(y_val, fit.phi, cfg, grid[i]);
        } catch (const Error&) {
            score = kInf;
        }
        sel.heldout_objective[i] = score;
        if (score < best_val) {  // strict: ties keep the earlier (smaller) entry
            best_val = score;
            best_idx = i;
        }
    }
    require(std::isfinite(best_val), ErrorKind::Estimation,
            "no shrinkage level produced a finite held-out objective");
    sel.best = grid[best_idx];
    return sel;
}

// ---------------------------------------------------------------------------
// JSON bridges
// ---------------------------------------------------------------------------
namespace {

using nlohmann::json;

json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json regime_json(const ShrinkageRegime& r) {
    return json{{"kind", regime_name(r.kind)}, {"value", r.value}};
}

ShrinkageRegime regime_from(const json& j) {
    ShrinkageRegime r;
    if (j.is_number()) {  // shorthand: bare number means a fixed delta
        r = ShrinkageRegime::fixed(j.get<double>());
        return r;
    }
    require(j.is_object(), ErrorKind::Config, "regime must be an object or number");
    const std::string kind = j.value("kind", "fixed");
    const double value = j.value("value", 0.0);
    if (kind == "fixed") return ShrinkageRegime::fixed(value);
    if (kind == "over_t") return ShrinkageRegime::over_t(value);
    throw_error(ErrorKind::Config, "unknown regime kind: " + kind);
}

}  // namespace

EstimatorConfig estimator_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw_error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    require(j.is_object(), ErrorKind::Config, "estimator config must be a JSON object");
    EstimatorConfig cfg;
    cfg.lags = j.value("lags", 1);
    if (j.contains("transforms")) {
        cfg.transforms = transform_spec_from_json(j["transforms"].dump());
    } else {
        cfg.transforms = named_battery();
    }
    if (j.contains("regime")) cfg.regime = regime_from(j["regime"]);
    if (j.contains("weighting")) {
        const std::string w = j["weighting"].get<std::string>();
        if (w == "full") cfg.weighting = Weighting::Full;
        else if (w == "diagonal") cfg.weighting = Weighting::Diagonal;
        else throw_error(ErrorKind::Config, "unknown weighting: " + w);
    }
    if (j.contains("backend")) {
        const std::string b = j["backend"].get<std::string>();
        if (b == "dense") cfg.backend = InversionBackend::DenseFactorization;
        else if (b == "sherman_morrison") cfg.backend = InversionBackend::ShermanMorrison;
        else throw_error(ErrorKind::Config, "unknown backend: " + b);
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        require(o.is_object(), ErrorKind::Config, "optimizer settings must be an object");
        OptimizerSettings& s = cfg.optimizer;
        s.random_starts = o.value("random_starts", s.random_starts);
        s.reflection_starts = o.value("reflection_starts", s.reflection_starts);
        s.probe_nm_iterations = o.value("probe_nm_iterations", s.probe_nm_iterations);
        s.probe_bfgs_iterations = o.value("probe_bfgs_iterations", s.probe_bfgs_iterations);
        s.polish_top = o.value("polish_top", s.polish_top);
        s.deep_nm_iterations = o.value("deep_nm_iterations", s.deep_nm_iterations);
        s.deep_bfgs_iterations = o.value("deep_bfgs_iterations", s.deep_bfgs_iterations);
        s.deep_restart_iterations = o.value("deep_restart_iterations", s.deep_restart_iterations);
        s.f_tolerance = o.value("f_tolerance", s.f_tolerance);
        s.seed = o.value("seed", s.seed);
    }
    cfg.compute_asymptotic_cov = j.value("compute_asymptotic_cov", true);
    require(cfg.lags >= 1, ErrorKind::Config, "lags must be at least 1");
    return cfg;
}

std::string estimator_config_to_json(const EstimatorConfig& cfg) {
    json o;
    o["lags"] = cfg.lags;
    o["transforms"] = json::parse(to_json(cfg.transforms));
    o["regime"] = regime_json(cfg.regime);
    o["weighting"] = weighting_name(cfg.weighting);
    o["backend"] = backend_name(cfg.backend);
    o["optimizer"] = json{{"random_starts", cfg.optimizer.random_starts},
                          {"reflection_starts", cfg.optimizer.reflection_starts},
                          {"probe_nm_iterations", cfg.optimizer.probe_nm_iterations},
                          {"probe_bfgs_iterations", cfg.optimizer.probe_bfgs_iterations},
                          {"polish_top", cfg.optimizer.polish_top},
                          {"deep_nm_iterations", cfg.optimizer.deep_nm_iterations},
                          {"deep_bfgs_iterations", cfg.optimizer.deep_bfgs_iterations},
                          {"deep_restart_iterations", cfg.optimizer.deep_restart_iterations},
                          {"f_tolerance", cfg.optimizer.f_tolerance},
                          {"seed", cfg.optimizer.seed}};
    o["compute_asymptotic_cov"] = cfg.compute_asymptotic_cov;
    return o.dump(2);
}

std::string estimation_result_to_json(const EstimationResult& r) {
    json o;
    o["n"] = r.n;
    o["p"] = r.p;
    json coef = json::array();
    for (const Matrix& m : r.phi) coef.push_back(matrix_rows(m));
    o["coefficients"] = std::move(coef);
    o["objective"] = r.objective_value;
    o["delta_used"] = r.delta_used;
    o["sample_size"] = r.sample_size;
    o["converged"] = r.converged;
    o["weak_identification"] = r.weak_identification;
    if (!r.phi.empty()) {
        Eigen::EigenSolver<Matrix> es(companion(r.phi), false);
        std::vector<double> moduli(es.eigenvalues().size());
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            moduli[i] = std::abs(es.eigenvalues()(i));
        std::sort(moduli.begin(), moduli.end());
        o["eigenvalue_moduli"] = moduli;
        try {  // classification refuses near-unit roots; moduli above still stand
            Classification cls = classify(r.phi);
            o["n_causal"] = cls.n_causal;
            o["n_noncausal"] = cls.n_noncausal;
        } catch (const Error&) {
            o["n_causal"] = nullptr;
            o["n_noncausal"] = nullptr;
        }
    }
    if (r.asymptotic_cov.size() > 0) o["asymptotic_covariance"] = matrix_rows(r.asymptotic_cov);
    json trace = json::array();
    for (const TraceEntry& t : r.trace)
        trace.push_back(json{{"stage", t.stage},
                             {"start_objective", t.start_objective},
                             {"end_objective", t.end_objective},
                             {"evaluations", t.evaluations}});
    o["trace"] = std::move(trace);
    o["warnings"] = r.warnings;
    return o.dump(2);
}

}  // namespace rgcov
