#include "rgcov/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "rgcov/matrix.hpp"
#include "rgcov/prob.hpp"
#include "rgcov/random.hpp"
#include "rgcov/var_process.hpp"

namespace rgcov {

const char* law_name(LawKind law) {
    switch (law) {
        case LawKind::ChiSq: return "chi_square";
        case LawKind::Mixture: return "mixture";
        case LawKind::NormalApprox: return "normal_approx";
    }
    return "unknown";
}

std::vector<double> eigen_product_weights(const Matrix& gamma0, double delta) {
    require(delta >= 0.0 && std::isfinite(delta), ErrorKind::Config,
            "shrinkage level must be finite and non-negative");
    SpectralDecomposition eig = sym_eigen(gamma0);
    const int k = static_cast<int>(eig.values.size());
    std::vector<double> mu(k);
    for (int i = 0; i < k; ++i) {
        const double lam = std::max(eig.values(i), 0.0);
        require(lam + delta > 0.0, ErrorKind::NearSingular,
                "lag-0 autocovariance has a non-positive eigenvalue and delta is zero");
        mu[i] = lam / (lam + delta);
    }
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(k) * k);
    for (int j = 0; j < k; ++j)
        for (int l = 0; l < k; ++l) weights.push_back(mu[j] * mu[l]);
    return weights;
}

MixturePValue mixture_pvalue(double statistic, const std::vector<double>& weights,
                             int per_weight_df, long draws, std::uint64_t seed) {
    require(!weights.empty(), ErrorKind::Config, "mixture weight vector is empty");
    for (double w : weights)
        require(w > 0.0 && std::isfinite(w), ErrorKind::Config,
                "mixture weights must be positive and finite");
    require(per_weight_df >= 1, ErrorKind::Config, "per-component degrees of freedom must be >= 1");
    require(draws >= 10000, ErrorKind::Config, "mixture tail estimation needs at least 1e4 draws");
    require(std::isfinite(statistic), ErrorKind::Domain, "statistic must be finite");

    Rng rng(seed);
    long exceed = 0;
    for (long d = 0; d < draws; ++d) {
        double s = 0.0;
        for (double w : weights) s += w * rng.chi_square(per_weight_df);
        if (s > statistic) ++exceed;
    }
    MixturePValue out;
    out.p = static_cast<double>(exceed) / static_cast<double>(draws);
    out.se = std::sqrt(std::max(out.p * (1.0 - out.p), 1.0 / static_cast<double>(draws)) /
                       static_cast<double>(draws));
    return out;
}

namespace {

// Shared statistic/law assembly for tests without estimated parameters.
TestResult independence_core(const Matrix& v, int lags, double delta,
                             const TestOptions& options) {
    GcovParts parts = gcov_objective_parts(v, lags, delta);
    TestResult r;
    r.lags = lags;
    r.k = static_cast<int>(v.rows());
    r.dim_theta = 0;
    r.delta_used = delta;
    r.sample_size = static_cast<std::size_t>(v.cols());
    r.statistic = std::max(0.0, static_cast<double>(v.cols()) * parts.objective);
    if (delta == 0.0) {
        r.law = LawKind::ChiSq;
        r.df = r.k * r.k * lags;
        r.p_value = prob::chi2_sf(r.statistic, r.df);
        r.p_se = 0.0;
    } else {
        r.law = LawKind::Mixture;
        r.per_weight_df = lags;
        r.weights = eigen_product_weights(parts.gamma0, delta);
        // Zero weights carry no mass; drop them for the tail simulation.
        std::vector<double> active;
        active.reserve(r.weights.size());
        for (double w : r.weights)
            if (w > 0.0) active.push_back(w);
        require(!active.empty(), ErrorKind::NearSingular,
                "all mixture weights vanished; the lag-0 autocovariance is degenerate");
        if (active.size() != r.weights.size())
            r.notes.push_back("zero-mass mixture components dropped from the tail simulation");
        MixturePValue mp =
            mixture_pvalue(r.statistic, active, lags, options.mc_draws, options.seed);
        r.p_value = mp.p;
        r.p_se = mp.se;
    }
    return r;
}

}  // namespace

TestResult rnlsd_transformed(const Matrix& v, int lags, double delta,
                             const TestOptions& options) {
    require(lags >= 1, ErrorKind::Config, "lag window H must be at least 1");
    require(v.cols() > lags, ErrorKind::Data, "series shorter than the lag window");
    return independence_core(v, lags, delta, options);
}

TestResult rnlsd(const Matrix& data, const TransformSpec& spec, int lags, double delta,
                 const TestOptions& options) {
    require(data.allFinite(), ErrorKind::Data, "data panel contains non-finite values");
    TransformedSeries ts = apply(data, spec);
    return rnlsd_transformed(ts.values, lags, delta, options);
}

TestResult rgcov_spec_test(const EstimationResult& result, int lags,
                           const ShrinkageRegime& regime, const TestOptions& options) {
    require(lags >= 1, ErrorKind::Config, "lag window H must be at least 1");
    require(result.transformed.size() > 0, ErrorKind::Data,
            "estimation result carries no transformed residual series");
    const Matrix& v = result.transformed;
    const int k = static_cast<int>(v.rows());
    const auto tv = v.cols();
    const int dim_theta = result.p * result.n * result.n;
    const int df = k * k * lags - dim_theta;
    require(df > 0, ErrorKind::Config,
            "specification test needs K^2 * H above the parameter dimension");
    const double delta = regime.effective(static_cast<std::size_t>(tv));

    if (dim_theta == 0) return independence_core(v, lags, delta, options);

    require(result.converged, ErrorKind::Estimation,
            "specification test requires a converged estimation result");

    TestResult r;
    r.lags = lags;
    r.k = k;
    r.dim_theta = dim_theta;
    r.delta_used = delta;
    r.sample_size = static_cast<std::size_t>(tv);
    r.statistic =
        std::max(0.0, static_cast<double>(tv) * gcov_objective(v, lags, delta));

    if (regime.kind == RegimeKind::OverT || delta == 0.0) {
        r.law = LawKind::ChiSq;
        r.df = df;
        r.p_value = prob::chi2_sf(r.statistic, df);
        r.p_se = 0.0;
        return r;
    }

    // Fixed delta > 0 with estimated parameters: the null law is a positive
    // chi-square mixture whose weights have no closed form here; estimate the
    // tail by a parametric bootstrap from the fitted model.
    require(options.data != nullptr && options.estimator != nullptr, ErrorKind::Config,
            "fixed-shrinkage specification test needs options.data and options.estimator "
            "for the parametric bootstrap");
    const Matrix& y = *options.data;
    const int burn = options.bootstrap_burn;
    const int b_total = options.bootstrap_replications;
    require(b_total >= 19, ErrorKind::Config, "bootstrap needs at least 19 replications");

    VarModel model;
    model.n = result.n;
    model.p = result.p;
    model.phi = result.phi;

    const Matrix& resid = result.residuals;
    const auto n_resid = resid.cols();
    const auto t_len = y.cols();

    std::vector<double> boot;
    boot.reserve(b_total);
    int attempted = 0;
    for (int b = 0; b < b_total; ++b) {
        ++attempted;
        Rng rng(options.seed + 1000003ull * static_cast<std::uint64_t>(b + 1));
        Matrix eps(result.n, t_len + 2 * static_cast<Eigen::Index>(burn));
        for (Eigen::Index t = 0; t < eps.cols(); ++t) {
            const auto pick = static_cast<Eigen::Index>(rng.uniform() * n_resid);
            eps.col(t) = resid.col(std::min(pick, n_resid - 1));
        }
        try {
            Matrix ystar = simulate_with_innovations(model, eps, static_cast<int>(t_len), burn);
            EstimatorConfig cfg = *options.estimator;
            cfg.compute_asymptotic_cov = false;
            EstimationResult fit = estimate(ystar, result.p, cfg);
            boot.push_back(std::max(
                0.0, static_cast<double>(fit.transformed.cols()) *
                         gcov_objective(fit.transformed, lags, delta)));
        } catch (const Error&) {
            // A failed replication carries no information about the null law.
        }
    }
    require(boot.size() * 2 >= static_cast<std::size_t>(b_total), ErrorKind::Estimation,
            "more than half of the bootstrap replications failed");

    long exceed = 0;
    double mean = 0.0;
    for (double s : boot) {
        if (s >= r.statistic) ++exceed;
        mean += s;
    }
    const auto nb = static_cast<double>(boot.size());
    mean /= nb;
    double var = 0.0;
    for (double s : boot) var += (s - mean) * (s - mean);
    var = boot.size() > 1 ? var / (nb - 1.0) : 0.0;

    r.law = LawKind::Mixture;
    r.per_weight_df = std::max(
        1, static_cast<int>(std::lround(var > 0.0 ? 2.0 * mean * mean / var : 1.0)));
    r.weights = {var > 0.0 ? var / (2.0 * mean) : mean};
    r.p_value = (1.0 + static_cast<double>(exceed)) / (nb + 1.0);
    r.p_se = std::sqrt(std::max(r.p_value * (1.0 - r.p_value), 1.0 / nb) / nb);
    char note[160];
    std::snprintf(note, sizeof(note),
                  "p-value from a parametric bootstrap (%zu of %d replications usable); "
                  "law is a two-moment chi-square summary of the bootstrap null sample",
                  boot.size(), attempted);
    r.notes.push_back(note);
    return r;
}

TestResult zeta_approx(double statistic, int nu) {
    require(std::isfinite(statistic) && statistic >= 0.0, ErrorKind::Domain,
            "statistic must be finite and non-negative");
    require(nu >= 1, ErrorKind::Config, "degrees of freedom must be at least 1");
    TestResult r;
    r.law = LawKind::NormalApprox;
    r.statistic = statistic;
    r.df = nu;
    r.z = std::sqrt(2.0 * statistic) - std::sqrt(2.0 * nu - 1.0);
    r.p_value = prob::normal_sf(r.z);
    r.p_se = 0.0;
    r.notes.push_back("z = sqrt(2*statistic) - sqrt(2*nu - 1)");
    if (nu <= 30)
        r.notes.push_back("normal approximation is intended for more than 30 degrees of freedom");
    return r;
}

std::string test_result_to_json(const TestResult& r) {
    nlohmann::json o;
    o["statistic"] = r.statistic;
    o["law"] = law_name(r.law);
    o["p_value"] = r.p_value;
    o["p_se"] = r.p_se;
    o["lags"] = r.lags;
    o["k"] = r.k;
    o["dim_theta"] = r.dim_theta;
    o["delta_used"] = r.delta_used;
    o["sample_size"] = r.sample_size;
    if (r.law == LawKind::ChiSq) o["df"] = r.df;
    if (r.law == LawKind::Mixture) {
        o["weights"] = r.weights;
        o["per_weight_df"] = r.per_weight_df;
    }
    if (r.law == LawKind::NormalApprox) {
        o["nu"] = r.df;
        o["z"] = r.z;
    }
    o["notes"] = r.notes;
    return o.dump(2);
}

}  // namespace rgcov
