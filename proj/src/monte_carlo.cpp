#include "rgcov/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "json.hpp"

namespace rgcov {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepOutcome {
    Vector theta;       // empty on failure
    bool converged = false;
    bool identified = false;
};

RepOutcome run_replication(const Matrix& path, const StudyConfig& study,
                           const EstimatorConfig& cfg, int expected_causal,
                           int expected_noncausal) {
    RepOutcome out;
    try {
        EstimationResult fit = estimate(path, study.dgp.p, cfg);
        out.theta = fit.theta;
        out.converged = fit.converged;
        try {
            Classification cls = classify(fit.phi);
            out.identified =
                cls.n_causal == expected_causal && cls.n_noncausal == expected_noncausal;
        } catch (const Error&) {
            out.identified = false;  // roots pinned to the unit circle
        }
    } catch (const Error&) {
        out.converged = false;
    }
    return out;
}

void validate_study(const StudyConfig& s) {
    require(s.replications >= 1, ErrorKind::Config, "replication count must be at least 1");
    require(!s.sample_sizes.empty(), ErrorKind::Config, "sample-size grid is empty");
    require(!s.estimators.empty(), ErrorKind::Config, "estimator list is empty");
    require(s.burn >= s.dgp.p, ErrorKind::Config, "burn-in must cover the model order");
    bool any_grid = false;
    for (const StudyEstimator& e : s.estimators) any_grid = any_grid || e.follow_grid;
    require(!any_grid || !s.shrink_grid.empty(), ErrorKind::Config,
            "a grid-following estimator needs a non-empty shrinkage grid");
    for (double d : s.shrink_grid)
        require(std::isfinite(d) && d >= 0.0, ErrorKind::Config,
                "shrinkage grid values must be finite and non-negative");
    for (int t : s.sample_sizes)
        require(t > s.dgp.p + 4, ErrorKind::Config, "sample sizes must exceed the model order");
}

}  // namespace

StudyReport run_study(const StudyConfig& study) {
    validate_study(study);

    StudyReport report;
    report.config = study;
    report.theta0 = pack_theta(study.dgp.phi);
    if (study.expected_causal >= 0 && study.expected_noncausal >= 0) {
        report.expected_causal = study.expected_causal;
        report.expected_noncausal = study.expected_noncausal;
    } else {
        Classification cls = classify(study.dgp.phi);
        report.expected_causal = cls.n_causal;
        report.expected_noncausal = cls.n_noncausal;
    }

    const int m_total = study.replications;
    const int dim = static_cast<int>(report.theta0.size());

    for (int t_len : study.sample_sizes) {
        // Common seeded paths shared by every estimator/shrink cell at this T.
        std::vector<Matrix> paths(m_total);
        for (int m = 0; m < m_total; ++m)
            paths[m] = simulate(study.dgp, t_len, study.burn,
                                study.base_seed + static_cast<std::uint64_t>(m));

        for (const StudyEstimator& est : study.estimators) {
            std::vector<double> shrinks;
            if (est.follow_grid) {
                shrinks = study.shrink_grid;
            } else {
                shrinks = {est.config.regime.value};
            }
            for (std::size_t si = 0; si < shrinks.size(); ++si) {
                EstimatorConfig cfg = est.config;
                cfg.compute_asymptotic_cov = false;
                if (est.follow_grid) cfg.regime = ShrinkageRegime::fixed(shrinks[si]);

                std::vector<RepOutcome> outcomes(m_total);
                const int jobs = std::max(1, study.jobs);
                if (jobs == 1) {
                    for (int m = 0; m < m_total; ++m)
                        outcomes[m] = run_replication(paths[m], study, cfg,
                                                      report.expected_causal,
                                                      report.expected_noncausal);
                } else {
                    std::atomic<int> next{0};
                    auto worker = [&]() {
                        for (int m = next.fetch_add(1); m < m_total; m = next.fetch_add(1))
                            outcomes[m] = run_replication(paths[m], study, cfg,
                                                          report.expected_causal,
                                                          report.expected_noncausal);
                    };
                    std::vector<std::thread> threads;
                    for (int w = 0; w < jobs; ++w) threads.emplace_back(worker);
                    for (std::thread& th : threads) th.join();
                }

                // Deterministic aggregation in replication-index order.
                CellStats cell;
                cell.estimator = est.label;
                cell.sample_size = t_len;
                cell.shrink = shrinks[si];
                cell.grid_cell = est.follow_grid;
                cell.rep_theta = Matrix::Constant(dim, m_total, kNaN);
                cell.rep_identified.assign(m_total, 0);
                cell.rep_converged.assign(m_total, 0);

                Vector mean = Vector::Zero(dim);
                int used = 0;
                int identified = 0;
                for (int m = 0; m < m_total; ++m) {
                    const RepOutcome& o = outcomes[m];
                    cell.rep_identified[m] = o.identified ? 1 : 0;
                    cell.rep_converged[m] = o.converged ? 1 : 0;
                    if (o.identified) ++identified;
                    // A replication is usable when estimation produced a
                    // finite parameter vector; the convergence flag is kept
                    // per replication but does not exclude a finished fit
                    // (dropping slow-to-converge fits would selection-bias
                    // the bias/variance statistics).
                    if (o.theta.size() == dim && o.theta.allFinite()) {
                        cell.rep_theta.col(m) = o.theta;
                        mean += o.theta;
                        ++used;
                    }
                }
                cell.used = used;
                cell.failures = m_total - used;
                cell.degraded = cell.failures * 5 > m_total;  // > 20%
                cell.identification_rate =
                    static_cast<double>(identified) / static_cast<double>(m_total);

                if (used > 0) {
                    mean /= static_cast<double>(used);
                    cell.bias = mean - report.theta0;
                    Vector ssq = Vector::Zero(dim);
                    for (int m = 0; m < m_total; ++m) {
                        if (!cell.rep_theta.col(m).allFinite()) continue;
                        Vector d = cell.rep_theta.col(m) - mean;
                        ssq += d.cwiseProduct(d);
                    }
                    cell.variance =
                        used > 1 ? Vector(ssq / static_cast<double>(used - 1)) : Vector::Zero(dim);
                    cell.mse = cell.variance + cell.bias.cwiseProduct(cell.bias);
                    cell.avg_bias = cell.bias.mean();
                    cell.avg_abs_bias = cell.bias.cwiseAbs().mean();
                    cell.avg_var = cell.variance.mean();
                    cell.avg_mse = cell.mse.mean();
                } else {
                    cell.bias = Vector::Constant(dim, kNaN);
                    cell.variance = Vector::Constant(dim, kNaN);
                    cell.mse = Vector::Constant(dim, kNaN);
                    cell.avg_bias = cell.avg_abs_bias = cell.avg_var = cell.avg_mse = kNaN;
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

const char* select_metric_name(SelectMetric metric) {
    switch (metric) {
        case SelectMetric::BiasAbs: return "bias_abs";
        case SelectMetric::Var: return "var";
        case SelectMetric::Mse: return "mse";
        case SelectMetric::Identification: return "identification";
    }
    return "unknown";
}

std::vector<ShrinkSelection> select_shrinkage(const StudyReport& report, SelectMetric metric) {
    std::vector<ShrinkSelection> selections;
    for (const StudyEstimator& est : report.config.estimators) {
        for (int t_len : report.config.sample_sizes) {
            ShrinkSelection sel;
            sel.estimator = est.label;
            sel.sample_size = t_len;
            bool found = false;
            double best = 0.0;
            // Cells were pushed in ascending grid order, so a strict
            // comparison keeps the smaller shrinkage on ties.
            for (const CellStats& c : report.cells) {
                if (c.estimator != est.label || c.sample_size != t_len) continue;
                if (c.degraded) {
                    char note[96];
                    std::snprintf(note, sizeof(note),
                                  "cell shrink=%g excluded: degraded (%d failures)", c.shrink,
                                  c.failures);
                    sel.notes.push_back(note);
                    continue;
                }
                double value = 0.0;
                switch (metric) {
                    case SelectMetric::BiasAbs: value = std::abs(c.avg_bias); break;
                    case SelectMetric::Var: value = c.avg_var; break;
                    case SelectMetric::Mse: value = c.avg_mse; break;
                    case SelectMetric::Identification: value = c.identification_rate; break;
                }
                if (metric != SelectMetric::Identification && !std::isfinite(value)) continue;
                const bool better =
                    !found || (metric == SelectMetric::Identification ? value > best
                                                                      : value < best);
                if (better) {
                    found = true;
                    best = value;
                    sel.shrink = c.shrink;
                    sel.value = value;
                }
            }
            require(found, ErrorKind::Estimation,
                    "no usable cell for estimator '" + est.label + "' at the requested metric");
            selections.push_back(std::move(sel));
        }
    }
    return selections;
}

// ---------------------------------------------------------------------------
// JSON / CSV
// ---------------------------------------------------------------------------
namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(std::isfinite(v(i)) ? json(v(i)) : json(nullptr));
    return a;
}

}  // namespace

StudyConfig study_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw_error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    require(j.is_object(), ErrorKind::Config, "study config must be a JSON object");
    require(j.contains("dgp"), ErrorKind::Config, "study config needs a 'dgp' model");
    StudyConfig s;
    s.dgp = var_model_from_json(j["dgp"].dump());
    require(j.contains("estimators") && j["estimators"].is_array() && !j["estimators"].empty(),
            ErrorKind::Config, "study config needs a non-empty 'estimators' array");
    for (const json& e : j["estimators"]) {
        StudyEstimator se;
        se.label = e.value("label", std::string("estimator"));
        require(e.contains("config"), ErrorKind::Config,
                "each study estimator needs a 'config' object");
        se.config = estimator_config_from_json(e["config"].dump());
        se.follow_grid = e.value("follow_grid", true);
        s.estimators.push_back(std::move(se));
    }
    s.replications = j.value("replications", 100);
    if (j.contains("sample_sizes"))
        s.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
    if (j.contains("shrink_grid"))
        s.shrink_grid = j["shrink_grid"].get<std::vector<double>>();
    s.base_seed = j.value("base_seed", 1ull);
    if (j.contains("expected_split")) {
        const json& sp = j["expected_split"];
        require(sp.is_array() && sp.size() == 2, ErrorKind::Config,
                "expected_split must be [n_causal, n_noncausal]");
        s.expected_causal = sp[0].get<int>();
        s.expected_noncausal = sp[1].get<int>();
    }
    s.burn = j.value("burn", 200);
    s.jobs = j.value("jobs", 1);
    return s;
}

std::string study_config_to_json(const StudyConfig& s) {
    json o;
    o["dgp"] = json::parse(to_json(s.dgp));
    json ests = json::array();
    for (const StudyEstimator& e : s.estimators)
        ests.push_back(json{{"label", e.label},
                            {"config", json::parse(estimator_config_to_json(e.config))},
                            {"follow_grid", e.follow_grid}});
    o["estimators"] = std::move(ests);
    o["replications"] = s.replications;
    o["sample_sizes"] = s.sample_sizes;
    o["shrink_grid"] = s.shrink_grid;
    o["base_seed"] = s.base_seed;
    if (s.expected_causal >= 0 && s.expected_noncausal >= 0)
        o["expected_split"] = json::array({s.expected_causal, s.expected_noncausal});
    o["burn"] = s.burn;
    o["jobs"] = s.jobs;
    return o.dump(2);
}

std::string study_report_to_json(const StudyReport& r, bool include_raw) {
    json o;
    o["config"] = json::parse(study_config_to_json(r.config));
    o["theta0"] = vector_json(r.theta0);
    o["expected_split"] = json::array({r.expected_causal, r.expected_noncausal});
    json cells = json::array();
    for (const CellStats& c : r.cells) {
        json cj;
        cj["estimator"] = c.estimator;
        cj["sample_size"] = c.sample_size;
        cj["shrink"] = c.shrink;
        cj["grid_cell"] = c.grid_cell;
        cj["bias"] = vector_json(c.bias);
        cj["variance"] = vector_json(c.variance);
        cj["mse"] = vector_json(c.mse);
        cj["avg_bias"] = std::isfinite(c.avg_bias) ? json(c.avg_bias) : json(nullptr);
        cj["avg_abs_bias"] = std::isfinite(c.avg_abs_bias) ? json(c.avg_abs_bias) : json(nullptr);
        cj["avg_var"] = std::isfinite(c.avg_var) ? json(c.avg_var) : json(nullptr);
        cj["avg_mse"] = std::isfinite(c.avg_mse) ? json(c.avg_mse) : json(nullptr);
        cj["identification_rate"] = c.identification_rate;
        cj["failures"] = c.failures;
        cj["used"] = c.used;
        cj["degraded"] = c.degraded;
        if (include_raw) {
            json reps = json::array();
            for (Eigen::Index m = 0; m < c.rep_theta.cols(); ++m) {
                json rj;
                rj["converged"] = static_cast<bool>(c.rep_converged[m]);
                rj["identified"] = static_cast<bool>(c.rep_identified[m]);
                rj["theta"] = vector_json(c.rep_theta.col(m));
                reps.push_back(std::move(rj));
            }
            cj["replications"] = std::move(reps);
        }
        cells.push_back(std::move(cj));
    }
    o["cells"] = std::move(cells);
    return o.dump(2);
}

std::string study_report_to_csv(const StudyReport& r) {
    std::string out = "estimator,sample_size,shrink,metric,value\n";
    char line[256];
    const auto emit = [&](const CellStats& c, const char* metric, double value) {
        std::snprintf(line, sizeof(line), "%s,%d,%.17g,%s,%.17g\n", c.estimator.c_str(),
                      c.sample_size, c.shrink, metric, value);
        out += line;
    };
    for (const CellStats& c : r.cells) {
        emit(c, "avg_bias", c.avg_bias);
        emit(c, "avg_abs_bias", c.avg_abs_bias);
        emit(c, "avg_var", c.avg_var);
        emit(c, "avg_mse", c.avg_mse);
        emit(c, "identification_rate", c.identification_rate);
        emit(c, "failures", static_cast<double>(c.failures));
        emit(c, "used", static_cast<double>(c.used));
        emit(c, "degraded", c.degraded ? 1.0 : 0.0);
    }
    return out;
}

}  // namespace rgcov
