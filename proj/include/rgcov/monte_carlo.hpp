#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgcov/estimator.hpp"
#include "rgcov/types.hpp"
#include "rgcov/var_process.hpp"

namespace rgcov {

// ---------------------------------------------------------------------------
// Replication studies: seeded sweeps over (estimator, T, shrinkage) grids on
// a simulated DGP, reporting bias / variance / MSE (element-wise, then
// averaged over all coefficient entries) and identification frequencies.
// ---------------------------------------------------------------------------
struct StudyEstimator {
    std::string label;
    EstimatorConfig config;
    // When true, the shrinkage grid of the study replaces config.regime with
    // Fixed(delta) for each grid value; when false, config.regime is used
    // as-is and the cell is recorded under its effective value.
    bool follow_grid = true;
};

struct StudyConfig {
    VarModel dgp;
    std::vector<StudyEstimator> estimators;
    int replications = 100;            // M
    std::vector<int> sample_sizes;     // T grid
    std::vector<double> shrink_grid;   // delta grid for follow_grid estimators
    std::uint64_t base_seed = 1;
    int expected_causal = -1;          // -1: derive the split from the DGP
    int expected_noncausal = -1;
    int burn = 200;
    int jobs = 1;                      // worker threads (deterministic aggregation)
};

struct CellStats {
    std::string estimator;
    int sample_size = 0;
    double shrink = 0.0;
    bool grid_cell = true;             // false when the estimator kept its own regime

    // Element-wise aggregates over the packed coefficient vector, computed
    // from the converged replications only.
    Vector bias;                      // mean(theta-hat) - theta0
    Vector variance;                  // unbiased per-entry variance
    Vector mse;                       // variance + bias^2, element-wise

    double avg_bias = 0.0;            // mean of signed entries of `bias`
    double avg_abs_bias = 0.0;        // mean of |bias| entries
    double avg_var = 0.0;
    double avg_mse = 0.0;
    double identification_rate = 0.0;  // over ALL replications
    int failures = 0;                 // errored or non-converged replications
    int used = 0;                     // replications in the moment statistics
    bool degraded = false;            // failures > 20% of M

    // Replication-level raw table: one column per replication; failed
    // replications hold NaN.  Row order matches the packed theta layout.
    Matrix rep_theta;
    std::vector<char> rep_identified;
    std::vector<char> rep_converged;
};

struct StudyReport {
    StudyConfig config;
    Vector theta0;                    // packed true coefficients
    int expected_causal = 0;
    int expected_noncausal = 0;
    std::vector<CellStats> cells;
};

StudyReport run_study(const StudyConfig& config);

enum class SelectMetric { BiasAbs, Var, Mse, Identification };

struct ShrinkSelection {
    std::string estimator;
    int sample_size = 0;
    double shrink = 0.0;
    double value = 0.0;               // metric at the selected cell
    std::vector<std::string> notes;   // e.g. degraded cells excluded
};

// Best shrinkage per (estimator, T): argmin of the metric (argmax for
// identification), ties broken toward the smaller shrinkage, degraded cells
// excluded with a note.
std::vector<ShrinkSelection> select_shrinkage(const StudyReport& report, SelectMetric metric);

const char* select_metric_name(SelectMetric metric);

StudyConfig study_config_from_json(const std::string& text);
std::string study_config_to_json(const StudyConfig& config);
// `include_raw` controls whether the per-replication table is embedded.
std::string study_report_to_json(const StudyReport& report, bool include_raw = true);
// Tidy CSV: one row per estimator x T x shrink x metric.
std::string study_report_to_csv(const StudyReport& report);

}  // namespace rgcov
