#pragma once

#include <string>
#include <vector>

#include "rgcov/types.hpp"
#include "rgcov/var_process.hpp"

namespace rgcov {

// ---------------------------------------------------------------------------
// Price panel: m asset rows, T time columns.  Prices must be positive so
// log-returns exist.  Dates are optional pass-through labels for CSV output.
// ---------------------------------------------------------------------------
struct PricePanel {
    std::vector<std::string> assets;
    Matrix prices;                    // m x T
    std::vector<std::string> dates;   // empty, or one label per column
};

struct AllocationRow {
    Vector coefficients;              // one weight per asset
    std::string label;                // causal_i / noncausal_i / custom
};

// One backtested portfolio path.  Period indices are 0-based: scale[t] and
// weights.col(t) are formed at time t (t = 0..T-2); returns[t] accrues over
// (t-1, t] with returns[0] = 0; value[t] is the capital after period t.
struct PortfolioPath {
    std::string label;
    Vector scale;        // T-1 entries: s_t = V_t / sum_j |a_j| * p_{j,t}
    Matrix weights;      // m x (T-1): w_{j,t} = s_t * a_j  (negative = short)
    Vector returns;      // T entries, returns[0] = 0
    Vector cumulative;   // prefix sums of returns
    Vector value;        // T entries, value[0] = v1
};

struct BacktestResult {
    double initial_value = 0.0;
    std::vector<PortfolioPath> portfolios;
};

// ---------------------------------------------------------------------------
// Detrending: per-row cubic regression spline on a truncated-power basis
// {1, x, x^2, x^3, (x - knot)^3_+} with `knots` equally spaced knots
// (endpoints included), x rescaled to [0, 1].  The residual is divided by
// its sample standard deviation, so series*[i] = (series[i] - trend[i]) /
// scale[i] and the input reconstructs as detrended * scale + trend.
// ---------------------------------------------------------------------------
struct DetrendResult {
    Matrix detrended;    // m x T, unit sample variance per row
    Matrix trend;        // m x T fitted spline
    Vector scale;        // per-row standard deviation of the raw residual
};

DetrendResult detrend(const Matrix& series, int knots);

// One knot per 24 observations, never fewer than 2.
int default_knots(Eigen::Index t_len);

// Rolling budget-constrained strategy: at each period the row coefficients
// are scaled so the gross position value equals current capital, and the
// next period's return aggregates asset log-returns with those weights.
BacktestResult backtest(const PricePanel& panel, const std::vector<AllocationRow>& rows,
                        double initial_value);

// Rows of the decomposition maps: one allocation per row of A^1 (labeled
// causal_i) and of A^2 (labeled noncausal_i).
std::vector<AllocationRow> allocations_from_split(const CausalNoncausalSplit& split);

// CSV bridges.
PricePanel price_panel_from_csv(const std::string& text);
std::string backtest_to_csv(const BacktestResult& result, const std::vector<std::string>& dates);
std::string allocations_to_json(const std::vector<AllocationRow>& rows);
std::vector<AllocationRow> allocations_from_json(const std::string& text);

}  // namespace rgcov
