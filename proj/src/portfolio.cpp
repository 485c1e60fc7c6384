#include "rgcov/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "json.hpp"
#include "rgcov/io.hpp"

namespace rgcov {

int default_knots(Eigen::Index t_len) {
    return std::max<int>(2, static_cast<int>(t_len / 24));
}

DetrendResult detrend(const Matrix& series, int knots) {
    const auto t_len = series.cols();
    const auto m = series.rows();
    require(m >= 1, ErrorKind::Domain, "series panel is empty");
    require(t_len >= 4, ErrorKind::Domain, "detrending needs at least 4 points");
    require(knots >= 2, ErrorKind::Domain, "detrending needs at least 2 knots");
    require(series.allFinite(), ErrorKind::Data, "series contains non-finite values");

    const int interior = knots - 2;
    const int n_basis = 4 + interior;
    require(t_len > n_basis, ErrorKind::Domain,
            "too few points for the requested knot count");

    // Design matrix on x in [0, 1]: cubic polynomial plus truncated cubics.
    Matrix design(t_len, n_basis);
    const double denom = static_cast<double>(t_len - 1);
    for (Eigen::Index t = 0; t < t_len; ++t) {
        const double x = static_cast<double>(t) / denom;
        design(t, 0) = 1.0;
        design(t, 1) = x;
        design(t, 2) = x * x;
        design(t, 3) = x * x * x;
        for (int l = 0; l < interior; ++l) {
            const double knot = static_cast<double>(l + 1) / (knots - 1);
            const double u = x - knot;
            design(t, 4 + l) = u > 0.0 ? u * u * u : 0.0;
        }
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);

    DetrendResult out;
    out.detrended = Matrix(m, t_len);
    out.trend = Matrix(m, t_len);
    out.scale = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Vector row = series.row(i).transpose();
        Vector coef = qr.solve(row);
        Vector fit = design * coef;
        Vector resid = row - fit;
        const double sd =
            t_len > 1 ? std::sqrt(resid.squaredNorm() / static_cast<double>(t_len - 1)) : 0.0;
        const double floor = 1e-12 * std::max(1.0, row.cwiseAbs().maxCoeff());
        require(sd > floor, ErrorKind::ZeroVariance,
                "detrended series has (near) zero variance; nothing to scale");
        out.trend.row(i) = fit.transpose();
        out.detrended.row(i) = (resid / sd).transpose();
        out.scale(i) = sd;
    }
    return out;
}

BacktestResult backtest(const PricePanel& panel, const std::vector<AllocationRow>& rows,
                        double initial_value) {
    const auto m = panel.prices.rows();
    const auto t_len = panel.prices.cols();
    require(m >= 1 && t_len >= 2, ErrorKind::Data, "price panel needs assets and >= 2 periods");
    require(panel.prices.allFinite() && (panel.prices.array() > 0.0).all(), ErrorKind::Data,
            "prices must be positive and finite");
    require(initial_value > 0.0 && std::isfinite(initial_value), ErrorKind::Config,
            "initial capital must be positive");
    require(!rows.empty(), ErrorKind::Config, "no allocation rows supplied");
    for (const AllocationRow& row : rows) {
        require(row.coefficients.size() == m, ErrorKind::Config,
                "allocation row length does not match the asset count");
        require(row.coefficients.cwiseAbs().maxCoeff() > 0.0, ErrorKind::Config,
                "allocation row is identically zero");
    }

    Matrix log_prices = panel.prices.array().log().matrix();

    BacktestResult result;
    result.initial_value = initial_value;
    for (const AllocationRow& row : rows) {
        PortfolioPath path;
        path.label = row.label;
        path.scale = Vector(t_len - 1);
        path.weights = Matrix(m, t_len - 1);
        path.returns = Vector::Zero(t_len);
        path.cumulative = Vector::Zero(t_len);
        path.value = Vector(t_len);
        path.value(0) = initial_value;

        const Vector abs_coef = row.coefficients.cwiseAbs();
        for (Eigen::Index t = 0; t + 1 < t_len; ++t) {
            const double gross = abs_coef.dot(panel.prices.col(t));
            require(gross > 0.0, ErrorKind::Domain,
                    "degenerate allocation: zero gross position value at period " +
                        std::to_string(t));
            const double s = path.value(t) / gross;
            path.scale(t) = s;
            path.weights.col(t) = s * row.coefficients;
            const double r =
                s * row.coefficients.dot(log_prices.col(t + 1) - log_prices.col(t));
            path.returns(t + 1) = r;
            path.value(t + 1) = path.value(t) + r;
            path.cumulative(t + 1) = path.cumulative(t) + r;
        }
        result.portfolios.push_back(std::move(path));
    }
    return result;
}

std::vector<AllocationRow> allocations_from_split(const CausalNoncausalSplit& split) {
    std::vector<AllocationRow> rows;
    char label[32];
    for (int i = 0; i < split.n1; ++i) {
        std::snprintf(label, sizeof(label), "causal_%d", i + 1);
        rows.push_back({split.a_row1.row(i).transpose(), label});
    }
    for (int i = 0; i < split.n2; ++i) {
        std::snprintf(label, sizeof(label), "noncausal_%d", i + 1);
        rows.push_back({split.a_row2.row(i).transpose(), label});
    }
    return rows;
}

PricePanel price_panel_from_csv(const std::string& text) {
    SeriesTable table = series_from_csv(text);
    PricePanel panel;
    panel.assets = table.names;
    panel.prices = table.values;
    panel.dates = table.dates;
    require((panel.prices.array() > 0.0).all(), ErrorKind::Data,
            "price panel contains non-positive prices");
    return panel;
}

std::string backtest_to_csv(const BacktestResult& result,
                            const std::vector<std::string>& dates) {
    std::string out = "date,portfolio,return,cumulative,value\n";
    char line[256];
    for (const PortfolioPath& path : result.portfolios) {
        for (Eigen::Index t = 0; t < path.returns.size(); ++t) {
            std::string date = t < static_cast<Eigen::Index>(dates.size())
                                   ? dates[t]
                                   : std::to_string(t + 1);
            std::snprintf(line, sizeof(line), "%s,%s,%.17g,%.17g,%.17g\n", date.c_str(),
                          path.label.c_str(), path.returns(t), path.cumulative(t),
                          path.value(t));
            out += line;
        }
    }
    return out;
}

std::string allocations_to_json(const std::vector<AllocationRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const AllocationRow& row : rows) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (Eigen::Index j = 0; j < row.coefficients.size(); ++j)
            coeffs.push_back(row.coefficients(j));
        arr.push_back(nlohmann::json{{"label", row.label}, {"coefficients", coeffs}});
    }
    return arr.dump(2);
}

std::vector<AllocationRow> allocations_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw_error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    require(j.is_array() && !j.empty(), ErrorKind::Config,
            "allocations must be a non-empty JSON array");
    std::vector<AllocationRow> rows;
    for (const nlohmann::json& rj : j) {
        require(rj.is_object() && rj.contains("coefficients"), ErrorKind::Config,
                "each allocation needs a 'coefficients' array");
        AllocationRow row;
        row.label = rj.value("label", std::string("custom"));
        const auto coeffs = rj["coefficients"].get<std::vector<double>>();
        row.coefficients = Eigen::Map<const Vector>(coeffs.data(), coeffs.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace rgcov
