// Command-line front door: simulate, estimate, test, mc, decompose, backtest.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rgcov/dependence.hpp"
#include "rgcov/estimator.hpp"
#include "rgcov/io.hpp"
#include "rgcov/kernels.hpp"
#include "rgcov/monte_carlo.hpp"
#include "rgcov/portfolio.hpp"
#include "rgcov/transforms.hpp"
#include "rgcov/types.hpp"
#include "rgcov/var_process.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using rgcov::Error;
using rgcov::ErrorKind;
using rgcov::Matrix;

int log_level() {  // 0 quiet, 1 info, 2 debug
    const char* env = std::getenv("RGCOV_LOG");
    if (!env) return 0;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[rgcov] %s\n", msg.c_str());
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Domain:
            return 1;  // usage
        case ErrorKind::Data:
            return 2;  // data
        case ErrorKind::NearSingular:
        case ErrorKind::UnitRoot:
        case ErrorKind::NotDiagonalizable:
        case ErrorKind::ZeroVariance:
        case ErrorKind::Estimation:
            return 3;  // numerical
        case ErrorKind::Internal:
            return 4;
    }
    return 4;
}

// Every run emits exactly one manifest describing command, input digest,
// seed, version, timing, and produced outputs.
struct RunContext {
    std::string command;
    std::string digest_payload;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::string manifest_path;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void absorb(const std::string& tag, const std::string& content) {
        digest_payload += tag;
        digest_payload += '\x1f';
        digest_payload += content;
        digest_payload += '\x1e';
    }
    void absorb_file(const std::string& tag, const std::string& path,
                     const std::string& content) {
        absorb(tag + ":" + path, content);
    }

    void finish() {
        const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        nlohmann::json m;
        m["command"] = command;
        m["config_digest"] = rgcov::content_digest(digest_payload);
        m["seed"] = seed;
        m["version"] = kVersion;
        m["wall_ms"] = wall;
        m["outputs"] = outputs;
        m["kernel"] = rgcov::kernels::active_kernel_name();
        std::string path = manifest_path;
        if (path.empty())
            path = outputs.empty() ? command + ".manifest.json"
                                   : outputs.front() + ".manifest.json";
        rgcov::write_text_file(path, m.dump(2) + "\n");
        log_info("manifest written to " + path);
    }
};

std::vector<std::string> index_dates(Eigen::Index t_len) {
    std::vector<std::string> dates(static_cast<std::size_t>(t_len));
    for (Eigen::Index t = 0; t < t_len; ++t)
        dates[static_cast<std::size_t>(t)] = std::to_string(t + 1);
    return dates;
}

nlohmann::json matrix_rows_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Shared estimator-config assembly for the estimate/test commands: start
// from --config when given, then apply flag overrides.
struct EstimatorFlags {
    std::string config_path;
    int lags = 0;            // 0: keep config/default
    std::string transforms;  // empty: keep config/default
    double delta = -1.0;     // <0: keep
    double eta = -1.0;       // <0: keep
    std::uint64_t seed = 0;
    bool seed_set = false;
};

rgcov::EstimatorConfig build_estimator_config(const EstimatorFlags& flags, RunContext& ctx) {
    rgcov::EstimatorConfig cfg;
    cfg.lags = 2;
    cfg.transforms = rgcov::named_battery();
    if (!flags.config_path.empty()) {
        const std::string text = rgcov::read_text_file(flags.config_path);
        ctx.absorb_file("config", flags.config_path, text);
        cfg = rgcov::estimator_config_from_json(text);
    }
    if (flags.lags > 0) cfg.lags = flags.lags;
    if (!flags.transforms.empty())
        cfg.transforms = rgcov::transform_spec_from_csv(flags.transforms);
    rgcov::require(!(flags.delta >= 0.0 && flags.eta >= 0.0), ErrorKind::Config,
                   "--delta and --eta are mutually exclusive");
    if (flags.delta >= 0.0) cfg.regime = rgcov::ShrinkageRegime::fixed(flags.delta);
    if (flags.eta >= 0.0) cfg.regime = rgcov::ShrinkageRegime::over_t(flags.eta);
    if (flags.seed_set) cfg.optimizer.seed = flags.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Mixed causal-noncausal VAR toolkit: shrinkage-regularized generalized covariance "
        "estimation, serial-dependence tests, simulation studies, decomposition, and "
        "portfolio backtests"};
    app.require_subcommand(1);
    std::function<void(RunContext&)> run;

    // ----------------------------------------------------------------- simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a VAR model to CSV");
    {
        auto model_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto t_len = std::make_shared<int>(0);
        auto burn = std::make_shared<int>(200);
        auto seed = std::make_shared<std::uint64_t>(1);
        sim->add_option("--model", *model_path, "Model JSON file")->required();
        sim->add_option("--length", *t_len, "Emitted sample length")->required();
        sim->add_option("--burn", *burn, "Discarded periods at each end");
        sim->add_option("--seed", *seed, "Innovation seed");
        sim->add_option("--out", *out_path, "Output CSV path")->required();
        sim->callback([=, &run]() {
            run = [=](RunContext& ctx) {
                const std::string text = rgcov::read_text_file(*model_path);
                ctx.absorb_file("model", *model_path, text);
                ctx.absorb("length", std::to_string(*t_len));
                ctx.absorb("burn", std::to_string(*burn));
                ctx.seed = *seed;
                rgcov::VarModel model = rgcov::var_model_from_json(text);
                Matrix y = rgcov::simulate(model, *t_len, *burn, *seed);
                rgcov::SeriesTable table;
                for (int i = 1; i <= model.n; ++i) table.names.push_back("y" + std::to_string(i));
                table.dates = index_dates(y.cols());
                table.values = y;
                rgcov::write_text_file(*out_path, rgcov::series_to_csv(table));
                ctx.outputs.push_back(*out_path);
            };
        });
    }

    // ----------------------------------------------------------------- estimate
    auto* est = app.add_subcommand("estimate", "Estimate VAR coefficients from CSV data");
    {
        auto data_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto order = std::make_shared<int>(1);
        auto detrend_knots = std::make_shared<int>(0);
        auto bootstrap = std::make_shared<int>(0);
        auto flags = std::make_shared<EstimatorFlags>();
        est->add_option("--data", *data_path, "Input CSV panel")->required();
        est->add_option("--order", *order, "Autoregressive order p")->required();
        est->add_option("--config", flags->config_path, "Estimator config JSON file");
        est->add_option("--lags", flags->lags, "Lag window H override");
        est->add_option("--transforms", flags->transforms,
                        "Transform list override, e.g. linear,square,powerexp:2:0.5");
        est->add_option("--delta", flags->delta, "Fixed shrinkage level override");
        est->add_option("--eta", flags->eta, "Vanishing shrinkage (eta/T) override");
        auto* seed_opt = est->add_option("--seed", flags->seed, "Optimizer seed override");
        est->add_option("--detrend", *detrend_knots,
                        "Detrend each series first (cubic spline with this many knots)");
        est->add_option("--bootstrap", *bootstrap,
                        "Attach a fixed-shrinkage specification test with this many "
                        "bootstrap replications");
        est->add_option("--out", *out_path, "Output JSON path")->required();
        est->callback([=, &run]() {
            flags->seed_set = seed_opt->count() > 0;
            run = [=](RunContext& ctx) {
                const std::string csv = rgcov::read_text_file(*data_path);
                ctx.absorb_file("data", *data_path, csv);
                ctx.absorb("order", std::to_string(*order));
                ctx.absorb("detrend", std::to_string(*detrend_knots));
                rgcov::SeriesTable table = rgcov::series_from_csv(csv);
                Matrix y = table.values;
                rgcov::EstimatorConfig cfg = build_estimator_config(*flags, ctx);
                ctx.seed = cfg.optimizer.seed;
                if (*detrend_knots > 0) y = rgcov::detrend(y, *detrend_knots).detrended;

                log_info("estimating: n=" + std::to_string(y.rows()) +
                         " T=" + std::to_string(y.cols()) + " p=" + std::to_string(*order));
                rgcov::EstimationResult fit = rgcov::estimate(y, *order, cfg);

                nlohmann::json out = nlohmann::json::parse(rgcov::estimation_result_to_json(fit));
                const int k = cfg.transforms.size() * static_cast<int>(y.rows());
                out["weight_dimension"] = std::to_string(k) + "x" + std::to_string(k);
                out["config"] = nlohmann::json::parse(rgcov::estimator_config_to_json(cfg));

                rgcov::TestOptions topt;
                topt.data = &y;
                topt.estimator = &cfg;
                if (*bootstrap > 0) topt.bootstrap_replications = *bootstrap;
                const bool fixed_positive =
                    cfg.regime.kind == rgcov::RegimeKind::Fixed && cfg.regime.value > 0.0;
                if (!fixed_positive || *bootstrap > 0) {
                    try {
                        rgcov::TestResult tr = rgcov::rgcov_spec_test(fit, cfg.lags, cfg.regime, topt);
                        out["specification_test"] =
                            nlohmann::json::parse(rgcov::test_result_to_json(tr));
                    } catch (const Error& e) {
                        out["specification_test"] = nlohmann::json{{"skipped", e.what()}};
                    }
                } else {
                    out["specification_test"] = nlohmann::json{
                        {"skipped",
                         "fixed positive shrinkage needs a bootstrap null law; rerun with "
                         "--bootstrap"}};
                }
                rgcov::write_text_file(*out_path, out.dump(2) + "\n");
                ctx.outputs.push_back(*out_path);
            };
        });
    }

    // ----------------------------------------------------------------- test
    auto* tst = app.add_subcommand("test", "Serial-dependence / specification tests");
    {
        auto data_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>("rnlsd");
        auto order = std::make_shared<int>(1);
        auto draws = std::make_shared<long>(100000);
        auto bootstrap = std::make_shared<int>(199);
        auto test_seed = std::make_shared<std::uint64_t>(987654321ull);
        auto detrend_knots = std::make_shared<int>(0);
        auto flags = std::make_shared<EstimatorFlags>();
        tst->add_option("--data", *data_path, "Input CSV panel")->required();
        tst->add_option("--mode", *mode, "rnlsd (raw data) or spec (estimate, then test)")
            ->check(CLI::IsMember({"rnlsd", "spec"}));
        tst->add_option("--order", *order, "Autoregressive order p (spec mode)");
        tst->add_option("--config", flags->config_path, "Estimator config JSON file");
        tst->add_option("--lags", flags->lags, "Lag window H override");
        tst->add_option("--transforms", flags->transforms, "Transform list override");
        tst->add_option("--delta", flags->delta, "Fixed shrinkage level override");
        tst->add_option("--eta", flags->eta, "Vanishing shrinkage (eta/T) override");
        tst->add_option("--draws", *draws, "Mixture-law Monte Carlo draws");
        tst->add_option("--bootstrap", *bootstrap, "Bootstrap replications (spec mode)");
        auto* seed_opt = tst->add_option("--seed", *test_seed, "Tail-simulation seed");
        tst->add_option("--detrend", *detrend_knots, "Detrend each series first");
        tst->add_option("--out", *out_path, "Output JSON path")->required();
        tst->callback([=, &run]() {
            flags->seed_set = seed_opt->count() > 0;
            if (flags->seed_set) flags->seed = *test_seed;
            run = [=](RunContext& ctx) {
                const std::string csv = rgcov::read_text_file(*data_path);
                ctx.absorb_file("data", *data_path, csv);
                ctx.absorb("mode", *mode);
                rgcov::SeriesTable table = rgcov::series_from_csv(csv);
                Matrix y = table.values;
                rgcov::EstimatorConfig cfg = build_estimator_config(*flags, ctx);
                if (*detrend_knots > 0) y = rgcov::detrend(y, *detrend_knots).detrended;
                ctx.seed = *test_seed;

                rgcov::TestOptions topt;
                topt.mc_draws = *draws;
                topt.seed = *test_seed;
                topt.bootstrap_replications = *bootstrap;

                rgcov::TestResult tr;
                if (*mode == "rnlsd") {
                    const double delta =
                        cfg.regime.effective(static_cast<std::size_t>(y.cols()));
                    tr = rgcov::rnlsd(y, cfg.transforms, cfg.lags, delta, topt);
                } else {
                    rgcov::EstimationResult fit = rgcov::estimate(y, *order, cfg);
                    topt.data = &y;
                    topt.estimator = &cfg;
                    tr = rgcov::rgcov_spec_test(fit, cfg.lags, cfg.regime, topt);
                }
                rgcov::write_text_file(*out_path, rgcov::test_result_to_json(tr) + "\n");
                ctx.outputs.push_back(*out_path);
            };
        });
    }

    // ----------------------------------------------------------------- mc
    auto* mc = app.add_subcommand("mc", "Run a Monte Carlo replication study");
    {
        auto config_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto csv_path = std::make_shared<std::string>();
        auto jobs = std::make_shared<int>(0);
        auto no_raw = std::make_shared<bool>(false);
        mc->add_option("--config", *config_path, "Study config JSON file")->required();
        mc->add_option("--out", *out_path, "Report JSON path")->required();
        mc->add_option("--csv", *csv_path, "Optional tidy-CSV report path");
        mc->add_option("--jobs", *jobs, "Worker threads (default: available parallelism)");
        mc->add_flag("--no-raw", *no_raw, "Omit the per-replication table from the report");
        mc->callback([=, &run]() {
            run = [=](RunContext& ctx) {
                const std::string text = rgcov::read_text_file(*config_path);
                ctx.absorb_file("config", *config_path, text);
                rgcov::StudyConfig study = rgcov::study_config_from_json(text);
                if (*jobs > 0) {
                    study.jobs = *jobs;
                } else if (study.jobs <= 0) {
                    study.jobs = std::max(1u, std::thread::hardware_concurrency());
                }
                ctx.seed = study.base_seed;
                log_info("study: " + std::to_string(study.estimators.size()) + " estimators, M=" +
                         std::to_string(study.replications));
                rgcov::StudyReport report = rgcov::run_study(study);
                rgcov::write_text_file(*out_path,
                                       rgcov::study_report_to_json(report, !*no_raw) + "\n");
                ctx.outputs.push_back(*out_path);
                if (!csv_path->empty()) {
                    rgcov::write_text_file(*csv_path, rgcov::study_report_to_csv(report));
                    ctx.outputs.push_back(*csv_path);
                }
            };
        });
    }

    // ----------------------------------------------------------------- decompose
    auto* dec = app.add_subcommand("decompose",
                                   "Causal/noncausal decomposition of VAR coefficients");
    {
        auto model_path = std::make_shared<std::string>();
        auto data_path = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>();
        dec->add_option("--model", *model_path, "Model (or fitted coefficients) JSON file")
            ->required();
        dec->add_option("--data", *data_path,
                        "Optional CSV panel; emits component series when given");
        dec->add_option("--out-dir", *out_dir, "Output directory")->required();
        dec->callback([=, &run]() {
            run = [=](RunContext& ctx) {
                const std::string text = rgcov::read_text_file(*model_path);
                ctx.absorb_file("model", *model_path, text);
                rgcov::VarModel model = rgcov::var_model_from_json(text);
                rgcov::CausalNoncausalSplit split = rgcov::decompose_companion(model);
                rgcov::Classification cls = rgcov::classify(model.phi);

                nlohmann::json out;
                out["n_causal"] = split.n1;
                out["n_noncausal"] = split.n2;
                out["eigenvalue_moduli"] = cls.moduli;
                out["j1"] = matrix_rows_json(split.j1);
                out["j2"] = matrix_rows_json(split.j2);
                out["a"] = matrix_rows_json(split.a);
                out["a_inv"] = matrix_rows_json(split.a_inv);
                out["a_row1"] = matrix_rows_json(split.a_row1);
                out["a_row2"] = matrix_rows_json(split.a_row2);
                const std::string json_path = *out_dir + "/decomposition.json";
                rgcov::write_text_file(json_path, out.dump(2) + "\n");
                ctx.outputs.push_back(json_path);

                std::vector<rgcov::AllocationRow> rows = rgcov::allocations_from_split(split);
                const std::string alloc_path = *out_dir + "/allocations.json";
                rgcov::write_text_file(alloc_path, rgcov::allocations_to_json(rows) + "\n");
                ctx.outputs.push_back(alloc_path);

                if (!data_path->empty()) {
                    const std::string csv = rgcov::read_text_file(*data_path);
                    ctx.absorb_file("data", *data_path, csv);
                    rgcov::SeriesTable table = rgcov::series_from_csv(csv);
                    // Components act on the stacked lag vector; for p = 1
                    // this is just the panel itself.
                    rgcov::require(table.values.rows() == split.a.rows(), ErrorKind::Data,
                                   "panel dimension does not match the decomposition (for p > 1, "
                                   "supply the stacked companion series)");
                    rgcov::SeriesTable comp;
                    comp.dates = table.dates;
                    Matrix stacked(split.n1 + split.n2, table.values.cols());
                    stacked.topRows(split.n1) = split.a_row1 * table.values;
                    stacked.bottomRows(split.n2) = split.a_row2 * table.values;
                    comp.values = stacked;
                    for (const rgcov::AllocationRow& row : rows) comp.names.push_back(row.label);
                    const std::string comp_path = *out_dir + "/components.csv";
                    rgcov::write_text_file(comp_path, rgcov::series_to_csv(comp));
                    ctx.outputs.push_back(comp_path);
                }
            };
        });
    }

    // ----------------------------------------------------------------- backtest
    auto* bt = app.add_subcommand("backtest", "Budget-constrained allocation backtest");
    {
        auto data_path = std::make_shared<std::string>();
        auto alloc_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto initial = std::make_shared<double>(100.0);
        bt->add_option("--data", *data_path, "Price panel CSV")->required();
        bt->add_option("--allocations", *alloc_path, "Allocation rows JSON file")->required();
        bt->add_option("--initial", *initial, "Initial capital V1");
        bt->add_option("--out", *out_path, "Output CSV path")->required();
        bt->callback([=, &run]() {
            run = [=](RunContext& ctx) {
                const std::string csv = rgcov::read_text_file(*data_path);
                ctx.absorb_file("data", *data_path, csv);
                const std::string alloc_text = rgcov::read_text_file(*alloc_path);
                ctx.absorb_file("allocations", *alloc_path, alloc_text);
                ctx.absorb("initial", std::to_string(*initial));
                rgcov::PricePanel panel = rgcov::price_panel_from_csv(csv);
                std::vector<rgcov::AllocationRow> rows = rgcov::allocations_from_json(alloc_text);
                rgcov::BacktestResult result = rgcov::backtest(panel, rows, *initial);
                std::vector<std::string> dates =
                    panel.dates.empty() ? index_dates(panel.prices.cols()) : panel.dates;
                rgcov::write_text_file(*out_path, rgcov::backtest_to_csv(result, dates));
                ctx.outputs.push_back(*out_path);
            };
        });
    }

    // Global manifest path option per subcommand.
    auto manifest_path = std::make_shared<std::string>();
    for (auto* sub : {sim, est, tst, mc, dec, bt})
        sub->add_option("--manifest", *manifest_path,
                        "Manifest path (default: <first output>.manifest.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors map to 1
    }

    RunContext ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.manifest_path = *manifest_path;
    try {
        run(ctx);
        ctx.finish();
    } catch (const Error& e) {
        nlohmann::json err{{"error", e.kind_name()}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", "internal"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 4;
    }
    return 0;
}
