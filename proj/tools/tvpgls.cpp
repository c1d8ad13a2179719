#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "tvp/cli.hpp"

namespace {

tvp::Vector parse_b0(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw tvp::ValidationError("--b0: non-numeric entry '" + cell + "'");
        values.push_back(v);
    }
    return Eigen::Map<tvp::Vector>(values.data(), static_cast<tvp::Index>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
    tvp::RunConfig cfg;
    std::string intercept = "time_varying", error_kind = "gaussian", format = "csv", b0;
    double tolerance = std::numeric_limits<double>::quiet_NaN();

    CLI::App app{"Time-varying-parameter VAR estimation by GLS"};
    app.require_subcommand(1);

    auto model_flags = [&](CLI::App* c) {
        c->add_option("--p", cfg.p, "lag order");
        c->add_option("--intercept", intercept, "none | time_varying | time_invariant");
        c->add_option("--steps", cfg.steps, "FGLS steps: 0 = OLS only, 1, 2");
        c->add_option("--out-dir", cfg.out_dir, "output directory");
        c->add_option("--format", format, "csv | tsv")->check(CLI::IsMember({"csv", "tsv"}));
    };
    auto dgp_flags = [&](CLI::App* c) {
        model_flags(c);
        c->add_option("--k", cfg.k, "number of variables");
        c->add_option("--T", cfg.T, "sample length");
        c->add_option("--h-scale", cfg.h_scale, "observation noise sd");
        c->add_option("--q-scale", cfg.q_scale, "state noise sd");
        c->add_option("--error-kind", error_kind,
                      "gaussian | mixture | sv_rw | sv_ar | mixture_sv_rw | mixture_sv_ar");
        c->add_option("--rho", cfg.rho, "AR coefficient of the log-variance for sv_ar");
        c->add_option("--seed", cfg.seed, "random seed");
        c->add_option("--explosion-bound", cfg.explosion_bound, "redraw paths with any |y| above this");
    };

    auto* sim = app.add_subcommand("simulate", "draw one data set; writes y and beta_true");
    dgp_flags(sim);
    auto* rep = app.add_subcommand("replicate", "Monte Carlo metrics for one cell");
    dgp_flags(rep);
    rep->add_option("--reps", cfg.reps, "replications N");
    rep->add_option("--threads", cfg.threads, "worker threads");
    auto* tab = app.add_subcommand("tables", "all table cells (long running at N = 1000)");
    dgp_flags(tab);
    tab->add_option("--reps", cfg.reps, "replications N")->default_val(1000);
    tab->add_option("--threads", cfg.threads, "worker threads");
    tab->add_option("--table", cfg.table, "1..6, or 0 for all");
    auto* est = app.add_subcommand("estimate", "OLS / 1FGLS / 2FGLS paths for a CSV series");
    model_flags(est);
    est->add_option("input", cfg.input, "CSV with header: period, y1..yk")->required();
    est->add_option("--b0", b0, "comma-separated starting coefficients (default: constant VAR fit)");
    auto* val = app.add_subcommand("validate", "numerical identity suite");
    val->add_option("--seed", cfg.seed, "random seed");
    val->add_option("--reps", cfg.instances, "random instances")->default_val(25);
    val->add_option("--tolerance", tolerance, "replace every identity tolerance");
    val->add_option("--cap", cfg.cap, "dense validation size cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? tvp::kExitOk : tvp::kExitInput;
    }

    return tvp::run_guarded(
        [&]() -> int {
            cfg.intercept_mode = tvp::intercept_mode_from_string(intercept);
            cfg.error_kind = tvp::error_kind_from_string(error_kind);
            cfg.separator = format == "tsv" ? '\t' : ',';
            if (!b0.empty()) cfg.b0 = parse_b0(b0);
            if (val->parsed() && !std::isnan(tolerance)) cfg.tolerance = tolerance;
            if (sim->parsed()) return tvp::cmd_simulate(cfg, std::cout);
            if (rep->parsed()) return tvp::cmd_replicate(cfg, std::cout);
            if (tab->parsed()) return tvp::cmd_tables(cfg, std::cout);
            if (est->parsed()) return tvp::cmd_estimate(cfg, std::cout);
            return tvp::cmd_validate(cfg, std::cout, std::cerr);
        },
        std::cerr);
}
