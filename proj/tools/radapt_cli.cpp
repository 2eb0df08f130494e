#include <CLI11.hpp>
#include <iostream>

#include "radapt/experiments.hpp"

using radapt::exp::RunConfig;

namespace {

void add_common_flags(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
    sub->add_option("--n", cfg.n, "FEM cells per side of the unit square");
    sub->add_option("--t-end", cfg.t_end, "final time");
    sub->add_option("--n0", cfg.n0, "initial number of time elements");
    sub->add_option("--theta", cfg.theta, "Doerfler marking parameter in (0,1]");
    sub->add_option("--G", cfg.G, "grading parameter (integer >= 1)");
    sub->add_option("--g0", cfg.g0, "grading ratio; overrides --G via G = ceil(log3/log(1/g0))");
    sub->add_option("--tol", cfg.tol, "estimator stopping tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "adaptive iteration cap");
    sub->add_option("--M", cfg.M, "sinc sample count (0 = paper set where applicable)");
    sub->add_option("--R", cfg.R, "reduced dimension (0 = paper set {5,10,15,20})");
    sub->add_option("--alpha", cfg.alpha, "Laplace abscissa (>= 1)");
    sub->add_option("--d", cfg.d, "sinc strip parameter in (0, pi/2)");
    sub->add_option("--u0", cfg.u0_kind, "initial datum: l2 | h1 | zero");
    sub->add_option("--f", cfg.f_kind, "right-hand side: zero | constant");
    sub->add_option("--scheme", cfg.scheme, "time stepping scheme: hybrid | cn");
    sub->add_option("--out", cfg.out_dir, "output directory for CSV files");
    sub->add_flag("--dump-mesh", cfg.dump_mesh, "write final meshes alongside the CSV");
    sub->add_flag("--include-large", cfg.include_large, "include the N_h ~ 3.2e4 ladder point");
    sub->add_option("--config", config_path, "key=value config file overriding the flags");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Radau IIA time stepping with Laplace-domain model order reduction"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.M = 0;
    cfg.R = 0;
    std::string config_path;
    std::string experiment;
    for (const char* name : {"convergence", "compare-schemes", "infsup", "mor", "svd-decay",
                             "oracle-check"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common_flags(sub, cfg, config_path);
        sub->callback([&experiment, name] { experiment = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) radapt::exp::apply_config_file(cfg, config_path);
        cfg.validate();
        if (experiment == "convergence") {
            radapt::exp::run_convergence(cfg);
        } else if (experiment == "compare-schemes") {
            radapt::exp::run_scheme_comparison(cfg);
        } else if (experiment == "infsup") {
            radapt::exp::run_infsup_sweep(cfg);
        } else if (experiment == "mor") {
            radapt::exp::run_mor(cfg);
        } else if (experiment == "svd-decay") {
            radapt::exp::run_svd_decay(cfg);
        } else if (experiment == "oracle-check") {
            return radapt::exp::run_oracle_check(cfg) == 0 ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const radapt::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    std::cout << "wrote results to " << cfg.out_dir << "\n";
    return 0;
}
