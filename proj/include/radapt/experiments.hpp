#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "radapt/discrete_system.hpp"
#include "radapt/fem2d.hpp"
#include "radapt/laplace_mor.hpp"
#include "radapt/radau.hpp"

namespace radapt::exp {

/// One experiment configuration; flat key=value config files override the
/// command-line values field by field.
struct RunConfig {
    int n = 32;                   // fem2d cells per side
    double t_end = 1.0;
    int n0 = 4;                   // initial time elements
    std::string u0_kind = "l2";   // l2 | h1 (projection of 1) | zero
    std::string f_kind = "zero";  // zero | constant
    std::string scheme = "hybrid";
    double theta = 0.5;
    int G = 4;
    double g0 = 0.0;  // if set, overrides G via G = ceil(log 3 / log(1/g0))
    double tol = 0.0;
    int max_iter = 25;
    int M = 50;
    int R = 10;
    double alpha = 1.0;
    double d = M_PI / 4.0;
    std::string out_dir = ".";
    bool dump_mesh = false;
    bool include_large = false;  // adds the N_h ~ 3.2e4 ladder point

    int effective_G() const;
    void validate() const;
};

/// Merge `key=value` lines into a config (unknown keys are rejected).
void apply_config_file(RunConfig& cfg, const std::string& path);

/// FNV-1a hash of the canonical config string, recorded in the manifest.
std::string config_hash(const RunConfig& cfg);
void write_manifest(const RunConfig& cfg, const std::string& experiment);

/// Least-squares slope of log(err) against log(N), negated.
double fit_rate(const std::vector<double>& Ns, const std::vector<double>& errs);

/// Heat benchmark assembled from the config (fem2d system + projected u0).
struct Benchmark {
    TriMesh mesh;
    std::unique_ptr<DiscreteSystem> system;
    Vec u0;
    RhsFunction F;
    mor::LaplaceRhs fhat;  // Laplace transform of F
};
Benchmark make_benchmark(const RunConfig& cfg);

struct ConvergenceRow {
    std::string mode;  // adaptive | uniform
    int iter = 0;
    int n_elems = 0;
    long cum_elems = 0;
    double eta = 0.0;
    double err_x = 0.0;
    int n_marked = 0;
};
std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg);

struct CompareRow {
    std::string scheme;
    int n_side = 0;
    int Nh = 0;
    int iter = 0;
    int n_elems = 0;
    double eta = 0.0;
    double err_x = 0.0;
};
std::vector<CompareRow> run_scheme_comparison(const RunConfig& cfg);

struct InfsupRow {
    std::string scheme;
    double lambda = 0.0;
    int n_elems = 0;
    double c0 = 0.0;
};
std::vector<InfsupRow> run_infsup_sweep(const RunConfig& cfg);

struct SvdRow {
    int M = 0;
    int k = 0;
    double sigma = 0.0;
};
std::vector<SvdRow> run_svd_decay(const RunConfig& cfg);

struct MorRow {
    int R = 0;
    int M = 0;
    int iter = 0;
    int n_elems = 0;
    double eta = 0.0;
    double err_x = 0.0;
    double err_x_rb = 0.0;
    long solves_full = 0;
    long solves_reduced = 0;
};
std::vector<MorRow> run_mor(const RunConfig& cfg);

/// Quick dual-route self-checks (spectral vs sparse norms, stepping vs
/// stability function, PG equivalence, Paley-Wiener identity). Returns the
/// number of failed checks and prints one line per check.
int run_oracle_check(const RunConfig& cfg);

}  // namespace radapt::exp
