#include "radapt/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "radapt/petrov.hpp"
#include "radapt/sinc.hpp"

namespace radapt::exp {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    std::ofstream os(fs::path(cfg.out_dir) / name);
    os.precision(12);
    return os;
}

std::string canonical_string(const RunConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "n=" << c.n << ";t_end=" << c.t_end << ";n0=" << c.n0 << ";u0=" << c.u0_kind
       << ";f=" << c.f_kind << ";scheme=" << c.scheme << ";theta=" << c.theta
       << ";G=" << c.G << ";g0=" << c.g0 << ";tol=" << c.tol << ";max_iter=" << c.max_iter
       << ";M=" << c.M << ";R=" << c.R << ";alpha=" << c.alpha << ";d=" << c.d
       << ";include_large=" << c.include_large;
    return os.str();
}

}  // namespace

int RunConfig::effective_G() const {
    if (g0 > 0.0) {
        return static_cast<int>(std::ceil(std::log(3.0) / std::log(1.0 / g0)));
    }
    return G;
}

void RunConfig::validate() const {
    if (n < 2) throw std::invalid_argument("config: n must be >= 2");
    if (!(t_end > 0.0)) throw std::invalid_argument("config: t_end must be > 0");
    if (n0 < 1) throw std::invalid_argument("config: n0 must be >= 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("config: theta must be in (0,1]");
    if (G < 1) throw std::invalid_argument("config: G must be >= 1");
    if (g0 < 0.0 || g0 >= 1.0) throw std::invalid_argument("config: g0 must be in [0,1)");
    if (tol < 0.0) throw std::invalid_argument("config: tol must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
    if (M < 0 || R < 0) throw std::invalid_argument("config: M and R must be >= 0");
    if (!(alpha >= 1.0)) throw std::invalid_argument("config: alpha must be >= 1");
    if (!(d > 0.0 && d < M_PI / 2.0)) throw std::invalid_argument("config: d must be in (0, pi/2)");
    if (u0_kind != "l2" && u0_kind != "h1" && u0_kind != "zero") {
        throw std::invalid_argument("config: u0 must be l2, h1 or zero");
    }
    if (f_kind != "zero" && f_kind != "constant") {
        throw std::invalid_argument("config: f must be zero or constant");
    }
    if (scheme != "hybrid" && scheme != "cn") {
        throw std::invalid_argument("config: scheme must be hybrid or cn");
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key=value, got " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "n") cfg.n = std::stoi(val);
        else if (key == "t_end") cfg.t_end = std::stod(val);
        else if (key == "n0") cfg.n0 = std::stoi(val);
        else if (key == "u0") cfg.u0_kind = val;
        else if (key == "f") cfg.f_kind = val;
        else if (key == "scheme") cfg.scheme = val;
        else if (key == "theta") cfg.theta = std::stod(val);
        else if (key == "G") cfg.G = std::stoi(val);
        else if (key == "g0") cfg.g0 = std::stod(val);
        else if (key == "tol") cfg.tol = std::stod(val);
        else if (key == "max_iter") cfg.max_iter = std::stoi(val);
        else if (key == "M") cfg.M = std::stoi(val);
        else if (key == "R") cfg.R = std::stoi(val);
        else if (key == "alpha") cfg.alpha = std::stod(val);
        else if (key == "d") cfg.d = std::stod(val);
        else if (key == "out") cfg.out_dir = val;
        else if (key == "dump_mesh") cfg.dump_mesh = val == "1" || val == "true";
        else if (key == "include_large") cfg.include_large = val == "1" || val == "true";
        else throw std::invalid_argument("config: unknown key " + key);
    }
}

std::string config_hash(const RunConfig& cfg) {
    const std::string s = canonical_string(cfg);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void write_manifest(const RunConfig& cfg, const std::string& experiment) {
    std::ofstream os = open_out(cfg, "manifest_" + experiment + ".txt");
    os << "experiment=" << experiment << "\n" << canonical_string(cfg) << "\nhash=" << config_hash(cfg) << "\n";
}

double fit_rate(const std::vector<double>& Ns, const std::vector<double>& errs) {
    if (Ns.size() != errs.size() || Ns.size() < 3) {
        throw std::invalid_argument("fit_rate: need at least 3 matching points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(Ns.size());
    for (size_t i = 0; i < Ns.size(); ++i) {
        if (!(Ns[i] > 0.0) || !(errs[i] > 0.0)) {
            throw std::invalid_argument("fit_rate: sizes and values must be positive");
        }
        const double x = std::log(Ns[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Benchmark make_benchmark(const RunConfig& cfg) {
    Benchmark b;
    b.mesh = unit_square_mesh(cfg.n);
    b.system = std::make_unique<DiscreteSystem>(assemble_fem(b.mesh));
    auto one = [](double, double) { return 1.0; };
    if (cfg.u0_kind == "l2") {
        b.u0 = project_L2(b.mesh, *b.system, one);
    } else if (cfg.u0_kind == "h1") {
        b.u0 = project_H1(b.mesh, *b.system, one);
    } else {
        b.u0 = Vec::Zero(b.system->dim());
    }
    if (cfg.f_kind == "constant") {
        Vec load = load_vector(b.mesh, one);
        b.F = RhsFunction{[load](double) { return load; }, true};
        b.fhat = [load](Complex s) { return VecC(load.cast<Complex>() / s); };
    } else {
        b.F = RhsFunction::zero(b.system->dim());
        b.fhat = nullptr;
    }
    return b;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg) {
    cfg.validate();
    Benchmark b = make_benchmark(cfg);
    const DiscreteSystem& sys = *b.system;
    const int G = cfg.effective_G();

    std::vector<ConvergenceRow> rows;
    long cum = 0;
    TimeMesh final_adaptive;
    auto on_iter = [&](int iter, const SplineSolution& sol, const EstimateResult& est) {
        ConvergenceRow r;
        r.mode = "adaptive";
        r.iter = iter;
        r.n_elems = sol.mesh.n_elements();
        cum += r.n_elems;
        r.cum_elems = cum;
        r.eta = est.total();
        r.err_x = xnorm_error_modal(sys, sol);
        rows.push_back(r);
        final_adaptive = sol.mesh;
    };
    AdaptiveOptions opts{cfg.theta, G, cfg.tol, cfg.max_iter,
                         cfg.scheme == "cn" ? Scheme::CrankNicolson : Scheme::Hybrid};
    AdaptiveRun run = adaptive_loop(sys, b.F, b.u0, cfg.t_end, cfg.n0, opts, on_iter);
    for (size_t i = 0; i < run.records.size(); ++i) {
        rows[i].n_marked = static_cast<int>(run.records[i].marks.indices.size());
    }

    // Uniform ladder on comparable element counts.
    const int final_n = rows.empty() ? cfg.n0 : rows.back().n_elems;
    long ucum = 0;
    TimeMesh final_uniform;
    for (int l = 0, n_el = cfg.n0; n_el <= std::max(3 * cfg.n0, final_n) && l < 12; ++l, n_el *= 3) {
        TimeMesh mesh = uniform_mesh(cfg.t_end, n_el);
        SplineSolution sol = opts.scheme == Scheme::Hybrid
                                 ? solve_time(sys, mesh, b.F, b.u0)
                                 : crank_nicolson_solve(sys, mesh, b.F, b.u0);
        EstimateResult est = estimate(sys, sol, b.F);
        ConvergenceRow r;
        r.mode = "uniform";
        r.iter = l;
        r.n_elems = n_el;
        ucum += n_el;
        r.cum_elems = ucum;
        r.eta = est.total();
        r.err_x = xnorm_error_modal(sys, sol);
        r.n_marked = n_el;
        rows.push_back(r);
        final_uniform = mesh;
    }

    std::ofstream os = open_out(cfg, "convergence.csv");
    os << "mode,iter,n_elems,cum_elems,eta,err_X,n_marked\n";
    for (const auto& r : rows) {
        os << r.mode << "," << r.iter << "," << r.n_elems << "," << r.cum_elems << "," << r.eta
           << "," << r.err_x << "," << r.n_marked << "\n";
    }
    if (cfg.dump_mesh) {
        std::ofstream ma = open_out(cfg, "mesh_adaptive.txt");
        write_mesh(final_adaptive, ma);
        std::ofstream mu = open_out(cfg, "mesh_uniform.txt");
        write_mesh(final_uniform, mu);
    }
    write_manifest(cfg, "convergence");
    return rows;
}

std::vector<CompareRow> run_scheme_comparison(const RunConfig& cfg) {
    cfg.validate();
    std::vector<int> ladder = {24, 46, 91};
    if (cfg.include_large) ladder.push_back(181);

    std::vector<CompareRow> rows;
    for (int n_side : ladder) {
        RunConfig local = cfg;
        local.n = n_side;
        Benchmark b = make_benchmark(local);
        const DiscreteSystem& sys = *b.system;
        AdaptiveOptions opts{cfg.theta, cfg.effective_G(), cfg.tol, cfg.max_iter, Scheme::Hybrid};

        // Reference: the finest hybrid approximation of this ladder point.
        std::vector<TimeMesh> hybrid_meshes, cn_meshes;
        std::vector<double> hybrid_eta, cn_eta;
        auto record_meshes = [](std::vector<TimeMesh>& meshes, std::vector<double>& etas) {
            return [&meshes, &etas](int, const SplineSolution& sol, const EstimateResult& est) {
                meshes.push_back(sol.mesh);
                etas.push_back(est.total());
            };
        };
        AdaptiveRun hybrid = adaptive_loop(sys, b.F, b.u0, cfg.t_end, cfg.n0, opts,
                                           record_meshes(hybrid_meshes, hybrid_eta));
        opts.scheme = Scheme::CrankNicolson;
        AdaptiveRun cn = adaptive_loop(sys, b.F, b.u0, cfg.t_end, cfg.n0, opts,
                                       record_meshes(cn_meshes, cn_eta));
        const SplineSolution& reference = hybrid.final_solution;

        auto emit = [&](const char* name, Scheme s, const std::vector<TimeMesh>& meshes,
                        const std::vector<double>& etas) {
            for (size_t i = 0; i < meshes.size(); ++i) {
                SplineSolution sol = s == Scheme::Hybrid
                                         ? solve_time(sys, meshes[i], b.F, b.u0)
                                         : crank_nicolson_solve(sys, meshes[i], b.F, b.u0);
                CompareRow r;
                r.scheme = name;
                r.n_side = n_side;
                r.Nh = sys.dim();
                r.iter = static_cast<int>(i);
                r.n_elems = meshes[i].n_elements();
                r.eta = etas[i];
                r.err_x = xnorm_error(sys, sol, reference);
                rows.push_back(r);
            }
        };
        emit("hybrid", Scheme::Hybrid, hybrid_meshes, hybrid_eta);
        emit("cn", Scheme::CrankNicolson, cn_meshes, cn_eta);
    }

    std::ofstream os = open_out(cfg, "compare.csv");
    os << "scheme,n_side,Nh,iter,n_elems,eta,err_X\n";
    for (const auto& r : rows) {
        os << r.scheme << "," << r.n_side << "," << r.Nh << "," << r.iter << "," << r.n_elems
           << "," << r.eta << "," << r.err_x << "\n";
    }
    write_manifest(cfg, "compare");
    return rows;
}

std::vector<InfsupRow> run_infsup_sweep(const RunConfig& cfg) {
    cfg.validate();
    std::vector<InfsupRow> rows;
    for (const char* scheme : {"hybrid", "cn"}) {
        for (double lambda : {1.0, 10.0, 100.0, 1000.0}) {
            for (int n : {4, 8, 16, 32, 64}) {
                TimeMesh mesh = uniform_mesh(cfg.t_end, n);
                InfsupRow r;
                r.scheme = scheme;
                r.lambda = lambda;
                r.n_elems = n;
                r.c0 = petrov::infsup_constant(
                    lambda, mesh,
                    std::string(scheme) == "hybrid" ? Scheme::Hybrid : Scheme::CrankNicolson);
                rows.push_back(r);
            }
        }
    }
    std::ofstream os = open_out(cfg, "infsup.csv");
    os << "scheme,lambda,n_elems,c0\n";
    for (const auto& r : rows) {
        os << r.scheme << "," << r.lambda << "," << r.n_elems << "," << r.c0 << "\n";
    }
    write_manifest(cfg, "infsup");
    return rows;
}

std::vector<SvdRow> run_svd_decay(const RunConfig& cfg) {
    cfg.validate();
    Benchmark b = make_benchmark(cfg);
    std::vector<int> Ms = cfg.M > 0 ? std::vector<int>{cfg.M} : std::vector<int>{50, 75, 100, 125};
    std::vector<SvdRow> rows;
    for (int M : Ms) {
        sinc::SincGrid grid = sinc::make_grid(cfg.alpha, cfg.d, M);
        mor::SnapshotSet snaps = mor::build_snapshots(*b.system, b.fhat, b.u0, grid);
        mor::ReducedBasis basis = mor::build_reduced_basis(*b.system, snaps, 1);
        for (int k = 0; k < basis.singular_values.size(); ++k) {
            rows.push_back({M, k + 1, basis.singular_values[k]});
        }
        b.system->clear_shift_cache();
    }
    std::ofstream os = open_out(cfg, "svd.csv");
    os << "M,k,sigma_k\n";
    for (const auto& r : rows) os << r.M << "," << r.k << "," << r.sigma << "\n";
    write_manifest(cfg, "svd");
    return rows;
}

std::vector<MorRow> run_mor(const RunConfig& cfg) {
    cfg.validate();
    Benchmark b = make_benchmark(cfg);
    std::vector<int> Rs = cfg.R > 0 ? std::vector<int>{cfg.R} : std::vector<int>{5, 10, 15, 20};
    const int M = cfg.M > 0 ? cfg.M : 50;
    std::vector<MorRow> rows;
    for (int R : Rs) {
        mor::MorOptions mo;
        mo.M = M;
        mo.R = R;
        mo.alpha = cfg.alpha;
        mo.d = cfg.d;
        mo.theta = cfg.theta;
        mo.G = cfg.effective_G();
        mo.tol = cfg.tol;
        mo.max_iter = cfg.max_iter;
        mo.n0 = cfg.n0;
        mo.t_end = cfg.t_end;
        mor::MorResult res = mor::mor_pipeline(*b.system, b.fhat, b.F, b.u0, mo);
        long cum_solves = 0;
        for (const auto& rec : res.records) {
            cum_solves += 2L * rec.n_elems;
            rows.push_back({R, M, rec.iter, rec.n_elems, rec.eta, rec.err_x_full_dual,
                            rec.err_x_reduced_dual, res.snapshot_solves, cum_solves});
        }
        b.system->clear_shift_cache();
    }
    std::ofstream os = open_out(cfg, "mor.csv");
    os << "R,M,iter,n_elems,eta,err_X,err_X_rb,solves_full,solves_reduced\n";
    for (const auto& r : rows) {
        os << r.R << "," << r.M << "," << r.iter << "," << r.n_elems << "," << r.eta << ","
           << r.err_x << "," << r.err_x_rb << "," << r.solves_full << "," << r.solves_reduced
           << "\n";
    }
    write_manifest(cfg, "mor");
    return rows;
}

int run_oracle_check(const RunConfig& cfg) {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // Scalar Radau step against the stability function value 4/11.
    {
        SpMat M(1, 1), K(1, 1);
        M.insert(0, 0) = 1.0;
        K.insert(0, 0) = 1.0;
        DiscreteSystem sys(M, K);
        Vec u(1);
        u[0] = 1.0;
        RadauStage st = radau_step(sys, u, RhsFunction::zero(1), 0.0, 1.0);
        check("radau scalar step u(1) = 4/11", std::abs(st.u_next[0] - 4.0 / 11.0) < 1e-14);
    }
    // Spectral vs sparse dual norm on the configured benchmark (small n).
    {
        RunConfig local = cfg;
        local.n = std::min(cfg.n, 12);
        Benchmark b = make_benchmark(local);
        Vec g = Vec::LinSpaced(b.system->dim(), -1.0, 2.0);
        const double a = b.system->norm_Vstar(g);
        const double o = b.system->norm_Vstar_spectral(g);
        check("dual norm sparse vs spectral to 1e-8", std::abs(a - o) <= 1e-8 * std::max(a, o));
    }
    // Petrov-Galerkin solution equals the time stepper (scalar mode).
    {
        TimeMesh mesh = uniform_mesh(1.0, 5);
        const double lambda = 3.0;
        petrov::PGSystem pg = petrov::assemble_pg(lambda, mesh);
        auto f = [](double t) { return 1.0 + t; };
        Vec sol = petrov::pg_solve(pg, petrov::pg_rhs(pg, mesh, f, 1.0));
        SpMat M(1, 1), K(1, 1);
        M.insert(0, 0) = 1.0;
        K.insert(0, 0) = lambda;
        DiscreteSystem sys(M, K);
        RhsFunction F{[&](double t) { return Vec::Constant(1, f(t)); }, true};
        Vec u0 = Vec::Constant(1, 1.0);
        SplineSolution spline = solve_time(sys, mesh, F, u0);
        double max_diff = 0.0;
        for (int e = 0; e < mesh.n_elements(); ++e) {
            for (double th : {0.25, 0.75, 1.0}) {
                max_diff = std::max(max_diff, std::abs(petrov::pg_eval(pg, mesh, sol, e, th) -
                                                       spline.value(e, th)[0]));
            }
        }
        check("PG solve equals Radau stepping to 1e-10", max_diff < 1e-10);
    }
    // Paley-Wiener identity for f(t) = e^{-2t}, alpha = 1: both sides 1/6.
    {
        auto F = [](double tau) { return 1.0 / (2.0 * M_PI * (9.0 + tau * tau)); };
        const double q = sinc::sinc_quadrature(F, M_PI / 4.0, 100);
        check("Paley-Wiener value 1/6 to 1e-6", std::abs(q - 1.0 / 6.0) < 1e-6);
    }
    return failures;
}

}  // namespace radapt::exp
