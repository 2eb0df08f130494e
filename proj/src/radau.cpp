#include "radapt/radau.hpp"

#include <cmath>

namespace radapt {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Gauss-Legendre nodes/weights on [0,1].
struct QuadRule {
    std::vector<double> nodes, weights;
};

const QuadRule& gauss2() {
    static const QuadRule q = [] {
        const double d = 0.5 / std::sqrt(3.0);
        return QuadRule{{0.5 - d, 0.5 + d}, {0.5, 0.5}};
    }();
    return q;
}

const QuadRule& gauss3() {
    static const QuadRule q = [] {
        const double d = 0.5 * std::sqrt(0.6);
        return QuadRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0}};
    }();
    return q;
}

const QuadRule& gauss10() {
    static const QuadRule q = [] {
        const double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                             0.8650633666889845, 0.9739065285171717};
        const double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                             0.1494513491505806, 0.0666713443086881};
        QuadRule r;
        for (int i = 4; i >= 0; --i) {
            r.nodes.push_back(0.5 * (1.0 - x[i]));
            r.weights.push_back(0.5 * w[i]);
        }
        for (int i = 0; i < 5; ++i) {
            r.nodes.push_back(0.5 * (1.0 + x[i]));
            r.weights.push_back(0.5 * w[i]);
        }
        return r;
    }();
    return q;
}

// Quadratic w(theta) = w0 + w1 theta + w2 theta^2 from values at 0, 1/2, 1.
void fit_quadratic(const Vec& v0, const Vec& vh, const Vec& v1, Vec& w0, Vec& w1, Vec& w2) {
    w0 = v0;
    w2 = 2.0 * v0 - 4.0 * vh + 2.0 * v1;
    w1 = -3.0 * v0 + 4.0 * vh - v1;
}

int locate_element(const TimeMesh& mesh, double a) {
    auto it = std::upper_bound(mesh.breakpoints.begin(), mesh.breakpoints.end(), a);
    int idx = static_cast<int>(it - mesh.breakpoints.begin()) - 1;
    return std::min(std::max(idx, 0), mesh.n_elements() - 1);
}

}  // namespace

RhsFunction RhsFunction::zero(int) { return RhsFunction{nullptr, true}; }

Vec RhsFunction::operator()(double t) const { return eval(t); }

std::array<Vec, 3> element_rhs_samples(const RhsFunction& F, double t0, double tau) {
    return {F(t0), F(t0 + tau / 3.0), F(t0 + tau)};
}

Vec SplineSolution::value(int elem, double theta) const {
    Vec v = left[elem] +
            mesh.size(elem) * (theta * k1[elem] +
                               (3.0 * theta * theta - 2.0 * theta) / 4.0 * (k2[elem] - k1[elem]));
    return v;
}

Vec SplineSolution::derivative(int elem, double theta) const {
    return k1[elem] + 0.5 * (3.0 * theta - 1.0) * (k2[elem] - k1[elem]);
}

std::pair<Vec, Vec> eval_spline(const SplineSolution& sol, double t) {
    const TimeMesh& mesh = sol.mesh;
    if (t < 0.0 || t > mesh.t_end) {
        throw std::invalid_argument("eval_spline: t outside [0, t_end]");
    }
    // Left element at interior breakpoints; element 0 at t = 0.
    int elem;
    if (t == 0.0) {
        elem = 0;
    } else {
        auto it = std::lower_bound(mesh.breakpoints.begin(), mesh.breakpoints.end(), t);
        if (it != mesh.breakpoints.end() && *it == t) {
            elem = std::min(static_cast<int>(it - mesh.breakpoints.begin()) - 1, mesh.n_elements() - 1);
            elem = std::max(elem, 0);
        } else {
            elem = locate_element(mesh, t);
        }
    }
    const double theta = (t - mesh.left(elem)) / mesh.size(elem);
    return {sol.value(elem, theta), sol.derivative(elem, theta)};
}

RadauStage radau_step(const DiscreteSystem& system, const Vec& u_prev, const RhsFunction& F,
                      double t0, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("radau_step: element size must be positive");
    const SpMat& K = system.stiffness();
    Vec Ku = K * u_prev;
    Vec r1 = -Ku, r2 = -Ku;
    if (!F.is_zero()) {
        r1 += F(t0 + tau / 3.0);
        r2 += F(t0 + tau);
    }
    // Stage system (I (x) M + tau A (x) K) k = r diagonalized over the
    // eigenvalues 2 +- i sqrt(2) of A^{-1}: one complex solve, the second
    // stage is its conjugate for real data.
    const Complex lambda1(2.0, kSqrt2);
    const Complex s1 = lambda1 / tau;
    // c1 = first entry of S^{-1} r for S = [[1, 1], [1+2i sqrt2, 1-2i sqrt2]].
    VecC c1 = (0.5 * r1).cast<Complex>() + Complex(0.0, 1.0 / (4.0 * kSqrt2)) * (r1 - r2).cast<Complex>();
    VecC w1 = system.shifted_solve(s1, VecC(s1 * c1));
    system.counters().stage_solves += 2;

    RadauStage st;
    st.k1 = 2.0 * w1.real();
    st.k2 = 2.0 * (Complex(1.0, 2.0 * kSqrt2) * w1.array()).real();
    st.u_next = u_prev + tau * (0.75 * st.k1 + 0.25 * st.k2);
    return st;
}

SplineSolution solve_time(const DiscreteSystem& system, const TimeMesh& mesh,
                          const RhsFunction& F, const Vec& u0) {
    if (u0.size() != system.dim()) throw std::invalid_argument("solve_time: u0 has wrong dimension");
    SplineSolution sol;
    sol.mesh = mesh;
    sol.u0 = u0;
    const int n = mesh.n_elements();
    sol.left.reserve(n);
    sol.k1.reserve(n);
    sol.k2.reserve(n);
    Vec u = u0;
    for (int e = 0; e < n; ++e) {
        RadauStage st = radau_step(system, u, F, mesh.left(e), mesh.size(e));
        sol.left.push_back(u);
        sol.k1.push_back(std::move(st.k1));
        sol.k2.push_back(std::move(st.k2));
        u = std::move(st.u_next);
    }
    return sol;
}

SplineSolution crank_nicolson_solve(const DiscreteSystem& system, const TimeMesh& mesh,
                                    const RhsFunction& F, const Vec& u0) {
    if (u0.size() != system.dim()) {
        throw std::invalid_argument("crank_nicolson_solve: u0 has wrong dimension");
    }
    SplineSolution sol;
    sol.mesh = mesh;
    sol.u0 = u0;
    const SpMat& M = system.mass();
    const SpMat& K = system.stiffness();
    Vec u = u0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double tau = mesh.size(e);
        const double t0 = mesh.left(e);
        Vec rhs = M * u - 0.5 * tau * (K * u);
        if (!F.is_zero()) {
            // Simpson: exact integral of the elementwise quadratic data model.
            rhs += tau / 6.0 * (F(t0) + 4.0 * F(t0 + 0.5 * tau) + F(t0 + tau));
        }
        // (M + tau K / 2) u_next = rhs, via the shifted form ((2/tau)M + K).
        Vec u_next = system.shifted_solve(2.0 / tau, Vec(2.0 / tau * rhs));
        system.counters().stage_solves += 1;
        Vec slope = (u_next - u) / tau;
        sol.left.push_back(u);
        sol.k1.push_back(slope);
        sol.k2.push_back(std::move(slope));
        u = std::move(u_next);
    }
    return sol;
}

std::pair<Vec, Vec> residual_moments(const DiscreteSystem& system, const SplineSolution& sol,
                                     const RhsFunction& F, int elem) {
    const TimeMesh& mesh = sol.mesh;
    if (elem < 0 || elem >= mesh.n_elements()) {
        throw std::invalid_argument("residual_moments: element index out of range");
    }
    const double tau = mesh.size(elem);
    const double t0 = mesh.left(elem);
    const SpMat& M = system.mass();
    const SpMat& K = system.stiffness();
    auto residual = [&](double theta) {
        Vec r = -(M * sol.derivative(elem, theta)) - K * sol.value(elem, theta);
        if (!F.is_zero()) r += F(t0 + theta * tau);
        return r;
    };
    const QuadRule& q = gauss3();
    Vec mean = Vec::Zero(system.dim());
    for (size_t i = 0; i < q.nodes.size(); ++i) mean += (tau * q.weights[i]) * residual(q.nodes[i]);
    Vec endpoint = residual(1.0);
    return {mean, endpoint};
}

double EstimateResult::total() const { return std::sqrt(total_sq); }

EstimateResult estimate(const DiscreteSystem& system, const SplineSolution& sol,
                        const RhsFunction& F) {
    const TimeMesh& mesh = sol.mesh;
    const SpMat& M = system.mass();
    const SpMat& K = system.stiffness();
    EstimateResult res;
    res.per_element_sq.resize(mesh.n_elements());
    const QuadRule& q = gauss2();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double tau = mesh.size(e);
        const Vec delta = sol.k2[e] - sol.k1[e];
        // d/dt of the residual: dF - M u'' - K u', linear in t.
        Vec g_const = -(M * (1.5 / tau * delta)) - K * sol.k1[e] + 0.5 * (K * delta);
        Vec g_slope = -1.5 * (K * delta);  // coefficient of theta
        if (!F.is_zero()) {
            auto s = element_rhs_samples(F, mesh.left(e), tau);
            // Quadratic model a + b theta + c theta^2 through the samples.
            Vec b = 0.5 * (-8.0 * s[0] + 9.0 * s[1] - s[2]);
            Vec c = 1.5 * (2.0 * s[0] - 3.0 * s[1] + s[2]);
            g_const += b / tau;
            g_slope += 2.0 * c / tau;
        }
        double acc = 0.0;
        for (size_t i = 0; i < q.nodes.size(); ++i) {
            Vec g = g_const + q.nodes[i] * g_slope;
            double nv = system.norm_Vstar(g);
            acc += tau * q.weights[i] * nv * nv;
        }
        res.per_element_sq[e] = tau * tau * acc;
        res.total_sq += res.per_element_sq[e];
    }
    return res;
}

AdaptiveRun adaptive_loop(const DiscreteSystem& system, const RhsFunction& F, const Vec& u0,
                          double t_end, int n0, const AdaptiveOptions& opts,
                          const IterationCallback& on_iteration) {
    if (!(opts.theta > 0.0 && opts.theta <= 1.0)) {
        throw std::invalid_argument("adaptive_loop: theta must be in (0,1]");
    }
    if (opts.G < 1) throw std::invalid_argument("adaptive_loop: G must be >= 1");
    AdaptiveRun run;
    TimeMesh mesh = uniform_mesh(t_end, n0);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        SplineSolution sol = opts.scheme == Scheme::Hybrid
                                 ? solve_time(system, mesh, F, u0)
                                 : crank_nicolson_solve(system, mesh, F, u0);
        EstimateResult est = estimate(system, sol, F);

        IterationRecord rec;
        rec.mesh = mesh;
        rec.eta_sq = est.per_element_sq;
        rec.eta = est.total();
        rec.cum_stage_solves = system.counters().stage_solves;
        if (on_iteration) on_iteration(iter, sol, est);

        const bool stop = rec.eta <= opts.tol || iter == opts.max_iter - 1;
        if (!stop) {
            rec.marks = doerfler_mark(est.per_element_sq, opts.theta);
            // Marked elements are tracked by identity; one may disappear when
            // an earlier trisection refines it, which makes the call a no-op.
            std::vector<std::pair<double, int>> keys;
            keys.reserve(rec.marks.indices.size());
            for (int idx : rec.marks.indices) keys.emplace_back(mesh.left(idx), mesh.levels[idx]);
            for (const auto& [bp, level] : keys) {
                auto it = std::lower_bound(mesh.breakpoints.begin(), mesh.breakpoints.end() - 1, bp);
                int idx = static_cast<int>(it - mesh.breakpoints.begin());
                if (it == mesh.breakpoints.end() - 1 || *it != bp || mesh.levels[idx] != level) continue;
                mesh = trisect(mesh, idx, opts.G);
            }
        }
        run.records.push_back(std::move(rec));
        if (stop) {
            run.final_solution = std::move(sol);
            run.converged = est.total() <= opts.tol;
            break;
        }
    }
    return run;
}

double xnorm_error_modal(const DiscreteSystem& system, const SplineSolution& sol) {
    const SpectralFactorization& sf = system.eigendecompose();
    const int n = sol.mesh.n_elements();
    const int N = system.dim();
    // Batched modal transform of all element coefficient vectors.
    Eigen::MatrixXd C(N, 3 * n);
    for (int e = 0; e < n; ++e) {
        C.col(3 * e) = sol.left[e];
        C.col(3 * e + 1) = sol.k1[e];
        C.col(3 * e + 2) = sol.k2[e];
    }
    Eigen::MatrixXd Cm = sf.eigenvectors.transpose() * (system.mass() * C).eval();
    Vec u0m = sf.eigenvectors.transpose() * (system.mass() * sol.u0);
    const auto& lam = sf.eigenvalues.array();

    const QuadRule& q = gauss10();
    double err = 0.0;
    for (int e = 0; e < n; ++e) {
        const double tau = sol.mesh.size(e);
        const double t0 = sol.mesh.left(e);
        auto ul = Cm.col(3 * e).array();
        auto K1 = Cm.col(3 * e + 1).array();
        auto K2 = Cm.col(3 * e + 2).array();
        for (size_t i = 0; i < q.nodes.size(); ++i) {
            const double th = q.nodes[i];
            const double w = tau * q.weights[i];
            Eigen::ArrayXd exact = u0m.array() * (-lam * (t0 + th * tau)).exp();
            Eigen::ArrayXd u = ul + tau * (th * K1 + (3.0 * th * th - 2.0 * th) / 4.0 * (K2 - K1));
            Eigen::ArrayXd du = K1 + 0.5 * (3.0 * th - 1.0) * (K2 - K1);
            err += w * ((u - exact).square() * lam).sum();
            err += w * ((du + lam * exact).square() / lam).sum();
        }
    }
    return std::sqrt(err);
}

double xnorm_error(const DiscreteSystem& system, const SplineSolution& sol,
                   const SplineSolution& reference) {
    // Union of the two breakpoint sets (bitwise-identical common points for
    // meshes trisected from the same initial mesh).
    std::vector<double> pts;
    std::merge(sol.mesh.breakpoints.begin(), sol.mesh.breakpoints.end(),
               reference.mesh.breakpoints.begin(), reference.mesh.breakpoints.end(),
               std::back_inserter(pts));
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const SpMat& K = system.stiffness();
    const QuadRule& q = gauss10();
    double err = 0.0;
    for (size_t e = 0; e + 1 < pts.size(); ++e) {
        const double a = pts[e], b = pts[e + 1];
        const double len = b - a;
        // Resolve the containing elements once (by midpoint) so endpoint
        // evaluations use the polynomials of this interval, not a neighbor's.
        const int ea = locate_element(sol.mesh, 0.5 * (a + b));
        const int eb = locate_element(reference.mesh, 0.5 * (a + b));
        auto diff = [&](double t) {
            const double tha = (t - sol.mesh.left(ea)) / sol.mesh.size(ea);
            const double thb = (t - reference.mesh.left(eb)) / reference.mesh.size(eb);
            return std::make_pair(Vec(sol.value(ea, tha) - reference.value(eb, thb)),
                                  Vec(sol.derivative(ea, tha) - reference.derivative(eb, thb)));
        };
        auto [v0, d0] = diff(a);
        auto [vh, dh] = diff(0.5 * (a + b));
        auto [v1, d1] = diff(b);
        (void)dh;
        // u-difference is quadratic, derivative difference linear on [a,b].
        Vec w0, w1, w2;
        fit_quadratic(v0, vh, v1, w0, w1, w2);
        Vec Kw0 = K * w0, Kw1 = K * w1, Kw2 = K * w2;
        for (size_t i = 0; i < q.nodes.size(); ++i) {
            const double x = q.nodes[i];
            Vec w = w0 + x * w1 + (x * x) * w2;
            Vec Kw = Kw0 + x * Kw1 + (x * x) * Kw2;
            err += len * q.weights[i] * w.dot(Kw);
        }
        // Derivative difference d0 + xi (d1 - d0) is an element of V; its
        // dual norm acts on the load form M(.).
        Vec g0 = system.mass() * d0;
        Vec g1 = system.mass() * (d1 - d0);
        Vec Ki_g0 = system.solve_K(g0);
        Vec Ki_g1 = system.solve_K(g1);
        err += len * (g0.dot(Ki_g0) + g0.dot(Ki_g1) + g1.dot(Ki_g1) / 3.0);
    }
    return std::sqrt(err);
}

}  // namespace radapt
