#include "radapt/petrov.hpp"

#include <cmath>

namespace radapt::petrov {

namespace {

// Local ansatz on [0,1]: hat_left = 1-th, hat_right = th, bubble = 4 th(1-th).
// Exact integrals of products and of derivative products.
const double kMassLocal[3][3] = {{1.0 / 3, 1.0 / 6, 1.0 / 3},
                                 {1.0 / 6, 1.0 / 3, 1.0 / 3},
                                 {1.0 / 3, 1.0 / 3, 8.0 / 15}};
const double kStiffLocal[3][3] = {{1.0, -1.0, 0.0}, {-1.0, 1.0, 0.0}, {0.0, 0.0, 16.0 / 3}};

int n_local(Scheme s) { return s == Scheme::Hybrid ? 3 : 2; }

// Global column index of local ansatz function a on element e.
int col_index(Scheme s, int n, int e, int a) {
    if (a == 0) return e;          // hat at left node
    if (a == 1) return e + 1;      // hat at right node
    return (n + 1) + e;            // bubble (hybrid only)
}

}  // namespace

PsiReference psi_on_reference() {
    return {{1.0, -3.5, 5.5}, std::sqrt(29.0 / 2.0)};
}

std::pair<double, double> q_invisible(double lambda, double h) {
    if (!(lambda > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("q_invisible: need lambda > 0 and h > 0");
    }
    const double g = h * lambda;
    const double q = 2.0 * (3.0 - g) / (g * g + 4.0 * g + 6.0);
    return {q, -lambda * q};
}

MLambda mlambda(double gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("mlambda: gamma must be >= 0");
    MLambda m;
    m.matrix << 1.0 + gamma / 2.0, 2.0 * gamma / 3.0, 1.0 + gamma, -4.0;
    m.determinant = -(2.0 / 3.0 * gamma * gamma + 8.0 / 3.0 * gamma + 4.0);
    return m;
}

PGSystem assemble_pg(double lambda, const TimeMesh& mesh, Scheme scheme) {
    if (!(lambda > 0.0)) throw std::invalid_argument("assemble_pg: lambda must be > 0");
    const int n = mesh.n_elements();
    const int nl = n_local(scheme);
    const int n_ansatz = scheme == Scheme::Hybrid ? 2 * n + 1 : n + 1;
    const int tests_per_elem = scheme == Scheme::Hybrid ? 2 : 1;
    const int n_tests = tests_per_elem * n + 1;

    PGSystem pg;
    pg.lambda = lambda;
    pg.n_elems = n;
    pg.scheme = scheme;
    pg.B = Eigen::MatrixXd::Zero(n_tests, n_ansatz);
    pg.Gx = Eigen::MatrixXd::Zero(n_ansatz, n_ansatz);
    pg.Gy = Eigen::MatrixXd::Zero(n_tests, n_tests);

    for (int e = 0; e < n; ++e) {
        const double tau = mesh.size(e);
        const double g = lambda * tau;
        // (d/dt + lambda) of the local functions: integral over the element and
        // endpoint value scaled by tau (the Phi_T pairing on P^2).
        const double mean[3] = {-1.0 + g / 2.0, 1.0 + g / 2.0, 2.0 * g / 3.0};
        const double point[3] = {-1.0, 1.0 + g, -4.0};
        for (int a = 0; a < nl; ++a) {
            const int ca = col_index(scheme, n, e, a);
            pg.B(tests_per_elem * e, ca) += mean[a];
            if (scheme == Scheme::Hybrid) pg.B(tests_per_elem * e + 1, ca) += point[a];
            for (int b = 0; b < nl; ++b) {
                const int cb = col_index(scheme, n, e, b);
                pg.Gx(ca, cb) += lambda * tau * kMassLocal[a][b] + kStiffLocal[a][b] / (lambda * tau);
            }
        }
        // Y_lambda Gram of {chi_T, Phi_T}: |chi|^2 = tau, <chi,Phi> = tau,
        // |Phi|^2 = 29/2 tau.
        pg.Gy(tests_per_elem * e, tests_per_elem * e) = lambda * tau;
        if (scheme == Scheme::Hybrid) {
            pg.Gy(tests_per_elem * e, tests_per_elem * e + 1) = lambda * tau;
            pg.Gy(tests_per_elem * e + 1, tests_per_elem * e) = lambda * tau;
            pg.Gy(tests_per_elem * e + 1, tests_per_elem * e + 1) = lambda * tau * 29.0 / 2.0;
        }
    }
    pg.B(n_tests - 1, 0) = 1.0;  // u(0) paired with w
    pg.Gy(n_tests - 1, n_tests - 1) = 1.0;
    return pg;
}

Vec pg_rhs(const PGSystem& pg, const TimeMesh& mesh, const std::function<double(double)>& f,
           double u0) {
    const int n = pg.n_elems;
    const int tests_per_elem = pg.scheme == Scheme::Hybrid ? 2 : 1;
    Vec rhs = Vec::Zero(tests_per_elem * n + 1);
    for (int e = 0; e < n; ++e) {
        const double t0 = mesh.left(e);
        const double tau = mesh.size(e);
        // Simpson, exact for the elementwise quadratic data model.
        rhs[tests_per_elem * e] =
            tau / 6.0 * (f(t0) + 4.0 * f(t0 + tau / 2.0) + f(t0 + tau));
        if (pg.scheme == Scheme::Hybrid) {
            rhs[tests_per_elem * e + 1] = tau * f(t0 + tau);
        }
    }
    rhs[tests_per_elem * n] = u0;
    return rhs;
}

Vec pg_solve(const PGSystem& pg, const Vec& rhs) {
    if (pg.B.rows() != pg.B.cols()) {
        throw std::invalid_argument("pg_solve: system is not square");
    }
    return pg.B.fullPivLu().solve(rhs);
}

double pg_eval(const PGSystem& pg, const TimeMesh& mesh, const Vec& coeffs, int elem,
               double theta) {
    const int n = pg.n_elems;
    double v = coeffs[elem] * (1.0 - theta) + coeffs[elem + 1] * theta;
    if (pg.scheme == Scheme::Hybrid) {
        v += coeffs[n + 1 + elem] * 4.0 * theta * (1.0 - theta);
    }
    return v;
}

double infsup_constant(double lambda, const TimeMesh& mesh, Scheme scheme) {
    PGSystem pg = assemble_pg(lambda, mesh, scheme);
    Eigen::LLT<Eigen::MatrixXd> lx(pg.Gx);
    Eigen::LLT<Eigen::MatrixXd> ly(pg.Gy);
    if (lx.info() != Eigen::Success || ly.info() != Eigen::Success) {
        throw numerical_error("infsup_constant: Gram factorization failed");
    }
    // C = Ly^{-1} B Lx^{-T}; the variational quotient over the quadratic norms.
    Eigen::MatrixXd C = ly.matrixL().solve(pg.B);
    C = lx.matrixL().solve(C.transpose()).transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(C);
    return svd.singularValues().minCoeff();
}

}  // namespace radapt::petrov
