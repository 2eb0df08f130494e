#include <doctest.h>

#include <cmath>
#include <random>

#include "radapt/laplace_mor.hpp"

using namespace radapt;
using namespace radapt::mor;

namespace {

SpMat diag(const std::vector<double>& d) {
    SpMat m(d.size(), d.size());
    for (size_t i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
    return m;
}

DiscreteSystem random_system(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd A(n, n), B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A(i, j) = gauss(rng);
            B(i, j) = gauss(rng);
        }
    Eigen::MatrixXd M = A * A.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd K = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    return DiscreteSystem(M.sparseView(), K.sparseView());
}

}  // namespace

TEST_SUITE("laplace_mor") {

TEST_CASE("scalar snapshot is the transform of the decaying exponential") {
    DiscreteSystem sys(diag({1.0}), diag({3.0}));
    Vec u0 = Vec::Constant(1, 2.0);
    for (Complex s : {Complex(1.0, 0.0), Complex(1.0, 5.0), Complex(2.0, -1.0)}) {
        VecC u = laplace_snapshot(sys, nullptr, u0, s);
        const Complex expect = 2.0 / (s + 3.0);
        CHECK(std::abs(u[0] - expect) < 1e-13);
    }
}

TEST_CASE("eigenvector data stays modal and conjugation symmetry holds") {
    DiscreteSystem sys = random_system(6, 3);
    const SpectralFactorization& sf = sys.eigendecompose();
    const Complex s(1.0, 2.5);
    for (int i : {0, 3}) {
        Vec e = sf.eigenvectors.col(i);
        VecC u = laplace_snapshot(sys, nullptr, e, s);
        VecC expect = e.cast<Complex>() / (s + sf.eigenvalues[i]);
        CHECK((u - expect).norm() <= 1e-12 * expect.norm());

        VecC uc = laplace_snapshot(sys, nullptr, e, std::conj(s));
        CHECK((uc - u.conjugate()).norm() <= 1e-12 * u.norm());
    }
}

TEST_CASE("snapshot set: counts, derivative relation, M = 0 edge") {
    DiscreteSystem sys = random_system(5, 9);
    Vec u0 = Vec::Ones(5);

    sinc::SincGrid g0 = sinc::make_grid(1.0, M_PI / 4.0, 0);
    const long before = sys.counters().snapshot_solves;
    SnapshotSet single = build_snapshots(sys, nullptr, u0, g0);
    CHECK(single.u_hat.size() == 1);
    CHECK(sys.counters().snapshot_solves - before == 1);

    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 12);
    const long b2 = sys.counters().snapshot_solves;
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    CHECK(sys.counters().snapshot_solves - b2 == 13);  // M + 1 by conjugation
    for (int k = 0; k <= g.M; ++k) {
        VecC expect = g.point(k) * snaps.u_hat[k] - u0.cast<Complex>();
        CHECK((snaps.du_hat[k] - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
}

TEST_CASE("source-driven snapshots follow the modal resolvent") {
    DiscreteSystem sys = random_system(4, 17);
    const SpectralFactorization& sf = sys.eigendecompose();
    Vec c = Vec::LinSpaced(4, 0.5, 2.0);
    // fhat(s) = (M c)/(s + 1): load representation of c e^{-t}.
    LaplaceRhs fhat = [&sys, c](Complex s) {
        return VecC((sys.mass() * c).cast<Complex>() / (s + 1.0));
    };
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 4);
    SnapshotSet snaps = build_snapshots(sys, fhat, Vec::Zero(4), g);
    for (int k = 0; k <= g.M; ++k) {
        const Complex s = g.point(k);
        Vec cm = sf.eigenvectors.transpose() * (sys.mass() * c);
        VecC expect = VecC::Zero(4);
        for (int i = 0; i < 4; ++i) {
            expect += (cm[i] / ((s + 1.0) * (s + sf.eigenvalues[i]))) *
                      sf.eigenvectors.col(i).cast<Complex>();
        }
        CHECK((snaps.u_hat[k] - expect).norm() <= 1e-11 * (1.0 + expect.norm()));
    }
}

TEST_CASE("single snapshot basis is the V-normalized snapshot") {
    DiscreteSystem sys = random_system(5, 33);
    Vec u0 = Vec::LinSpaced(5, -1.0, 1.5);
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 0);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    // With u0 collinear data the snapshot span is one-dimensional only when
    // u_hat is parallel to u0; use u0 itself as the only direction.
    // (s + A)^(-1) M u0 is generally not parallel to u0, so request R = 1 and
    // check V-orthonormality and membership of W in the snapshot span.
    ReducedBasis basis = build_reduced_basis(sys, snaps, 1);
    REQUIRE(basis.dimension() == 1);
    CHECK(std::abs(sys.norm_V(Vec(basis.W.col(0))) - 1.0) < 1e-10);

    // Exactly one-dimensional data: zero initial value, single real snapshot.
    SnapshotSet one;
    one.grid = g;
    one.u0 = Vec::Zero(5);
    one.u_hat = {u0.cast<Complex>()};
    one.du_hat = {VecC::Zero(5)};
    ReducedBasis b1 = build_reduced_basis(sys, one, 3);
    CHECK(b1.rank_deficient);
    REQUIRE(b1.dimension() == 1);
    Vec w = b1.W.col(0);
    CHECK((w - (u0 / sys.norm_V(u0))).cwiseAbs().minCoeff() <=
          (w + (u0 / sys.norm_V(u0))).cwiseAbs().minCoeff() + 1e-9);
    CHECK(std::abs(sys.norm_V(w) - 1.0) < 1e-10);
}

TEST_CASE("W is V-orthonormal and the projector is idempotent and K-symmetric") {
    DiscreteSystem sys = random_system(8, 77);
    Vec u0 = Vec::Ones(8);
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 10);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    ReducedBasis basis = build_reduced_basis(sys, snaps, 4);
    Eigen::MatrixXd wkw = basis.W.transpose() * sys.stiffness() * basis.W;
    CHECK((wkw - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-10);

    std::mt19937 rng(4);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 5; ++trial) {
        Vec x(8), y(8);
        for (int i = 0; i < 8; ++i) {
            x[i] = gauss(rng);
            y[i] = gauss(rng);
        }
        Vec px = basis.project(sys, x);
        CHECK((basis.project(sys, px) - px).norm() <= 1e-10 * (1.0 + px.norm()));
        const double a = px.dot(sys.stiffness() * y);
        const double b = x.dot(sys.stiffness() * basis.project(sys, y));
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("epsilon_M: exact span gives zero, R = 0 gives the full weighted sum") {
    DiscreteSystem sys = random_system(6, 21);
    Vec u0 = Vec::LinSpaced(6, 0.2, 1.0);
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 3);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);

    // Basis spanning all snapshots and u0: columns {u0, Re/Im u_hat_k} span
    // at most dim 6; request full rank.
    ReducedBasis full = build_reduced_basis(sys, snaps, 6);
    const double scale = epsilon_M(sys, snaps, ReducedBasis{Eigen::MatrixXd(6, 0), Vec(), false});
    CHECK(epsilon_M(sys, snaps, full) <= 1e-18 * scale);

    // R = 0: the projector vanishes, the sum is the plain weighted energy.
    double expect = 0.0;
    for (int k = 0; k <= g.M; ++k) {
        const double w = (k == 0 ? 1.0 : 2.0) * g.omega_at(k);
        const double nvr = sys.norm_V(Vec(snaps.u_hat[k].real()));
        const double nvi = sys.norm_V(Vec(snaps.u_hat[k].imag()));
        const double ndr = sys.norm_Vstar(Vec(sys.mass() * snaps.du_hat[k].real()));
        const double ndi = sys.norm_Vstar(Vec(sys.mass() * snaps.du_hat[k].imag()));
        expect += w * (nvr * nvr + nvi * nvi + ndr * ndr + ndi * ndi);
    }
    CHECK(scale == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("epsilon_M is nonincreasing in R") {
    DiscreteSystem sys = random_system(8, 13);
    Vec u0 = Vec::Ones(8);
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 8);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    double prev = 1e300;
    for (int R = 1; R <= 6; ++R) {
        ReducedBasis basis = build_reduced_basis(sys, snaps, R);
        const double eps = epsilon_M(sys, snaps, basis);
        CHECK(eps <= prev * (1.0 + 1e-12));
        prev = eps;
    }
}

TEST_CASE("POD beats random subspaces of the snapshot span") {
    DiscreteSystem sys = random_system(7, 55);
    Vec u0 = Vec::Ones(7);
    sinc::SincGrid g = sinc::make_grid(1.0, M_PI / 4.0, 6);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    const int R = 3;
    ReducedBasis pod = build_reduced_basis(sys, snaps, R);
    const double eps_pod = epsilon_M(sys, snaps, pod);

    // Span matrix of all snapshot directions.
    Eigen::MatrixXd S(7, 1 + 4 * (g.M + 1));
    int col = 0;
    S.col(col++) = u0;
    for (int k = 0; k <= g.M; ++k) {
        S.col(col++) = snaps.u_hat[k].real();
        S.col(col++) = snaps.u_hat[k].imag();
        S.col(col++) = snaps.du_hat[k].real();
        S.col(col++) = snaps.du_hat[k].imag();
    }
    std::mt19937 rng(8);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd C(S.cols(), R);
        for (int i = 0; i < C.rows(); ++i)
            for (int j = 0; j < R; ++j) C(i, j) = gauss(rng);
        Eigen::MatrixXd W = S * C;  // random R-dim subspace of the span
        // V-orthonormalize by Gram-Schmidt in the K inner product.
        for (int j = 0; j < R; ++j) {
            for (int i = 0; i < j; ++i) {
                W.col(j) -= W.col(i).dot(sys.stiffness() * W.col(j)) * W.col(i);
            }
            W.col(j) /= sys.norm_V(Vec(W.col(j)));
        }
        ReducedBasis rnd{W, Vec(), false};
        CHECK(epsilon_M(sys, snaps, rnd) >= eps_pod * (1.0 - 1e-10));
    }
}

TEST_CASE("reduce_system: identity basis reproduces the original system") {
    DiscreteSystem sys = random_system(5, 61);
    // V-orthonormal square basis: columns from the full POD of the identity.
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    Eigen::MatrixXd Kd(sys.stiffness());
    Eigen::LLT<Eigen::MatrixXd> llt(Kd);
    Eigen::MatrixXd Lmat = llt.matrixL();
    Eigen::MatrixXd W = Lmat.transpose().triangularView<Eigen::Upper>().solve(I);
    ReducedBasis basis{W, Vec(), false};
    ReducedModel model = reduce_system(sys, basis);
    // Same spectrum: the reduced system is congruent to the original.
    Vec lam_full = sys.eigendecompose().eigenvalues;
    Vec lam_red = model.system->eigendecompose().eigenvalues;
    CHECK((lam_full - lam_red).cwiseAbs().maxCoeff() <= 1e-9 * lam_full.maxCoeff());
}

TEST_CASE("reduce_system: single eigenvector gives the scalar modal system") {
    DiscreteSystem sys = random_system(6, 71);
    const SpectralFactorization& sf = sys.eigendecompose();
    const int mode = 2;
    const double lam = sf.eigenvalues[mode];
    Eigen::MatrixXd W = sf.eigenvectors.col(mode) / std::sqrt(lam);  // V-normalized
    ReducedBasis basis{W, Vec(), false};
    ReducedModel model = reduce_system(sys, basis);
    REQUIRE(model.system->dim() == 1);
    CHECK(model.system->mass().coeff(0, 0) == doctest::Approx(1.0 / lam).epsilon(1e-10));
    CHECK(model.system->stiffness().coeff(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    // Reduced dynamics preserve e^{-lambda t} for data along the mode.
    Vec u0 = 3.0 * sf.eigenvectors.col(mode);
    Vec u0r = model.reduce_initial(sys, u0);
    TimeMesh mesh = uniform_mesh(1.0, 40);
    SplineSolution sol = solve_time(*model.system, mesh, RhsFunction::zero(1), u0r);
    Vec lifted = model.lift(sol.right_value(39));
    Vec exact = 3.0 * std::exp(-lam) * sf.eigenvectors.col(mode);
    CHECK((lifted - exact).norm() <= 1e-4 * exact.norm());
}

TEST_CASE("exact reproduction when data lives in the reduced space") {
    DiscreteSystem sys = random_system(8, 91);
    // Random 3-dim V-orthonormal basis.
    std::mt19937 rng(14);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd W(8, 3);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 3; ++j) W(i, j) = gauss(rng);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < j; ++i) W.col(j) -= W.col(i).dot(sys.stiffness() * W.col(j)) * W.col(i);
        W.col(j) /= sys.norm_V(Vec(W.col(j)));
    }
    ReducedBasis basis{W, Vec(), false};
    ReducedModel model = reduce_system(sys, basis);

    Vec y0(3), y1(3), y2(3);
    for (int i = 0; i < 3; ++i) {
        y0[i] = gauss(rng);
        y1[i] = gauss(rng);
        y2[i] = gauss(rng);
    }
    Vec u0 = W * y0;
    const SpMat K = sys.stiffness();
    RhsFunction F{[=, &K](double t) { return Vec(K * (W * (y1 + t * y2))); }, true};

    TimeMesh mesh = trisect(uniform_mesh(1.0, 4), 1, 2);
    SplineSolution full = solve_time(sys, mesh, F, u0);
    SplineSolution red = solve_time(*model.system, mesh, model.reduce_rhs(F),
                                    model.reduce_initial(sys, u0));
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Vec lifted = model.lift(red.right_value(e));
        Vec direct = full.right_value(e);
        CHECK((lifted - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
    }
}

TEST_CASE("time-domain projection error obeys the weighted Laplace bound") {
    // Diagonal system: the exact trajectory is modal, the time-domain error
    // integral is computed by dense quadrature and compared against
    // e^{alpha t_end} (eps_M + quadrature slack).
    std::vector<double> lambdas = {1.0, 4.0, 9.0, 25.0};
    DiscreteSystem sys(diag({1.0, 1.0, 1.0, 1.0}), diag(lambdas));
    Vec u0(4);
    u0 << 1.0, 0.8, 0.5, 0.3;
    const double alpha = 1.0, d = M_PI / 4.0;
    const int M = 40;
    sinc::SincGrid g = sinc::make_grid(alpha, d, M);
    SnapshotSet snaps = build_snapshots(sys, nullptr, u0, g);
    ReducedBasis basis = build_reduced_basis(sys, snaps, 2);
    const double eps = epsilon_M(sys, snaps, basis);

    const double t_end = 1.0;
    const int NQ = 4000;
    double err = 0.0;
    for (int i = 0; i < NQ; ++i) {
        const double t = t_end * (i + 0.5) / NQ, w = t_end / NQ;
        Vec u(4), du(4);
        for (int m = 0; m < 4; ++m) {
            u[m] = u0[m] * std::exp(-lambdas[m] * t);
            du[m] = -lambdas[m] * u[m];
        }
        Vec pu = basis.project(sys, u);
        Vec pdu = basis.project(sys, du);
        for (int m = 0; m < 4; ++m) {
            err += w * lambdas[m] * (u[m] - pu[m]) * (u[m] - pu[m]);
            err += w * (du[m] - pdu[m]) * (du[m] - pdu[m]) / lambdas[m];
        }
    }
    const double slack = 10.0 * std::exp(-std::sqrt(2.0 * M_PI * d * M)) *
                         (1.0 + u0.squaredNorm());
    CHECK(err <= std::exp(alpha * t_end) * (eps + slack));
}

TEST_CASE("pipeline smoke test: counters and convergence to the full run") {
    std::vector<double> lambdas = {1.0, 5.0, 20.0, 80.0, 200.0};
    DiscreteSystem sys(diag({1.0, 1.0, 1.0, 1.0, 1.0}), diag(lambdas));
    Vec u0(5);
    u0 << 1.0, -0.5, 0.3, 0.2, -0.1;
    MorOptions opts;
    opts.M = 30;
    opts.R = 5;  // full dimension: reduction is exact
    opts.max_iter = 6;
    opts.n0 = 2;
    MorResult res = mor_pipeline(sys, nullptr, RhsFunction::zero(5), u0, opts);
    CHECK(res.snapshot_solves == opts.M + 1);
    REQUIRE(!res.records.empty());
    long expect_solves = 0;
    for (const auto& rec : res.records) expect_solves += 2L * rec.n_elems;
    CHECK(res.reduced_stage_solves == expect_solves);

    // With the full span captured, the lifted error equals the time-stepping
    // error of the full system: compare against a direct adaptive run.
    AdaptiveOptions aopts;
    aopts.max_iter = 6;
    double err_direct = 0.0;
    auto cb = [&](int, const SplineSolution& sol, const EstimateResult&) {
        err_direct = xnorm_error_modal(sys, sol);
    };
    adaptive_loop(sys, RhsFunction::zero(5), u0, 1.0, 2, aopts, cb);
    CHECK(res.records.back().err_x_full_dual ==
          doctest::Approx(err_direct).epsilon(1e-6));
}

}  // TEST_SUITE
