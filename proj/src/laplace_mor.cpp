#include "radapt/laplace_mor.hpp"

#include <cmath>

namespace radapt::mor {

VecC laplace_snapshot(const DiscreteSystem& system, const LaplaceRhs& fhat, const Vec& u0,
                      Complex s) {
    VecC rhs = (system.mass() * u0).cast<Complex>();
    if (fhat) rhs += fhat(s);
    VecC u = system.shifted_solve(s, rhs);
    ++system.counters().snapshot_solves;
    return u;
}

SnapshotSet build_snapshots(const DiscreteSystem& system, const LaplaceRhs& fhat, const Vec& u0,
                            const sinc::SincGrid& grid) {
    SnapshotSet snaps;
    snaps.grid = grid;
    snaps.u0 = u0;
    snaps.fhat = fhat;
    snaps.u_hat.reserve(grid.M + 1);
    snaps.du_hat.reserve(grid.M + 1);
    for (int k = 0; k <= grid.M; ++k) {
        const Complex s = grid.point(k);
        VecC u = laplace_snapshot(system, fhat, u0, s);
        snaps.du_hat.push_back(s * u - u0.cast<Complex>());
        snaps.u_hat.push_back(std::move(u));
    }
    return snaps;
}

Vec ReducedBasis::project(const DiscreteSystem& system, const Vec& x) const {
    return W * (W.transpose() * (system.stiffness() * x));
}

VecC ReducedBasis::project(const DiscreteSystem& system, const VecC& x) const {
    return project(system, Vec(x.real())) + Complex(0.0, 1.0) * project(system, Vec(x.imag()));
}

ReducedBasis build_reduced_basis(const DiscreteSystem& system, const SnapshotSet& snaps, int R) {
    if (R < 1) throw std::invalid_argument("build_reduced_basis: R must be >= 1");
    const int N = system.dim();
    const int M = snaps.grid.M;
    Eigen::MatrixXd S(N, 1 + 4 * (M + 1));
    int col = 0;
    S.col(col++) = snaps.u0;
    for (int k = 0; k <= M; ++k) {
        const double mult = k == 0 ? 1.0 : 2.0;  // conjugate pair weight
        const double w = std::sqrt(mult * snaps.grid.omega_at(k));
        const double sigma = 1.0 / (1.0 + std::abs(snaps.grid.point(k)));
        S.col(col++) = w * snaps.u_hat[k].real();
        S.col(col++) = w * snaps.u_hat[k].imag();
        S.col(col++) = w * sigma * snaps.du_hat[k].real();
        S.col(col++) = w * sigma * snaps.du_hat[k].imag();
    }

    // POD in the V inner product: with K = P^T L L^T P, the SVD of L^T P S
    // yields modes W = P^T L^{-T} U that satisfy W^T K W = I.
    Eigen::SimplicialLLT<SpMat> llt(system.stiffness());
    if (llt.info() != Eigen::Success) {
        throw numerical_error("build_reduced_basis: Cholesky of K failed");
    }
    Eigen::MatrixXd Z = llt.matrixU() * (llt.permutationP() * S);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU);

    ReducedBasis basis;
    basis.singular_values = svd.singularValues();
    const double smax = basis.singular_values.size() ? basis.singular_values[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < basis.singular_values.size(); ++i) {
        if (basis.singular_values[i] > 1e-13 * smax) ++rank;
    }
    const int keep = std::min(R, rank);
    basis.rank_deficient = keep < R;
    Eigen::MatrixXd X = llt.matrixU().solve(svd.matrixU().leftCols(keep));
    basis.W = llt.permutationPinv() * X;
    return basis;
}

double epsilon_M(const DiscreteSystem& system, const SnapshotSet& snaps,
                 const ReducedBasis& basis) {
    const SpMat& M = system.mass();
    double eps = 0.0;
    for (int k = 0; k <= snaps.grid.M; ++k) {
        const double w = (k == 0 ? 1.0 : 2.0) * snaps.grid.omega_at(k);
        VecC ru = snaps.u_hat[k] - basis.project(system, snaps.u_hat[k]);
        const double nv_re = system.norm_V(Vec(ru.real()));
        const double nv_im = system.norm_V(Vec(ru.imag()));
        eps += w * (nv_re * nv_re + nv_im * nv_im);
        VecC rd = snaps.du_hat[k] - basis.project(system, snaps.du_hat[k]);
        const double nd_re = system.norm_Vstar(Vec(M * rd.real()));
        const double nd_im = system.norm_Vstar(Vec(M * rd.imag()));
        eps += w * (nd_re * nd_re + nd_im * nd_im);
    }
    return eps;
}

Vec ReducedModel::reduce_initial(const DiscreteSystem& full, const Vec& u0) const {
    return system->solve_K(Vec(W.transpose() * (full.stiffness() * u0)));
}

RhsFunction ReducedModel::reduce_rhs(const RhsFunction& F) const {
    if (F.is_zero()) return RhsFunction::zero(static_cast<int>(W.cols()));
    const Eigen::MatrixXd Wt = W.transpose();
    auto eval = F.eval;
    return RhsFunction{[Wt, eval](double t) { return Vec(Wt * eval(t)); },
                       F.elementwise_quadratic};
}

ReducedModel reduce_system(const DiscreteSystem& system, const ReducedBasis& basis) {
    ReducedModel model;
    model.W = basis.W;
    Eigen::MatrixXd Mr = basis.W.transpose() * (system.mass() * basis.W);
    Eigen::MatrixXd Kr = basis.W.transpose() * (system.stiffness() * basis.W);
    // Symmetrize away roundoff so the SPD checks see exact symmetry.
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Kr = 0.5 * (Kr + Kr.transpose()).eval();
    model.system = std::make_unique<DiscreteSystem>(Mr.sparseView(), Kr.sparseView());
    return model;
}

MorResult mor_pipeline(const DiscreteSystem& system, const LaplaceRhs& fhat, const RhsFunction& F,
                       const Vec& u0, const MorOptions& opts) {
    MorResult result;
    const long snap0 = system.counters().snapshot_solves;
    sinc::SincGrid grid = sinc::make_grid(opts.alpha, opts.d, opts.M);
    SnapshotSet snaps = build_snapshots(system, fhat, u0, grid);
    result.basis = build_reduced_basis(system, snaps, opts.R);
    result.snapshot_solves = system.counters().snapshot_solves - snap0;

    ReducedModel model = reduce_system(system, result.basis);
    Vec u0r = model.reduce_initial(system, u0);
    RhsFunction Fr = model.reduce_rhs(F);

    // Error measurement against the exact modal solution of the full system
    // (f = 0 benchmark): everything is expressed in modal coordinates.
    const SpectralFactorization& sf = system.eigendecompose();
    Eigen::MatrixXd Wm = sf.eigenvectors.transpose() * (system.mass() * model.W);
    Vec u0m = sf.eigenvectors.transpose() * (system.mass() * u0);
    const auto& lam = sf.eigenvalues.array();

    static const double gx[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                 0.8650633666889845, 0.9739065285171717};
    static const double gw[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                 0.1494513491505806, 0.0666713443086881};

    auto on_iteration = [&](int iter, const SplineSolution& sol, const EstimateResult& est) {
        double err_v = 0.0, err_dual_full = 0.0, err_dual_red = 0.0;
        for (int e = 0; e < sol.mesh.n_elements(); ++e) {
            const double tau = sol.mesh.size(e);
            const double t0 = sol.mesh.left(e);
            Vec ulm = Wm * sol.left[e];
            Vec k1m = Wm * sol.k1[e];
            Vec k2m = Wm * sol.k2[e];
            for (int i = 0; i < 10; ++i) {
                const double xg = i < 5 ? -gx[4 - i] : gx[i - 5];
                const double wg = i < 5 ? gw[4 - i] : gw[i - 5];
                const double th = 0.5 * (1.0 + xg);
                const double w = tau * 0.5 * wg;
                Eigen::ArrayXd exact = u0m.array() * (-lam * (t0 + th * tau)).exp();
                Eigen::ArrayXd um = ulm.array() +
                                    tau * (th * k1m.array() +
                                           (3.0 * th * th - 2.0 * th) / 4.0 *
                                               (k2m.array() - k1m.array()));
                Eigen::ArrayXd dum =
                    k1m.array() + 0.5 * (3.0 * th - 1.0) * (k2m.array() - k1m.array());
                Eigen::ArrayXd du_diff = dum + lam * exact;
                err_v += w * ((um - exact).square() * lam).sum();
                err_dual_full += w * (du_diff.square() / lam).sum();
                // Reduced dual: restrict the load form of the derivative error
                // to the reduced space (K_R = I).
                Vec gr = Wm.transpose() * Vec(du_diff.matrix());
                err_dual_red += w * gr.squaredNorm();
            }
        }
        MorRecord rec;
        rec.iter = iter;
        rec.n_elems = sol.mesh.n_elements();
        rec.eta = est.total();
        rec.err_x_full_dual = std::sqrt(err_v + err_dual_full);
        rec.err_x_reduced_dual = std::sqrt(err_v + err_dual_red);
        result.records.push_back(rec);
    };

    AdaptiveOptions aopts;
    aopts.theta = opts.theta;
    aopts.G = opts.G;
    aopts.tol = opts.tol;
    aopts.max_iter = opts.max_iter;
    adaptive_loop(*model.system, Fr, u0r, opts.t_end, opts.n0, aopts, on_iteration);
    result.reduced_stage_solves = model.system->counters().stage_solves;
    return result;
}

}  // namespace radapt::mor
