#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "radapt/discrete_system.hpp"
#include "radapt/radau.hpp"
#include "radapt/sinc.hpp"

namespace radapt::mor {

/// Laplace-domain load evaluator s -> fhat(s) (complex load vector).
using LaplaceRhs = std::function<VecC(Complex)>;

/// Laplace-domain solution samples on a sinc grid. Conjugate symmetry of
/// real data is exploited: only k = 0..M is stored, u_hat(conj(s)) =
/// conj(u_hat(s)).
struct SnapshotSet {
    sinc::SincGrid grid;
    Vec u0;
    std::vector<VecC> u_hat;   // k = 0..M
    std::vector<VecC> du_hat;  // s_k u_hat_k - u0
    LaplaceRhs fhat;           // may be null for f = 0
};

/// Solve (s M + K) u_hat = fhat(s) + M u0.
VecC laplace_snapshot(const DiscreteSystem& system, const LaplaceRhs& fhat, const Vec& u0,
                      Complex s);

/// Snapshots at all grid points k = 0..M (negative k by conjugation);
/// exactly M+1 shifted solves.
SnapshotSet build_snapshots(const DiscreteSystem& system, const LaplaceRhs& fhat, const Vec& u0,
                            const sinc::SincGrid& grid);

/// V-orthonormal reduced basis with diagnostics.
struct ReducedBasis {
    Eigen::MatrixXd W;       // N x R, W^T K W = I
    Vec singular_values;     // all singular values of the weighted snapshot matrix
    bool rank_deficient = false;

    int dimension() const { return static_cast<int>(W.cols()); }
    /// V-orthogonal projection P x = W (W^T K x) in coefficient space.
    Vec project(const DiscreteSystem& system, const Vec& x) const;
    VecC project(const DiscreteSystem& system, const VecC& x) const;
};

/// Weighted POD in the V inner product of the snapshot columns
/// {u0} + {sqrt(m_k w_k) Re/Im u_hat_k} + {sqrt(m_k w_k) sigma_k Re/Im du_hat_k},
/// sigma_k = 1/(1 + |s_k|), m_0 = 1 and m_k = 2 for the conjugate pairs.
/// Keeps the R leading V-orthonormal modes (fewer when the rank is smaller).
ReducedBasis build_reduced_basis(const DiscreteSystem& system, const SnapshotSet& snaps, int R);

/// Discrete goal eps^(M): sum_j w_j ( |u_hat_j - P u_hat_j|_V^2
/// + |du_hat_j - P du_hat_j|_{V*}^2 ) over j = -M..M.
double epsilon_M(const DiscreteSystem& system, const SnapshotSet& snaps,
                 const ReducedBasis& basis);

/// Galerkin restriction to the reduced space: M_R = W^T M W, K_R = I,
/// F_R(t) = W^T F(t), reduced initial value W^T K u0.
struct ReducedModel {
    std::unique_ptr<DiscreteSystem> system;
    Eigen::MatrixXd W;

    Vec lift(const Vec& x) const { return W * x; }
    Vec reduce_initial(const DiscreteSystem& full, const Vec& u0) const;
    RhsFunction reduce_rhs(const RhsFunction& F) const;
};

ReducedModel reduce_system(const DiscreteSystem& system, const ReducedBasis& basis);

struct MorRecord {
    int iter = 0;
    int n_elems = 0;
    double eta = 0.0;
    double err_x_full_dual = 0.0;     // V*-part measured in the full dual norm
    double err_x_reduced_dual = 0.0;  // V*-part measured in the reduced dual
};

struct MorResult {
    ReducedBasis basis;
    std::vector<MorRecord> records;
    long snapshot_solves = 0;
    long reduced_stage_solves = 0;
};

struct MorOptions {
    int M = 50;
    int R = 10;
    double alpha = 1.0;
    double d = M_PI / 4.0;
    double theta = 0.5;
    int G = 4;
    double tol = 0.0;
    int max_iter = 20;
    int n0 = 4;
    double t_end = 1.0;
};

/// Snapshots -> POD basis -> adaptive Radau stepping on the reduced system;
/// per-iteration lifted X-norm errors against the exact modal solution of
/// the full system (f = 0 benchmarks).
MorResult mor_pipeline(const DiscreteSystem& system, const LaplaceRhs& fhat,
                       const RhsFunction& F, const Vec& u0, const MorOptions& opts);

}  // namespace radapt::mor
