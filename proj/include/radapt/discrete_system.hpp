#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <iosfwd>
#include <list>
#include <memory>
#include <stdexcept>

namespace radapt {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<std::complex<double>>;
using Vec = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Thrown when a linear solve or factorization cannot be completed to the
/// required accuracy (singular shift, indefinite input, ...).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Generalized eigenpairs K e = lambda M e with E^T M E = I and
/// E^T K E = diag(lambda), eigenvalues ascending. Dense; test oracle.
struct SpectralFactorization {
    Vec eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

struct SolveCounters {
    long stage_solves = 0;     // Radau/CN time-step solves (2 per element step)
    long snapshot_solves = 0;  // Laplace-domain shifted solves
    long k_solves = 0;         // stiffness solves (dual norms, estimator)
    void reset() { *this = SolveCounters{}; }
};

/// The finite-dimensional Gelfand triple V <= H <= V*: M carries the H inner
/// product, K the V inner product and the operator (<Au, v> = v^T K u).
/// Functional vectors are load-vector representations; an element x viewed
/// in V* has functional vector M x.
///
/// Shifted factorizations of (sM + K) are cached with a bounded FIFO so
/// repeated solves at the same shift (time stepping, dual norms) reuse them.
class DiscreteSystem {
public:
    DiscreteSystem(SpMat M, SpMat K);

    int dim() const { return static_cast<int>(mass_.rows()); }
    const SpMat& mass() const { return mass_; }
    const SpMat& stiffness() const { return stiffness_; }

    double norm_H(const Vec& x) const;
    double norm_V(const Vec& x) const;
    /// sqrt(g^T K^{-1} g) for a functional vector g.
    double norm_Vstar(const Vec& g) const;
    /// V*-norm of a complex functional vector (real and imaginary parts add).
    double norm_Vstar(const VecC& g) const;
    /// Dual norm through the spectral factorization: sum (E^T g)_i^2 / lambda_i.
    double norm_Vstar_spectral(const Vec& g) const;

    /// K^{-1} b via the cached Cholesky factorization.
    Vec solve_K(const Vec& b) const;
    /// (sM + K)^{-1} b, real shift s >= 0.
    Vec shifted_solve(double s, const Vec& b) const;
    /// (sM + K)^{-1} b, complex shift; residual checked to 1e-10 relative.
    VecC shifted_solve(Complex s, const VecC& b) const;

    /// Dense generalized eigendecomposition (guarded to dim <= 5000); cached.
    const SpectralFactorization& eigendecompose() const;
    bool has_spectral() const { return spectral_ != nullptr; }

    /// Exact solution of u' + Au = 0, u(0) = u0 at time t (modal expansion).
    Vec modal_solution(const Vec& u0, double t) const;

    SolveCounters& counters() const { return counters_; }
    void clear_shift_cache() const;

private:
    SpMat mass_;
    SpMat stiffness_;
    std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> k_solver_;
    mutable std::unique_ptr<SpectralFactorization> spectral_;
    mutable SolveCounters counters_;

    struct RealFact {
        double s;
        Eigen::SimplicialLDLT<SpMat> solver;
    };
    struct ComplexFact {
        Complex s;
        Eigen::SparseLU<SpMatC> solver;
    };
    static constexpr size_t kMaxCachedShifts = 6;
    mutable std::list<RealFact> real_cache_;
    mutable std::list<ComplexFact> complex_cache_;

    const Eigen::SimplicialLDLT<SpMat>& real_fact(double s) const;
    const Eigen::SparseLU<SpMatC>& complex_fact(Complex s) const;
    void check_dim(Eigen::Index n) const;
};

/// Coordinate text format: header `%dim N`, then `row col value` per line.
void write_matrix(const SpMat& A, std::ostream& os);
SpMat read_matrix(std::istream& is);

}  // namespace radapt
