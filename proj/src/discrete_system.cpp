#include "radapt/discrete_system.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace radapt {

namespace {

bool is_symmetric(const SpMat& A) {
    return (SpMat(A.transpose()) - A).norm() <= 1e-12 * std::max(1e-300, A.norm());
}

}  // namespace

DiscreteSystem::DiscreteSystem(SpMat M, SpMat K) : mass_(std::move(M)), stiffness_(std::move(K)) {
    if (mass_.rows() != mass_.cols() || stiffness_.rows() != stiffness_.cols() ||
        mass_.rows() != stiffness_.rows()) {
        throw std::invalid_argument("DiscreteSystem: M and K must be square of equal size");
    }
    if (!is_symmetric(mass_) || !is_symmetric(stiffness_)) {
        throw std::invalid_argument("DiscreteSystem: M and K must be symmetric");
    }
    mass_.makeCompressed();
    stiffness_.makeCompressed();
    k_solver_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(stiffness_);
    if (k_solver_->info() != Eigen::Success || (k_solver_->vectorD().array() <= 0.0).any()) {
        throw std::invalid_argument("DiscreteSystem: K is not positive definite");
    }
    Eigen::SimplicialLDLT<SpMat> m_test(mass_);
    if (m_test.info() != Eigen::Success || (m_test.vectorD().array() <= 0.0).any()) {
        throw std::invalid_argument("DiscreteSystem: M is not positive definite");
    }
}

void DiscreteSystem::check_dim(Eigen::Index n) const {
    if (n != dim()) throw std::invalid_argument("DiscreteSystem: dimension mismatch");
}

double DiscreteSystem::norm_H(const Vec& x) const {
    check_dim(x.size());
    return std::sqrt(std::max(0.0, x.dot(mass_ * x)));
}

double DiscreteSystem::norm_V(const Vec& x) const {
    check_dim(x.size());
    return std::sqrt(std::max(0.0, x.dot(stiffness_ * x)));
}

double DiscreteSystem::norm_Vstar(const Vec& g) const {
    check_dim(g.size());
    ++counters_.k_solves;
    return std::sqrt(std::max(0.0, g.dot(k_solver_->solve(g))));
}

double DiscreteSystem::norm_Vstar(const VecC& g) const {
    double re = norm_Vstar(Vec(g.real()));
    double im = norm_Vstar(Vec(g.imag()));
    return std::sqrt(re * re + im * im);
}

double DiscreteSystem::norm_Vstar_spectral(const Vec& g) const {
    check_dim(g.size());
    const SpectralFactorization& sf = eigendecompose();
    Vec modal = sf.eigenvectors.transpose() * g;
    return std::sqrt((modal.array().square() / sf.eigenvalues.array()).sum());
}

Vec DiscreteSystem::solve_K(const Vec& b) const {
    check_dim(b.size());
    ++counters_.k_solves;
    return k_solver_->solve(b);
}

const Eigen::SimplicialLDLT<SpMat>& DiscreteSystem::real_fact(double s) const {
    for (auto it = real_cache_.begin(); it != real_cache_.end(); ++it) {
        if (it->s == s) {
            real_cache_.splice(real_cache_.begin(), real_cache_, it);
            return real_cache_.front().solver;
        }
    }
    real_cache_.emplace_front();
    real_cache_.front().s = s;
    SpMat A = s * mass_ + stiffness_;
    real_cache_.front().solver.compute(A);
    if (real_cache_.front().solver.info() != Eigen::Success) {
        real_cache_.pop_front();
        throw numerical_error("shifted_solve: factorization of (sM + K) failed");
    }
    while (real_cache_.size() > kMaxCachedShifts) real_cache_.pop_back();
    return real_cache_.front().solver;
}

const Eigen::SparseLU<SpMatC>& DiscreteSystem::complex_fact(Complex s) const {
    for (auto it = complex_cache_.begin(); it != complex_cache_.end(); ++it) {
        if (it->s == s) {
            complex_cache_.splice(complex_cache_.begin(), complex_cache_, it);
            return complex_cache_.front().solver;
        }
    }
    complex_cache_.emplace_front();
    complex_cache_.front().s = s;
    SpMatC A = (mass_.cast<Complex>() * s + stiffness_.cast<Complex>()).pruned();
    complex_cache_.front().solver.compute(A);
    if (complex_cache_.front().solver.info() != Eigen::Success) {
        complex_cache_.pop_front();
        throw numerical_error("shifted_solve: factorization of (sM + K) failed");
    }
    while (complex_cache_.size() > kMaxCachedShifts) complex_cache_.pop_back();
    return complex_cache_.front().solver;
}

Vec DiscreteSystem::shifted_solve(double s, const Vec& b) const {
    check_dim(b.size());
    Vec x = real_fact(s).solve(b);
    double rhs_norm = b.norm();
    if (rhs_norm > 0.0) {
        double res = (s * (mass_ * x) + stiffness_ * x - b).norm() / rhs_norm;
        if (!(res <= 1e-10)) throw numerical_error("shifted_solve: residual too large (singular shift?)");
    }
    return x;
}

VecC DiscreteSystem::shifted_solve(Complex s, const VecC& b) const {
    check_dim(b.size());
    VecC x = complex_fact(s).solve(b);
    double rhs_norm = b.norm();
    if (rhs_norm > 0.0) {
        VecC res = s * (mass_.cast<Complex>() * x) + stiffness_.cast<Complex>() * x - b;
        if (!(res.norm() / rhs_norm <= 1e-10)) {
            throw numerical_error("shifted_solve: residual too large (singular shift?)");
        }
    }
    return x;
}

const SpectralFactorization& DiscreteSystem::eigendecompose() const {
    if (!spectral_) {
        if (dim() > 5000) {
            throw std::invalid_argument("eigendecompose: dense oracle guarded to dim <= 5000");
        }
        Eigen::MatrixXd Kd(stiffness_);
        Eigen::MatrixXd Md(mass_);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
        if (es.info() != Eigen::Success) {
            throw std::invalid_argument("eigendecompose: generalized eigenproblem failed");
        }
        auto sf = std::make_unique<SpectralFactorization>();
        sf->eigenvalues = es.eigenvalues();
        sf->eigenvectors = es.eigenvectors();
        if ((sf->eigenvalues.array() <= 0.0).any()) {
            throw std::invalid_argument("eigendecompose: inputs are not SPD");
        }
        spectral_ = std::move(sf);
    }
    return *spectral_;
}

Vec DiscreteSystem::modal_solution(const Vec& u0, double t) const {
    const SpectralFactorization& sf = eigendecompose();
    Vec modal = sf.eigenvectors.transpose() * (mass_ * u0);
    modal.array() *= (-sf.eigenvalues.array() * t).exp();
    return sf.eigenvectors * modal;
}

void DiscreteSystem::clear_shift_cache() const {
    real_cache_.clear();
    complex_cache_.clear();
}

void write_matrix(const SpMat& A, std::ostream& os) {
    os.precision(17);
    os << "%dim " << A.rows() << "\n";
    for (int k = 0; k < A.outerSize(); ++k) {
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
        }
    }
}

SpMat read_matrix(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%dim", 0) != 0) {
        throw std::invalid_argument("read_matrix: missing %dim header");
    }
    const int n = std::stoi(line.substr(4));
    std::vector<Eigen::Triplet<double>> trips;
    int r, c;
    double v;
    while (is >> r >> c >> v) trips.emplace_back(r, c, v);
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

}  // namespace radapt
