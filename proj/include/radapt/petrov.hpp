#pragma once

#include <array>
#include <functional>

#include "radapt/discrete_system.hpp"
#include "radapt/radau.hpp"
#include "radapt/time_mesh.hpp"

namespace radapt::petrov {

/// The piecewise-constant representer of point evaluation at the right
/// endpoint on P^2 of the reference element [0,1]: values on its thirds and
/// the L2 norm sqrt(29/2).
struct PsiReference {
    std::array<double, 3> values;
    double l2_norm;
};
PsiReference psi_on_reference();

/// Endpoint value and endpoint derivative of the invisible quadratic q_T with
/// q(t_T) = 1, zero residual mean and zero endpoint residual:
/// q(t_{T+1}) = 2 (3 - h lambda) / (h^2 lambda^2 + 4 h lambda + 6),
/// dq(t_{T+1}) = -lambda q(t_{T+1}).
std::pair<double, double> q_invisible(double lambda, double h);

/// Element matrix of the (l_T, q_T) block against the tests (chi_T, Phi_T)
/// and its determinant, gamma = lambda |T|.
struct MLambda {
    Eigen::Matrix2d matrix;
    double determinant;
};
MLambda mlambda(double gamma);

/// Dense scalar-mode Petrov-Galerkin system for parameter lambda.
///
/// Hybrid: ansatz = continuous piecewise quadratics (hats + bubbles), tests =
/// {chi_T, Phi_T} per element plus the initial-value functional as the last
/// row. Crank-Nicolson: piecewise linear ansatz, tests = {chi_T} + initial.
struct PGSystem {
    Eigen::MatrixXd B;   // bilinear form, tests x ansatz
    Eigen::MatrixXd Gx;  // X_lambda Gram on the ansatz basis
    Eigen::MatrixXd Gy;  // Y_lambda Gram on the tests, H weight on the last row
    double lambda = 0.0;
    int n_elems = 0;
    Scheme scheme = Scheme::Hybrid;
};

PGSystem assemble_pg(double lambda, const TimeMesh& mesh, Scheme scheme = Scheme::Hybrid);

/// Right-hand side for data f (elementwise quadratic in time) and u(0) = u0.
Vec pg_rhs(const PGSystem& pg, const TimeMesh& mesh, const std::function<double(double)>& f,
           double u0);

/// Solve the square PG system.
Vec pg_solve(const PGSystem& pg, const Vec& rhs);

/// Evaluate the PG ansatz expansion at local coordinate theta of an element.
double pg_eval(const PGSystem& pg, const TimeMesh& mesh, const Vec& coeffs, int elem,
               double theta);

/// Discrete inf-sup constant: smallest singular value of Ly^{-1} B Lx^{-T}
/// with Gx = Lx Lx^T and Gy = Ly Ly^T (dense; meshes up to ~512 elements).
double infsup_constant(double lambda, const TimeMesh& mesh, Scheme scheme = Scheme::Hybrid);

}  // namespace radapt::petrov
