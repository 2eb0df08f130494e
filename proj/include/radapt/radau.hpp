#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "radapt/discrete_system.hpp"
#include "radapt/time_mesh.hpp"

namespace radapt {

/// Right-hand side as a load-vector evaluator t -> F(t) with entries
/// <f(t), phi_i>. General data is projected per element onto quadratics by
/// interpolation at {t_T, t_T + |T|/3, t_{T+1}} before stepping/estimating.
struct RhsFunction {
    std::function<Vec(double)> eval;
    bool elementwise_quadratic = false;

    static RhsFunction zero(int dim);
    bool is_zero() const { return !eval; }
    Vec operator()(double t) const;
};

/// Continuous piecewise quadratic in time: left value plus two stage slopes
/// per element (time derivative at t_T + |T|/3 and at t_{T+1}).
struct SplineSolution {
    TimeMesh mesh;
    Vec u0;
    std::vector<Vec> left;  // value at t_T
    std::vector<Vec> k1, k2;

    /// Value of u at local coordinate theta = (t - t_T)/|T| of element elem.
    Vec value(int elem, double theta) const;
    /// Time derivative at local coordinate theta.
    Vec derivative(int elem, double theta) const;
    Vec right_value(int elem) const { return value(elem, 1.0); }
};

/// (u(t), du/dt(t)); at interior breakpoints the left element is used.
std::pair<Vec, Vec> eval_spline(const SplineSolution& sol, double t);

struct RadauStage {
    Vec k1, k2, u_next;
};

/// One step of the 2-stage Radau IIA scheme on [t0, t0 + tau]:
/// M k_i + tau sum_j a_ij K k_j = F(t0 + c_i tau) - K u_prev with
/// a = [[5/12, -1/12], [3/4, 1/4]], c = (1/3, 1), then
/// u_next = u_prev + tau (3/4 k1 + 1/4 k2). Implemented through one complex
/// shifted solve at s = (2 + i sqrt(2))/tau.
RadauStage radau_step(const DiscreteSystem& system, const Vec& u_prev, const RhsFunction& F,
                      double t0, double tau);

/// Sequential Radau stepping over all mesh elements.
SplineSolution solve_time(const DiscreteSystem& system, const TimeMesh& mesh,
                          const RhsFunction& F, const Vec& u0);

/// Crank-Nicolson comparator: (M + tau K/2) u_next = (M - tau K/2) u_prev
/// + int_T F. Returned in spline form with k1 == k2 (piecewise linear).
SplineSolution crank_nicolson_solve(const DiscreteSystem& system, const TimeMesh& mesh,
                                    const RhsFunction& F, const Vec& u0);

/// Integral mean and endpoint value of the residual F - M u' - K u on an
/// element (3-point Gauss; exact for polynomial data up to degree 5).
std::pair<Vec, Vec> residual_moments(const DiscreteSystem& system, const SplineSolution& sol,
                                     const RhsFunction& F, int elem);

struct EstimateResult {
    std::vector<double> per_element_sq;
    double total_sq = 0.0;
    double total() const;
};

/// Residual estimator eta(T)^2 = |T|^2 int_T |dF - M u'' - K u'|_{V*}^2 dt,
/// with F replaced by its elementwise quadratic model; exact 2-point Gauss.
EstimateResult estimate(const DiscreteSystem& system, const SplineSolution& sol,
                        const RhsFunction& F);

enum class Scheme { Hybrid, CrankNicolson };

struct AdaptiveOptions {
    double theta = 0.5;
    int G = 4;
    double tol = 0.0;
    int max_iter = 30;
    Scheme scheme = Scheme::Hybrid;
};

struct IterationRecord {
    TimeMesh mesh;
    std::vector<double> eta_sq;
    double eta = 0.0;
    MarkSet marks;
    long cum_stage_solves = 0;
};

struct AdaptiveRun {
    std::vector<IterationRecord> records;
    SplineSolution final_solution;
    bool converged = false;
};

using IterationCallback =
    std::function<void(int iter, const SplineSolution& sol, const EstimateResult& est)>;

/// Solve -> Estimate -> Mark -> trisect loop on a uniform initial mesh of
/// n0 elements; stops once eta <= tol or after max_iter iterations.
AdaptiveRun adaptive_loop(const DiscreteSystem& system, const RhsFunction& F, const Vec& u0,
                          double t_end, int n0, const AdaptiveOptions& opts,
                          const IterationCallback& on_iteration = nullptr);

/// X-norm distance to the exact modal solution of u' + Au = 0, u(0) = sol.u0
/// (10-point Gauss per element; requires the spectral factorization).
double xnorm_error_modal(const DiscreteSystem& system, const SplineSolution& sol);

/// X-norm distance between two splines over the union of their meshes.
double xnorm_error(const DiscreteSystem& system, const SplineSolution& sol,
                   const SplineSolution& reference);

/// Samples of F at the local quadratic-interpolation nodes {0, 1/3, 1}.
std::array<Vec, 3> element_rhs_samples(const RhsFunction& F, double t0, double tau);

}  // namespace radapt
