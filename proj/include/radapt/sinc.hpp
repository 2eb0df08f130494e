#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "radapt/discrete_system.hpp"

namespace radapt::sinc {

/// Laplace sample points s_k = alpha + i sinh(k theta) with weights
/// omega_k = theta cosh(k theta), k = -M..M, theta = sqrt(2 pi d / M).
struct SincGrid {
    double alpha = 1.0;
    double d = 0.0;
    int M = 0;
    double theta = 0.0;
    std::vector<double> z;       // z_k, index k + M
    std::vector<double> omega;   // omega_k, index k + M

    int size() const { return 2 * M + 1; }
    double z_at(int k) const { return z[k + M]; }
    double omega_at(int k) const { return omega[k + M]; }
    Complex point(int k) const { return {alpha, z_at(k)}; }
};

SincGrid make_grid(double alpha, double d, int M);

/// Cardinal function sin(pi (x - k theta)/theta) / (pi (x - k theta)/theta).
double sinc_kernel(int k, double theta, double x);

/// phi(z) = asinh(z) = log(z + sqrt(1 + z^2)), principal branch. Inputs on
/// the branch cut (imaginary axis with |Im| >= 1) are rejected.
Complex conformal_phi(Complex z);
/// psi = sinh, the inverse of phi on the strip.
Complex conformal_psi(Complex z);

/// Truncated sinh-transformed trapezoidal rule
/// theta sum_{|k|<=M} cosh(k theta) F(sinh(k theta)).
double sinc_quadrature(const std::function<double(double)>& F, double d, int M);

/// Weighted cardinal interpolant from samples F(z_k), k = -K..K:
/// g(tau) = phi'(tau)^{1/2} sum_k F(z_k) cosh(k theta)^{1/2} Sinc(k,theta)(phi(tau)).
template <typename Value>
class SincInterpolant {
public:
    SincInterpolant(std::vector<Value> samples, double d, int K)
        : samples_(std::move(samples)), K_(K), theta_(std::sqrt(2.0 * M_PI * d / K)) {
        if (K < 1) throw std::invalid_argument("SincInterpolant: need K >= 1");
        if (samples_.size() != static_cast<size_t>(2 * K + 1)) {
            throw std::invalid_argument("SincInterpolant: need 2K+1 samples");
        }
    }

    Value operator()(double tau) const {
        const double x = std::asinh(tau);
        const double wt = std::pow(1.0 + tau * tau, -0.25);  // phi'(tau)^{1/2}
        Value acc = samples_[0] * 0.0;
        for (int k = -K_; k <= K_; ++k) {
            const double c = std::sqrt(std::cosh(k * theta_)) * sinc_kernel(k, theta_, x);
            acc += samples_[k + K_] * c;
        }
        return acc * wt;
    }

    double step() const { return theta_; }

private:
    std::vector<Value> samples_;
    int K_;
    double theta_;
};

/// Contour integral over both boundary branches z = sinh(x +- i d):
/// Theta_{alpha,lambda} = int |dz| / |alpha + i z + lambda|^2.
double theta_integral(double alpha, double lambda, double d);

}  // namespace radapt::sinc
