#include "radapt/sinc.hpp"

#include <cmath>

namespace radapt::sinc {

SincGrid make_grid(double alpha, double d, int M) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("make_grid: alpha must be >= 1");
    if (!(d > 0.0 && d < M_PI / 2.0)) throw std::invalid_argument("make_grid: d must be in (0, pi/2)");
    if (M < 0) throw std::invalid_argument("make_grid: M must be >= 0");
    SincGrid g;
    g.alpha = alpha;
    g.d = d;
    g.M = M;
    g.theta = M > 0 ? std::sqrt(2.0 * M_PI * d / M) : 1.0;
    g.z.resize(2 * M + 1);
    g.omega.resize(2 * M + 1);
    for (int k = 0; k <= M; ++k) {
        const double zk = std::sinh(k * g.theta);
        const double wk = g.theta * std::cosh(k * g.theta);
        g.z[M + k] = zk;
        g.z[M - k] = -zk;  // exact mirror by construction
        g.omega[M + k] = wk;
        g.omega[M - k] = wk;
    }
    return g;
}

double sinc_kernel(int k, double theta, double x) {
    if (!(theta > 0.0)) throw std::invalid_argument("sinc_kernel: theta must be > 0");
    const double t = M_PI * (x - k * theta) / theta;
    if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
    return std::sin(t) / t;
}

Complex conformal_phi(Complex z) {
    if (z.real() == 0.0 && std::abs(z.imag()) >= 1.0) {
        throw std::invalid_argument("conformal_phi: input on the branch cut");
    }
    // Odd symmetry avoids the cancellation in z + sqrt(1+z^2) for Re z < 0.
    if (z.real() < 0.0) {
        Complex w = -z;
        return -std::log(w + std::sqrt(1.0 + w * w));
    }
    return std::log(z + std::sqrt(1.0 + z * z));
}

Complex conformal_psi(Complex z) { return std::sinh(z); }

double sinc_quadrature(const std::function<double(double)>& F, double d, int M) {
    if (!(d > 0.0 && d < M_PI / 2.0)) {
        throw std::invalid_argument("sinc_quadrature: d must be in (0, pi/2)");
    }
    if (M < 1) throw std::invalid_argument("sinc_quadrature: need M >= 1");
    const double theta = std::sqrt(2.0 * M_PI * d / M);
    auto value = [&](double x) {
        const double v = F(x);
        if (!std::isfinite(v)) throw numerical_error("sinc_quadrature: non-finite integrand value");
        return v;
    };
    // Symmetric pair summation: odd integrands cancel exactly.
    double acc = value(0.0);
    for (int k = 1; k <= M; ++k) {
        const double zk = std::sinh(k * theta);
        acc += std::cosh(k * theta) * (value(zk) + value(-zk));
    }
    return theta * acc;
}

double theta_integral(double alpha, double lambda, double d) {
    if (!(alpha >= 1.0) || !(lambda > 0.0) || !(d > 0.0 && d < M_PI / 2.0)) {
        throw std::invalid_argument("theta_integral: parameters out of range");
    }
    auto integrand = [&](double x, double sign) {
        const Complex z = std::sinh(Complex(x, sign * d));
        const Complex dz = std::cosh(Complex(x, sign * d));
        const Complex den = alpha + Complex(0.0, 1.0) * z + lambda;
        return std::abs(dz) / std::norm(den);
    };
    // Peak is near x = 0; expand the truncation radius until the integrand is
    // negligible, then composite 10-point Gauss on panels of width 1/2.
    const double peak = integrand(0.0, 1.0) + integrand(0.0, -1.0);
    double X = 2.0;
    while (X < 700.0 && integrand(X, 1.0) + integrand(-X, 1.0) + integrand(X, -1.0) +
                                integrand(-X, -1.0) >
                            1e-16 * peak) {
        X += 2.0;
    }
    static const double gx[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                 0.8650633666889845, 0.9739065285171717};
    static const double gw[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                 0.1494513491505806, 0.0666713443086881};
    const double hpanel = 0.5;
    double acc = 0.0;
    const int panels = static_cast<int>(std::ceil(2.0 * X / hpanel));
    for (int p = 0; p < panels; ++p) {
        const double a = -X + p * hpanel;
        const double b = std::min(a + hpanel, X);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < 5; ++i) {
            for (double s : {-1.0, 1.0}) {
                const double x = mid + s * half * gx[i];
                acc += half * gw[i] * (integrand(x, 1.0) + integrand(x, -1.0));
            }
        }
    }
    return acc;
}

}  // namespace radapt::sinc
