#ifndef KAWAHARA_QUADRATURE_HPP
#define KAWAHARA_QUADRATURE_HPP

#include <vector>

#include "kawahara/grid.hpp"

namespace kawahara {

// Composite quadrature weights for n equispaced nodes with spacing dx:
// Simpson when the node count is odd, trapezoid otherwise.
inline std::vector<double> quad_weights(int n, double dx) {
    std::vector<double> w(n, dx);
    if (n % 2 == 1) {
        w.assign(n, 0.0);
        w.front() = w.back() = dx / 3.0;
        for (int i = 1; i < n - 1; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * dx / 3.0;
    } else {
        w.front() = w.back() = dx / 2.0;
    }
    return w;
}

inline double quad(const GridFunction& f) {
    const auto w = quad_weights(f.grid->node_count(), f.grid->dx);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i];
    return s;
}

// Same rule applied to raw samples (used for time integrals).
inline double integrate_samples(const std::vector<double>& v, double dx) {
    const auto w = quad_weights(static_cast<int>(v.size()), dx);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
    return s;
}

// Cumulative integral of samples on a uniform grid, Simpson-based:
// even indices close Simpson pairs, odd indices use a quadratic fit.
inline std::vector<double> cumulative_integral(const std::vector<double>& f, double dx) {
    const int n = static_cast<int>(f.size());
    std::vector<double> F(n, 0.0);
    if (n >= 3) {
        F[1] = dx / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        for (int m = 2; m < n; ++m)
            F[m] = F[m - 2] + dx / 3.0 * (f[m - 2] + 4.0 * f[m - 1] + f[m]);
    } else if (n == 2) {
        F[1] = dx / 2.0 * (f[0] + f[1]);
    }
    return F;
}

// Centered first time-derivative, one-sided second order at the ends.
inline std::vector<double> difference_series(const std::vector<double>& f, double dt) {
    const int n = static_cast<int>(f.size());
    std::vector<double> d(n, 0.0);
    if (n < 3) {
        if (n == 2) d[0] = d[1] = (f[1] - f[0]) / dt;
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    for (int m = 1; m < n - 1; ++m) d[m] = (f[m + 1] - f[m - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    return d;
}

// Discrete L2(0,L) norm of a grid function.
inline double l2_norm(const GridFunction& f) {
    const auto w = quad_weights(f.grid->node_count(), f.grid->dx);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i] * f.values[i];
    return std::sqrt(std::max(s, 0.0));
}

// Discrete L2(0,T) norm of a time series.
inline double l2_norm(const TimeSeries& f) {
    const auto w = quad_weights(f.tgrid->node_count(), f.tgrid->dt);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * f.values[i] * f.values[i];
    return std::sqrt(std::max(s, 0.0));
}

inline double l1_norm(const TimeSeries& f) {
    const auto w = quad_weights(f.tgrid->node_count(), f.tgrid->dt);
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * std::abs(f.values[i]);
    return s;
}

} // namespace kawahara

#endif
