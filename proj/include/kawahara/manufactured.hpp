#ifndef KAWAHARA_MANUFACTURED_HPP
#define KAWAHARA_MANUFACTURED_HPP

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kawahara/solver.hpp"

namespace kawahara {

// Closed-form field with exact space derivatives through order 5 and time
// derivative, plus the source induced by substitution into the equation.
struct ManufacturedCase {
    std::string name;
    bool nonlinear = false;
    double length = 1.0;
    // space_deriv(k, t, x) for k = 0..5; time_deriv(t, x)
    std::function<double(int, double, double)> space_deriv;
    std::function<double(double, double)> time_deriv;

    double u(double t, double x) const { return space_deriv(0, t, x); }

    double source(double t, double x) const {
        double f = time_deriv(t, x) + space_deriv(1, t, x) + space_deriv(3, t, x) -
                   space_deriv(5, t, x);
        if (nonlinear) f += space_deriv(0, t, x) * space_deriv(1, t, x);
        return f;
    }

    // Residual of the governing equation at (t, x); zero up to roundoff.
    double residual(double t, double x) const {
        return time_deriv(t, x) + space_deriv(1, t, x) + space_deriv(3, t, x) -
               space_deriv(5, t, x) +
               (nonlinear ? space_deriv(0, t, x) * space_deriv(1, t, x) : 0.0) -
               source(t, x);
    }

    GridFunction initial_state(GridPtr grid) const {
        return GridFunction::sample(grid, [&](double x) { return u(0.0, x); });
    }
    BoundarySet boundary_set(TimeGridPtr tg) const {
        BoundarySet b;
        b.h1 = TimeSeries::sample(tg, [&](double t) { return space_deriv(0, t, 0.0); });
        b.h2 = TimeSeries::sample(tg, [&](double t) { return space_deriv(0, t, length); });
        b.h3 = TimeSeries::sample(tg, [&](double t) { return space_deriv(1, t, 0.0); });
        b.h4 = TimeSeries::sample(tg, [&](double t) { return space_deriv(1, t, length); });
        return b;
    }
    TimeSeries control_trace(TimeGridPtr tg) const {
        return TimeSeries::sample(tg, [&](double t) { return space_deriv(2, t, length); });
    }
    SourceSplit source_split(GridPtr g, TimeGridPtr tg) const {
        return SourceSplit::from_f1(g, tg, [&](double t, double x) { return source(t, x); });
    }
};

namespace detail {

// Derivatives of sech^2 as polynomials in tanh: if p(T) represents the
// current derivative then the next one is p'(T) (1 - T^2).
inline std::array<std::vector<double>, 6> sech2_derivative_polys() {
    std::array<std::vector<double>, 6> polys;
    polys[0] = {1.0, 0.0, -1.0};
    for (int n = 1; n <= 5; ++n) {
        const auto& p = polys[n - 1];
        std::vector<double> dp;
        for (size_t j = 1; j < p.size(); ++j) dp.push_back(p[j] * static_cast<double>(j));
        std::vector<double> q(dp.size() + 2, 0.0);
        for (size_t j = 0; j < dp.size(); ++j) {
            q[j] += dp[j];
            q[j + 2] -= dp[j];
        }
        polys[n] = std::move(q);
    }
    return polys;
}

inline double polyval(const std::vector<double>& c, double x) {
    double s = 0.0;
    for (size_t j = c.size(); j-- > 0;) s = s * x + c[j];
    return s;
}

} // namespace detail

// Named verification fields:
//  - "poly-decay":     e^{-t} x^3 (x-L)^2, homogeneous traces, linear equation
//  - "traveling-bump": a sech^2(k(x - x0 - c t)), all five traces active
//  - "nonlinear-poly": poly-decay with the convective term folded into f
inline ManufacturedCase manufactured_case(const std::string& name, double length = 1.0) {
    ManufacturedCase mc;
    mc.name = name;
    mc.length = length;
    const double L = length;
    if (name == "poly-decay" || name == "nonlinear-poly") {
        mc.nonlinear = (name == "nonlinear-poly");
        mc.space_deriv = [L](int k, double t, double x) {
            // P(x) = x^5 - 2 L x^4 + L^2 x^3 and its derivatives
            double p = 0.0;
            switch (k) {
                case 0: p = x * x * x * (L * L - 2.0 * L * x + x * x); break;
                case 1: p = 5.0 * x * x * x * x - 8.0 * L * x * x * x + 3.0 * L * L * x * x; break;
                case 2: p = 20.0 * x * x * x - 24.0 * L * x * x + 6.0 * L * L * x; break;
                case 3: p = 60.0 * x * x - 48.0 * L * x + 6.0 * L * L; break;
                case 4: p = 120.0 * x - 48.0 * L; break;
                case 5: p = 120.0; break;
                default: p = 0.0;
            }
            return std::exp(-t) * p;
        };
        mc.time_deriv = [mc_space = mc.space_deriv](double t, double x) {
            return -mc_space(0, t, x);
        };
    } else if (name == "traveling-bump") {
        static const auto polys = detail::sech2_derivative_polys();
        const double a = 0.5, kk = 2.0, x0 = 0.4 * L, c = 0.6;
        mc.space_deriv = [a, kk, x0, c](int k, double t, double x) {
            const double th = std::tanh(kk * (x - x0 - c * t));
            double scale = a;
            for (int j = 0; j < k; ++j) scale *= kk;
            return scale * detail::polyval(polys[static_cast<size_t>(k)], th);
        };
        mc.time_deriv = [a, kk, x0, c](double t, double x) {
            const double th = std::tanh(kk * (x - x0 - c * t));
            return -a * c * kk * detail::polyval(polys[1], th);
        };
    } else {
        throw argument_error("manufactured case: unknown name '" + name + "'");
    }
    return mc;
}

struct ConvergenceLevel {
    int level = 0;
    int interior = 0;
    int steps = 0;
    double dx = 0.0;
    double dt = 0.0;
    double error = 0.0;
    double order = 0.0; // vs previous level; 0 for the first
};

struct ConvergenceTable {
    std::vector<ConvergenceLevel> levels;
    double fitted_order = 0.0;
};

// Max-norm error of the scheme against the closed form over a dyadic sequence
// of grids with dt tied to dx.
inline ConvergenceTable convergence_study(const ManufacturedCase& mc, int levels,
                                          const SolverConfig& cfg, int base_interior = 64,
                                          double horizon = 0.25) {
    if (levels < 3)
        throw argument_error("convergence study: at least 3 levels required, got " +
                             std::to_string(levels));
    ConvergenceTable table;
    int n = base_interior;
    for (int lev = 0; lev < levels; ++lev, n *= 2) {
        GridPtr grid = make_grid(mc.length, n);
        const int steps = std::max(1, static_cast<int>(std::lround(horizon / grid->dx)));
        TimeGridPtr tgrid = make_time_grid(horizon, steps);
        const GridFunction u0 = mc.initial_state(grid);
        const BoundarySet bset = mc.boundary_set(tgrid);
        const TimeSeries h = mc.control_trace(tgrid);
        const SourceSplit f = mc.source_split(grid, tgrid);
        Trajectory traj;
        try {
            traj = mc.nonlinear ? solve_nonlinear(u0, bset, h, f, cfg, grid, tgrid)
                                : solve_linear(u0, bset, h, f, cfg, grid, tgrid);
        } catch (const error& e) {
            throw solver_breakdown_error(
                "convergence study failed at level " + std::to_string(lev) + ": " + e.what(),
                lev);
        }
        double err = 0.0;
        for (int m = 0; m <= tgrid->steps; ++m) {
            const double t = tgrid->times[m];
            for (int i = 0; i < grid->node_count(); ++i)
                err = std::max(err,
                               std::abs(traj.states[m][i] - mc.u(t, grid->nodes[i])));
        }
        ConvergenceLevel cl;
        cl.level = lev;
        cl.interior = n;
        cl.steps = steps;
        cl.dx = grid->dx;
        cl.dt = tgrid->dt;
        cl.error = err;
        if (lev > 0 && table.levels.back().error > 0.0 && err > 0.0)
            cl.order = std::log2(table.levels.back().error / err);
        table.levels.push_back(cl);
    }
    // least-squares slope of log2(error) against level index
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& cl : table.levels) {
        if (cl.error <= 0.0) continue;
        const double x = cl.level, y = std::log2(cl.error);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) table.fitted_order = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return table;
}

} // namespace kawahara

#endif
