#ifndef KAWAHARA_OBSERVABLES_HPP
#define KAWAHARA_OBSERVABLES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "kawahara/quadrature.hpp"
#include "kawahara/solver.hpp"
#include "kawahara/test_function.hpp"

namespace kawahara {

// q(t) = integral of u(t,x) omega(x) over [0, L].
inline TimeSeries moment_q(const Trajectory& traj, const TestFunction& omega) {
    const auto rep = check_membership(omega);
    if (!rep.pass)
        throw precondition_error("moment: test function rejected (" + rep.detail + ")");
    if (std::abs(omega.length - traj.grid->length) > 1e-12 * (1.0 + traj.grid->length))
        throw precondition_error("moment: test function domain differs from grid");
    const auto w = quad_weights(traj.grid->node_count(), traj.grid->dx);
    std::vector<double> omv(traj.grid->node_count());
    for (int i = 0; i < traj.grid->node_count(); ++i)
        omv[i] = eval_deriv(omega, 0, traj.grid->nodes[i]);
    std::vector<double> q(traj.states.size());
    for (size_t m = 0; m < traj.states.size(); ++m) {
        double s = 0.0;
        for (size_t i = 0; i < omv.size(); ++i) s += w[i] * omv[i] * traj.states[m][i];
        q[m] = s;
    }
    return TimeSeries(traj.tgrid, std::move(q));
}

enum class TraceIdentityForm {
    consistent, // integration-by-parts form
    asymmetric, // variant with omega''''(L) against both endpoint values and no
                // -omega''(L) h2 term; kept as a diagnostic
};

// Pointwise rate of the moment from boundary traces and sources:
//   r(t) = omega''(L) h - omega'''(L) h4 + omega'''(0) h3
//        + (omega''''(L) - omega''(L)) h2 - omega''''(0) h1
//        + int f1 omega - int f2 omega' + int u (omega' + omega''' - omega''''')
// The asymmetric variant replaces the h2 coefficient by omega''''(L) and the h1
// coefficient by omega''''(L); with only h2 active the two differ by exactly
// -omega''(L) h2(t).
inline TimeSeries qprime_identity(const Trajectory& traj, const BoundarySet& bset,
                                  const TimeSeries& h, const SourceSplit& f,
                                  const TestFunction& omega,
                                  TraceIdentityForm form = TraceIdentityForm::consistent) {
    const auto rep = check_membership(omega);
    if (!rep.pass)
        throw precondition_error("moment rate: test function rejected (" + rep.detail + ")");
    const auto& g = *traj.grid;
    const auto w = quad_weights(g.node_count(), g.dx);
    const double L = g.length;
    const double w2L = eval_deriv(omega, 2, L);
    const double w3L = eval_deriv(omega, 3, L);
    const double w30 = eval_deriv(omega, 3, 0.0);
    const double w4L = eval_deriv(omega, 4, L);
    const double w40 = eval_deriv(omega, 4, 0.0);

    std::vector<double> kern(g.node_count()), omv(g.node_count()), om1(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        const double x = g.nodes[i];
        kern[i] = eval_deriv(omega, 1, x) + eval_deriv(omega, 3, x) - eval_deriv(omega, 5, x);
        omv[i] = eval_deriv(omega, 0, x);
        om1[i] = eval_deriv(omega, 1, x);
    }

    const double c_h2 = (form == TraceIdentityForm::consistent) ? (w4L - w2L) : w4L;
    const double c_h1 = (form == TraceIdentityForm::consistent) ? w40 : w4L;

    std::vector<double> r(traj.states.size());
    for (size_t m = 0; m < traj.states.size(); ++m) {
        double val = w2L * h.values[m] - w3L * bset.h4.values[m] + w30 * bset.h3.values[m] +
                     c_h2 * bset.h2.values[m] - c_h1 * bset.h1.values[m];
        if (f.has_f1)
            for (size_t i = 0; i < omv.size(); ++i)
                val += w[i] * omv[i] * f.f1[m].values[i];
        if (f.has_f2)
            for (size_t i = 0; i < om1.size(); ++i)
                val -= w[i] * om1[i] * f.f2[m].values[i];
        for (size_t i = 0; i < kern.size(); ++i) val += w[i] * kern[i] * traj.states[m][i];
        r[m] = val;
    }
    return TimeSeries(traj.tgrid, std::move(r));
}

// Moment series bundle: q, its centered finite difference, and the trace rate.
struct MomentSeries {
    TimeSeries q;
    TimeSeries qprime_fd;
    TimeSeries qprime_identity;
};

inline MomentSeries build_moment_series(const Trajectory& traj, const BoundarySet& bset,
                                        const TimeSeries& h, const SourceSplit& f,
                                        const TestFunction& omega) {
    MomentSeries ms;
    ms.q = moment_q(traj, omega);
    ms.qprime_fd =
        TimeSeries(traj.tgrid, difference_series(ms.q.values, traj.tgrid->dt));
    ms.qprime_identity = kawahara::qprime_identity(traj, bset, h, f, omega);
    return ms;
}

struct InequalityReport {
    double min_margin = 0.0;
    double argmin_t = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Margin of ||u(t)||^2 <= int_0^t |h|^2 + 2 int_0^t int f1 u against the
// trajectory of S(0, h, f1, 0). Requires zero initial state and traces.
inline InequalityReport energy_check(const Trajectory& traj, const TimeSeries& h,
                                     const SourceSplit& f1, double tol = 1e-6) {
    const auto& st0 = traj.states[0];
    for (double v : st0)
        if (std::abs(v) > 1e-14)
            throw precondition_error("energy check: nonzero initial state");
    if (traj.bset.max_abs() > 1e-14)
        throw precondition_error("energy check: nonzero boundary traces");
    if (f1.has_f2) throw precondition_error("energy check: divergence part not allowed");

    const auto w = quad_weights(traj.grid->node_count(), traj.grid->dx);
    const int nodes = traj.tgrid->node_count();
    const double dt = traj.tgrid->dt;

    std::vector<double> energy(nodes, 0.0), fu(nodes, 0.0), hsq(nodes, 0.0);
    for (int m = 0; m < nodes; ++m) {
        double e = 0.0, p = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            e += w[i] * traj.states[m][i] * traj.states[m][i];
            if (f1.has_f1) p += w[i] * f1.f1[m].values[i] * traj.states[m][i];
        }
        energy[m] = e;
        fu[m] = p;
        hsq[m] = h.values[m] * h.values[m];
    }
    const auto cum_h = cumulative_integral(hsq, dt);
    const auto cum_fu = cumulative_integral(fu, dt);

    InequalityReport rep;
    rep.tol = tol;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int m = 0; m < nodes; ++m) {
        const double margin = cum_h[m] + 2.0 * cum_fu[m] - energy[m];
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.argmin_t = traj.tgrid->times[m];
        }
    }
    rep.pass = rep.min_margin >= -tol;
    return rep;
}

// ||u^2||_{L2(Q_T)} / ((T^(1/2) + T^(1/4)) * norm_X(u)^2).
inline double gn_ratio(const Trajectory& traj) {
    const auto w = quad_weights(traj.grid->node_count(), traj.grid->dx);
    std::vector<double> sq(traj.states.size(), 0.0);
    double any = 0.0;
    for (size_t m = 0; m < traj.states.size(); ++m) {
        double s = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            const double u2 = traj.states[m][i] * traj.states[m][i];
            s += w[i] * u2 * u2;
            any += std::abs(traj.states[m][i]);
        }
        sq[m] = s;
    }
    if (any == 0.0) throw argument_error("bilinear ratio: undefined for the zero trajectory");
    double st = 0.0;
    for (size_t m = 0; m + 1 < sq.size(); ++m)
        st += 0.5 * traj.tgrid->dt * (sq[m] + sq[m + 1]);
    const double T = traj.tgrid->horizon;
    const double nx = norm_X(traj);
    return std::sqrt(std::max(st, 0.0)) / ((std::sqrt(T) + std::pow(T, 0.25)) * nx * nx);
}

} // namespace kawahara

#endif
