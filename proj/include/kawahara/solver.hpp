#ifndef KAWAHARA_SOLVER_HPP
#define KAWAHARA_SOLVER_HPP

#include <array>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "kawahara/banded.hpp"
#include "kawahara/errors.hpp"
#include "kawahara/grid.hpp"
#include "kawahara/quadrature.hpp"

namespace kawahara {

// The four uncontrolled boundary traces: u(t,0), u(t,L), u_x(t,0), u_x(t,L).
struct BoundarySet {
    TimeSeries h1, h2, h3, h4;

    static BoundarySet zero(TimeGridPtr tg) {
        return {TimeSeries::zero(tg), TimeSeries::zero(tg), TimeSeries::zero(tg),
                TimeSeries::zero(tg)};
    }
    double max_abs() const {
        return std::max(std::max(kawahara::max_abs(h1.values), kawahara::max_abs(h2.values)),
                        std::max(kawahara::max_abs(h3.values), kawahara::max_abs(h4.values)));
    }
};

// Source split f = f1 + d/dx f2, each part sampled per time node.
struct SourceSplit {
    std::vector<GridFunction> f1;
    std::vector<GridFunction> f2;
    bool has_f1 = false;
    bool has_f2 = false;

    static SourceSplit zero() { return {}; }

    template <class F>
    static SourceSplit from_f1(GridPtr g, TimeGridPtr tg, F&& f) {
        SourceSplit s;
        s.has_f1 = true;
        s.f1.reserve(tg->node_count());
        for (int m = 0; m < tg->node_count(); ++m) {
            const double t = tg->times[m];
            s.f1.push_back(GridFunction::sample(g, [&](double x) { return f(t, x); }));
        }
        return s;
    }
};

// Time scheme configuration. Equation coefficients are fixed to
// u_t + u_x + u_xxx - u_xxxxx (+ u u_x) = f.
struct SolverConfig {
    double theta = 0.5;       // implicitness weight in [1/2, 1]
    double picard_tol = 1e-10; // inner nonlinear iteration tolerance (max norm)
    int picard_max = 50;

    void validate() const {
        if (theta < 0.5 || theta > 1.0)
            throw config_error("solver config: theta must lie in [1/2, 1]");
        if (!(picard_tol > 0.0))
            throw config_error("solver config: picard_tol must be positive");
        if (picard_max < 1)
            throw config_error("solver config: picard_max must be at least 1");
    }
};

namespace detail {

// Finite-difference stencils (weights scaled by dx^order).
// First/third/fifth derivatives centered; the biased fifth-derivative stencil
// serves the boundary closure at x = 0.
inline constexpr std::array<double, 3> kD1C = {-0.5, 0.0, 0.5};                       // -1..1
inline constexpr std::array<double, 5> kD3C = {-0.5, 1.0, 0.0, -1.0, 0.5};            // -2..2
inline constexpr std::array<double, 7> kD5C = {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5}; // -3..3
inline constexpr std::array<double, 7> kD5B = {-1.5, 8.0, -17.5, 20.0, -12.5, 4.0, -0.5}; // -2..4

// Data slots feeding the affine part of the discrete operator.
enum DataSlot { kH1 = 0, kH2 = 1, kH3 = 2, kH4 = 3, kH = 4, kR = 5, kDataSlots = 6 };

// Affine representation of one extended node value:
// u_ext = sum_j wcoef[j] * w_j + sum_k dcoef[k] * data_k.
struct ExtNode {
    std::vector<std::pair<int, double>> wcoef; // (interior index 0-based, coefficient)
    std::array<double, kDataSlots> dcoef{};
};

// Interior operator A (kl = ku = 3) and data coupling for
// L u = u_x + u_xxx - u_xxxxx on the interior nodes, assembled once per grid.
//
// Ghost values are eliminated with: a fourth-order one-sided u_x(0) relation,
// the coupled fourth-order centered u_x(L)/u_xx(L) relations, and a
// PDE-consistency closure at x = 0 built from the centered third-derivative
// and biased fifth-derivative stencils:
//   u_xxx(0) - u_xxxxx(0) = R(t) := f(t,0) - h1'(t) - h3(t) [- h1 h3].
struct Discretization {
    GridPtr grid;
    double dx = 0.0;
    int n = 0;
    BandedMatrix op;                                    // interior coupling
    std::vector<std::array<double, kDataSlots>> data_mat; // affine data coupling
    std::vector<double> quadw;                          // quadrature weights, all nodes

    std::vector<double> apply_data(const std::array<double, kDataSlots>& d) const {
        std::vector<double> b(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < kDataSlots; ++k) s += data_mat[i][k] * d[k];
            b[i] = s;
        }
        return b;
    }
};

inline Discretization build_discretization(GridPtr grid) {
    Discretization D;
    D.grid = grid;
    D.dx = grid->dx;
    D.n = grid->interior;
    D.quadw = quad_weights(grid->node_count(), grid->dx);
    const int n = D.n;
    const double dx = D.dx;
    if (n < 16) throw config_error("discretization: needs at least 16 interior nodes");

    // extended nodes j = -2 .. n+3, index shift +2
    std::vector<ExtNode> ext(n + 6);
    auto I = [](int j) { return j + 2; };
    for (int j = 1; j <= n; ++j) ext[I(j)].wcoef = {{j - 1, 1.0}};
    ext[I(0)].dcoef[kH1] = 1.0;
    ext[I(n + 1)].dcoef[kH2] = 1.0;

    auto axpy = [](ExtNode& dst, double c, const ExtNode& src) {
        for (auto [j, v] : src.wcoef) {
            bool found = false;
            for (auto& [dj, dv] : dst.wcoef)
                if (dj == j) { dv += c * v; found = true; break; }
            if (!found) dst.wcoef.emplace_back(j, c * v);
        }
        for (int k = 0; k < kDataSlots; ++k) dst.dcoef[k] += c * src.dcoef[k];
    };

    // u_{-1}: fourth-order one-sided u_x(0) = h3 over nodes -1..3
    //   => u_{-1} = -4 dx h3 - (10/3) u_0 + 6 u_1 - 2 u_2 + (1/3) u_3
    {
        ExtNode& e = ext[I(-1)];
        axpy(e, 6.0, ext[I(1)]);
        axpy(e, -2.0, ext[I(2)]);
        axpy(e, 1.0 / 3.0, ext[I(3)]);
        e.dcoef[kH3] += -4.0 * dx;
        e.dcoef[kH1] += -10.0 / 3.0;
    }
    // Right ghosts from the coupled fourth-order centered relations at x = L:
    //   (u_{n-1} - 8 u_n + 8 a - b)/(12 dx)    = h4
    //   (-u_{n-1} + 16 u_n - 30 u_{n+1} + 16 a - b)/(12 dx^2) = h
    // with a = u_{n+2}, b = u_{n+3}:
    //   a = (3/2) dx^2 h - (3/2) dx h4 + u_{n-1}/4 - 3 u_n + (15/4) u_{n+1}
    //   b = 12 dx^2 h - 24 dx h4 + 3 u_{n-1} - 32 u_n + 30 u_{n+1}
    {
        ExtNode& a = ext[I(n + 2)];
        axpy(a, 0.25, ext[I(n - 1)]);
        axpy(a, -3.0, ext[I(n)]);
        a.dcoef[kH2] += 15.0 / 4.0;
        a.dcoef[kH] += 1.5 * dx * dx;
        a.dcoef[kH4] += -1.5 * dx;

        ExtNode& b = ext[I(n + 3)];
        axpy(b, 3.0, ext[I(n - 1)]);
        axpy(b, -32.0, ext[I(n)]);
        b.dcoef[kH2] += 30.0;
        b.dcoef[kH] += 12.0 * dx * dx;
        b.dcoef[kH4] += -24.0 * dx;
    }
    // u_{-2} from the closure: (D3C@0)/dx^3 - (D5B@0)/dx^5 applied to the
    // extended values equals R(t).
    {
        std::array<double, 7> crow{}; // coefficients on ext nodes -2..4
        for (int k = 0; k < 5; ++k) crow[k] += kD3C[k] / (dx * dx * dx);
        const double dx5 = dx * dx * dx * dx * dx;
        for (int k = 0; k < 7; ++k) crow[k] -= kD5B[k] / dx5;
        const double alpha = crow[0];
        ExtNode e; // accumulates R - sum_{j != -2} crow_j u_j
        e.dcoef[kR] = 1.0;
        for (int j = -1; j <= 4; ++j) axpy(e, -crow[j + 2], ext[I(j)]);
        for (auto& [j, v] : e.wcoef) v /= alpha;
        for (auto& v : e.dcoef) v /= alpha;
        ext[I(-2)] = std::move(e);
    }

    D.op = BandedMatrix(n, 3, 3);
    D.data_mat.assign(n, {});
    const double dx3 = dx * dx * dx;
    const double dx5 = dx3 * dx * dx;
    for (int i = 1; i <= n; ++i) {
        ExtNode row;
        for (int k = 0; k < 3; ++k) axpy(row, kD1C[k] / dx, ext[I(i + k - 1)]);
        for (int k = 0; k < 5; ++k) axpy(row, kD3C[k] / dx3, ext[I(i + k - 2)]);
        for (int k = 0; k < 7; ++k) axpy(row, -kD5C[k] / dx5, ext[I(i + k - 3)]);
        for (auto [j, v] : row.wcoef) D.op.add(i - 1, j, v);
        D.data_mat[i - 1] = row.dcoef;
    }
    return D;
}

// Factored theta-step: (I + theta dt A) w+ = (I - (1-theta) dt A) w - dt * mix(b - F).
class ThetaStepper {
public:
    ThetaStepper(const Discretization& disc, TimeGridPtr tgrid, double theta)
        : disc_(&disc), tgrid_(std::move(tgrid)), theta_(theta), dt_(tgrid_->dt),
          lu_(make_lhs(disc, theta, tgrid_->dt)) {}

    const Discretization& disc() const { return *disc_; }
    double theta() const { return theta_; }
    double dt() const { return dt_; }
    TimeGridPtr tgrid() const { return tgrid_; }

    // rhs0/rhs1 = (F - b) at the old/new time level over interior nodes.
    std::vector<double> step(const std::vector<double>& w, const std::vector<double>& rhs0,
                             const std::vector<double>& rhs1) const {
        std::vector<double> r = disc_->op.apply(w);
        const int n = disc_->n;
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i)
            out[i] = w[i] - (1.0 - theta_) * dt_ * r[i] +
                     dt_ * (theta_ * rhs1[i] + (1.0 - theta_) * rhs0[i]);
        return lu_.solve(std::move(out));
    }

private:
    static BandedMatrix make_lhs(const Discretization& disc, double theta, double dt) {
        BandedMatrix m = disc.op;
        for (auto& v : m.data) v *= theta * dt;
        for (int i = 0; i < m.n; ++i) m.add(i, i, 1.0);
        return m;
    }

    const Discretization* disc_;
    TimeGridPtr tgrid_;
    double theta_, dt_;
    BandedLU lu_;
};

// One-sided second-derivative trace reconstruction (order dx^2).
inline double uxx_left(const std::vector<double>& full, double dx) {
    return (2.0 * full[0] - 5.0 * full[1] + 4.0 * full[2] - full[3]) / (dx * dx);
}
inline double uxx_right(const std::vector<double>& full, double dx) {
    const size_t n = full.size();
    return (2.0 * full[n - 1] - 5.0 * full[n - 2] + 4.0 * full[n - 3] - full[n - 4]) /
           (dx * dx);
}

// One-sided first derivative at x=0 (order dx^2), used for f2_x(t,0).
inline double dx_left(const GridFunction& f) {
    const double dx = f.grid->dx;
    return (-3.0 * f.values[0] + 4.0 * f.values[1] - f.values[2]) / (2.0 * dx);
}

} // namespace detail

// Discrete solution of the initial-boundary-value problem: full-node states per
// time level, reconstructed second-derivative traces, and copies of the imposed
// boundary data.
struct Trajectory {
    GridPtr grid;
    TimeGridPtr tgrid;
    std::vector<std::vector<double>> states; // (M+1) x (N+2)
    TimeSeries uxx_at_0, uxx_at_L;
    BoundarySet bset;
    TimeSeries control;
    SolverConfig config;
    bool nonlinear = false;

    GridFunction state(int m) const { return GridFunction(grid, states.at(m)); }
    int step_count() const { return tgrid->steps; }
};

namespace detail {

struct DataSeries {
    // per time node: [h1, h2, h3, h4, h, R]
    std::vector<std::array<double, kDataSlots>> d;
    std::vector<std::vector<double>> F; // interior source samples per node
};

// Assemble the data slots and interior source from boundary data and split source.
// The closure slot R(t) = f(t,0) - h1'(t) - h3(t) - [nonlinear ? h1 h3 : 0].
inline DataSeries assemble_data(const Discretization& disc, TimeGridPtr tgrid,
                                const BoundarySet& bset, const TimeSeries& h,
                                const SourceSplit& f, bool nonlinear) {
    const int nodes = tgrid->node_count();
    const int n = disc.n;
    const double dx = disc.dx;
    DataSeries out;
    out.d.assign(nodes, {});
    out.F.assign(nodes, std::vector<double>(n, 0.0));
    const std::vector<double> h1p = difference_series(bset.h1.values, tgrid->dt);
    for (int m = 0; m < nodes; ++m) {
        auto& dm = out.d[m];
        dm[kH1] = bset.h1.values[m];
        dm[kH2] = bset.h2.values[m];
        dm[kH3] = bset.h3.values[m];
        dm[kH4] = bset.h4.values[m];
        dm[kH] = h.values[m];
        double f_at_0 = 0.0;
        if (f.has_f1) {
            const auto& f1 = f.f1[m];
            f_at_0 += f1.values[0];
            for (int i = 0; i < n; ++i) out.F[m][i] += f1.values[i + 1];
        }
        if (f.has_f2) {
            const auto& f2 = f.f2[m];
            f_at_0 += dx_left(f2);
            for (int i = 0; i < n; ++i)
                out.F[m][i] += (f2.values[i + 2] - f2.values[i]) / (2.0 * dx);
        }
        dm[kR] = f_at_0 - h1p[m] - dm[kH3];
        if (nonlinear) dm[kR] -= dm[kH1] * dm[kH3];
    }
    return out;
}

inline void check_grids(const GridPtr& g, const TimeGridPtr& tg, const GridFunction& u0,
                        const BoundarySet& bset, const TimeSeries& h, const SourceSplit& f) {
    auto same_grid = [&](const GridPtr& other) { return other.get() == g.get(); };
    auto same_tgrid = [&](const TimeGridPtr& other) { return other.get() == tg.get(); };
    if (!same_grid(u0.grid)) throw precondition_error("solver: u0 lives on a different grid");
    if (!same_tgrid(bset.h1.tgrid) || !same_tgrid(bset.h2.tgrid) ||
        !same_tgrid(bset.h3.tgrid) || !same_tgrid(bset.h4.tgrid) || !same_tgrid(h.tgrid))
        throw precondition_error("solver: boundary series live on a different time grid");
    if (f.has_f1 && static_cast<int>(f.f1.size()) != tg->node_count())
        throw precondition_error("solver: f1 sequence length mismatch");
    if (f.has_f2 && static_cast<int>(f.f2.size()) != tg->node_count())
        throw precondition_error("solver: f2 sequence length mismatch");
}

// Centered divergence-form nonlinearity (u^2/2)_x over interior nodes.
inline std::vector<double> burgers_term(const std::vector<double>& full, int n, double dx) {
    std::vector<double> out(n);
    for (int i = 1; i <= n; ++i)
        out[i - 1] = (full[i + 1] * full[i + 1] - full[i - 1] * full[i - 1]) / (4.0 * dx);
    return out;
}

inline Trajectory run_scheme(const GridFunction& u0, const BoundarySet& bset,
                             const TimeSeries& h, const SourceSplit& f,
                             const SolverConfig& cfg, GridPtr grid, TimeGridPtr tgrid,
                             bool nonlinear) {
    cfg.validate();
    check_grids(grid, tgrid, u0, bset, h, f);
    const Discretization disc = build_discretization(grid);
    const ThetaStepper stepper(disc, tgrid, cfg.theta);
    const DataSeries data = assemble_data(disc, tgrid, bset, h, f, nonlinear);
    const int n = disc.n;
    const int M = tgrid->steps;

    Trajectory traj;
    traj.grid = grid;
    traj.tgrid = tgrid;
    traj.bset = bset;
    traj.control = h;
    traj.config = cfg;
    traj.nonlinear = nonlinear;
    traj.states.reserve(M + 1);

    auto full_state = [&](const std::vector<double>& w, int m) {
        std::vector<double> full(n + 2);
        full[0] = data.d[m][kH1];
        for (int i = 0; i < n; ++i) full[i + 1] = w[i];
        full[n + 1] = data.d[m][kH2];
        return full;
    };
    auto rhs_at = [&](int m) {
        std::vector<double> r = disc.apply_data(data.d[m]);
        for (int i = 0; i < n; ++i) r[i] = data.F[m][i] - r[i];
        return r;
    };

    std::vector<double> w(u0.values.begin() + 1, u0.values.end() - 1);
    traj.states.push_back(full_state(w, 0));
    std::vector<double> rhs0 = rhs_at(0);
    if (nonlinear) {
        const auto nl0 = burgers_term(traj.states[0], n, disc.dx);
        for (int i = 0; i < n; ++i) rhs0[i] -= nl0[i];
    }

    for (int m = 0; m < M; ++m) {
        std::vector<double> rhs1 = rhs_at(m + 1);
        std::vector<double> wn;
        if (!nonlinear) {
            wn = stepper.step(w, rhs0, rhs1);
        } else {
            // inner Picard on the lagged divergence-form nonlinearity
            std::vector<double> lag = w;
            bool converged = false;
            double resid = 0.0;
            for (int k = 0; k < cfg.picard_max; ++k) {
                std::vector<double> r1 = rhs1;
                const auto nl = burgers_term(full_state(lag, m + 1), n, disc.dx);
                for (int i = 0; i < n; ++i) r1[i] -= nl[i];
                wn = stepper.step(w, rhs0, r1);
                resid = 0.0;
                for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(wn[i] - lag[i]));
                lag = wn;
                if (resid < cfg.picard_tol) { converged = true; break; }
            }
            if (!converged)
                throw nonconvergence_error("nonlinear step: Picard iteration stalled", resid,
                                           m + 1);
        }
        for (double x : wn)
            if (!std::isfinite(x))
                throw solver_breakdown_error("time step produced non-finite values", m + 1);
        w = std::move(wn);
        traj.states.push_back(full_state(w, m + 1));
        rhs0 = std::move(rhs1);
        if (nonlinear) {
            const auto nl = burgers_term(traj.states.back(), n, disc.dx);
            for (int i = 0; i < n; ++i) rhs0[i] -= nl[i];
        }
    }

    std::vector<double> t0(M + 1), tL(M + 1);
    for (int m = 0; m <= M; ++m) {
        t0[m] = uxx_left(traj.states[m], disc.dx);
        tL[m] = uxx_right(traj.states[m], disc.dx);
    }
    traj.uxx_at_0 = TimeSeries(tgrid, std::move(t0));
    traj.uxx_at_L = TimeSeries(tgrid, std::move(tL));
    return traj;
}

} // namespace detail

// Solution map for the linearized equation u_t + u_x + u_xxx - u_xxxxx = f.
inline Trajectory solve_linear(const GridFunction& u0, const BoundarySet& bset,
                               const TimeSeries& h, const SourceSplit& f,
                               const SolverConfig& cfg, GridPtr grid, TimeGridPtr tgrid) {
    return detail::run_scheme(u0, bset, h, f, cfg, grid, tgrid, false);
}

// Solution map for the full equation with u u_x, handled by an inner Picard
// loop on the lagged divergence form (u^2/2)_x.
inline Trajectory solve_nonlinear(const GridFunction& u0, const BoundarySet& bset,
                                  const TimeSeries& h, const SourceSplit& f,
                                  const SolverConfig& cfg, GridPtr grid, TimeGridPtr tgrid) {
    return detail::run_scheme(u0, bset, h, f, cfg, grid, tgrid, true);
}

// Second difference quotient at every node, one-sided at the endpoints.
inline std::vector<double> second_difference(const std::vector<double>& full, double dx) {
    const int n = static_cast<int>(full.size());
    std::vector<double> d(n, 0.0);
    for (int i = 1; i < n - 1; ++i)
        d[i] = (full[i + 1] - 2.0 * full[i] + full[i - 1]) / (dx * dx);
    d[0] = detail::uxx_left(full, dx);
    d[n - 1] = detail::uxx_right(full, dx);
    return d;
}

// max_t ||u(t)||_{L2(0,L)} + ||second difference quotient||_{L2(Q_T)}.
inline double norm_X(const Trajectory& traj) {
    const auto wq = quad_weights(traj.grid->node_count(), traj.grid->dx);
    double max_l2 = 0.0;
    std::vector<double> uxx_sq(traj.states.size(), 0.0);
    for (size_t m = 0; m < traj.states.size(); ++m) {
        const auto& st = traj.states[m];
        double s = 0.0;
        for (size_t i = 0; i < st.size(); ++i) s += wq[i] * st[i] * st[i];
        max_l2 = std::max(max_l2, std::sqrt(std::max(s, 0.0)));
        const auto d2 = second_difference(st, traj.grid->dx);
        double s2 = 0.0;
        for (size_t i = 0; i < d2.size(); ++i) s2 += wq[i] * d2[i] * d2[i];
        uxx_sq[m] = s2;
    }
    // trapezoid in time
    double st_int = 0.0;
    for (size_t m = 0; m + 1 < uxx_sq.size(); ++m)
        st_int += 0.5 * traj.tgrid->dt * (uxx_sq[m] + uxx_sq[m + 1]);
    return max_l2 + std::sqrt(std::max(st_int, 0.0));
}

// norm_X of the difference of two trajectories on the same grids.
inline double norm_X_diff(const Trajectory& a, const Trajectory& b) {
    if (a.states.size() != b.states.size())
        throw argument_error("norm_X_diff: trajectories have different lengths");
    Trajectory d = a;
    for (size_t m = 0; m < d.states.size(); ++m)
        for (size_t i = 0; i < d.states[m].size(); ++i) d.states[m][i] -= b.states[m][i];
    return norm_X(d);
}

} // namespace kawahara

#endif
