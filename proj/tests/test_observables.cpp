#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kawahara/manufactured.hpp"
#include "kawahara/observables.hpp"

using namespace kawahara;

namespace {

Trajectory static_trajectory(GridPtr grid, TimeGridPtr tgrid,
                             const std::function<double(double)>& profile) {
    Trajectory traj;
    traj.grid = grid;
    traj.tgrid = tgrid;
    traj.bset = BoundarySet::zero(tgrid);
    traj.control = TimeSeries::zero(tgrid);
    traj.uxx_at_0 = TimeSeries::zero(tgrid);
    traj.uxx_at_L = TimeSeries::zero(tgrid);
    for (int m = 0; m < tgrid->node_count(); ++m) {
        std::vector<double> vals(grid->node_count());
        for (int i = 0; i < grid->node_count(); ++i) vals[i] = profile(grid->nodes[i]);
        traj.states.push_back(std::move(vals));
    }
    return traj;
}

} // namespace

TEST_CASE("moment of the zero trajectory vanishes") {
    GridPtr grid = make_grid(1.0, 99);
    TimeGridPtr tgrid = make_time_grid(0.5, 16);
    auto traj = static_trajectory(grid, tgrid, [](double) { return 0.0; });
    const auto q = moment_q(traj, canonical_omega(1.0, false));
    for (double v : q.values) CHECK(v == 0.0);
}

TEST_CASE("moment of the test function against itself") {
    GridPtr grid = make_grid(1.0, 99);
    TimeGridPtr tgrid = make_time_grid(0.5, 4);
    const TestFunction om = canonical_omega(1.0, false);
    auto traj = static_trajectory(grid, tgrid, [&](double x) { return eval_deriv(om, 0, x); });
    const auto q = moment_q(traj, om);
    // int_0^1 x^6 (x-1)^4 dx = 1/2310
    CHECK(std::abs(q.values[0] - 1.0 / 2310.0) < 1e-7);
}

TEST_CASE("moment of a static unit field is the integral of omega") {
    GridPtr grid = make_grid(1.0, 99);
    TimeGridPtr tgrid = make_time_grid(0.5, 8);
    const TestFunction om = canonical_omega(1.0, false);
    auto traj = static_trajectory(grid, tgrid, [](double) { return 1.0; });
    const auto q = moment_q(traj, om);
    // int_0^1 x^3 (x-1)^2 dx = 1/60
    for (double v : q.values) CHECK(std::abs(v - 1.0 / 60.0) < 1e-8);
}

TEST_CASE("moment is linear in the state and the test function") {
    GridPtr grid = make_grid(1.0, 63);
    TimeGridPtr tgrid = make_time_grid(0.5, 4);
    const TestFunction om = canonical_omega(1.0, false);
    auto t1 = static_trajectory(grid, tgrid, [](double x) { return std::sin(3.0 * x); });
    auto t2 = static_trajectory(grid, tgrid, [](double x) { return x * (1.0 - x); });
    Trajectory tsum = t1;
    for (int m = 0; m < tgrid->node_count(); ++m)
        for (int i = 0; i < grid->node_count(); ++i)
            tsum.states[m][i] = 2.0 * t1.states[m][i] - 3.0 * t2.states[m][i];
    const auto q1 = moment_q(t1, om), q2 = moment_q(t2, om), qs = moment_q(tsum, om);
    for (int m = 0; m < tgrid->node_count(); ++m)
        CHECK(qs.values[m] ==
              Catch::Approx(2.0 * q1.values[m] - 3.0 * q2.values[m]).margin(1e-14));

    std::vector<double> scaled = om.coeffs;
    for (auto& c : scaled) c *= 4.0;
    const TestFunction om4(scaled, 1.0);
    const auto q4 = moment_q(t1, om4);
    for (int m = 0; m < tgrid->node_count(); ++m)
        CHECK(q4.values[m] == Catch::Approx(4.0 * q1.values[m]).margin(1e-14));
}

TEST_CASE("moment rejects inadmissible test functions") {
    GridPtr grid = make_grid(1.0, 32);
    TimeGridPtr tgrid = make_time_grid(0.5, 4);
    auto traj = static_trajectory(grid, tgrid, [](double) { return 1.0; });
    TestFunction bad({0.0, 0.0, 1.0, -2.0, 1.0}, 1.0); // omega''(0) != 0
    CHECK_THROWS_AS(moment_q(traj, bad), precondition_error);
}

TEST_CASE("trace identity vanishes on zero data") {
    GridPtr grid = make_grid(1.0, 32);
    TimeGridPtr tgrid = make_time_grid(0.5, 8);
    auto traj = static_trajectory(grid, tgrid, [](double) { return 0.0; });
    const auto r = qprime_identity(traj, BoundarySet::zero(tgrid), TimeSeries::zero(tgrid),
                                   SourceSplit::zero(), canonical_omega(1.0, false));
    for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("trace identity tracks the differenced moment under refinement") {
    const auto mc = manufactured_case("poly-decay");
    const TestFunction om = canonical_omega(1.0, false);
    auto run = [&](int interior) {
        GridPtr grid = make_grid(1.0, interior);
        const int steps = static_cast<int>(std::lround(0.25 / grid->dx));
        TimeGridPtr tgrid = make_time_grid(0.25, steps);
        const auto bset = mc.boundary_set(tgrid);
        const auto h = mc.control_trace(tgrid);
        const auto f = mc.source_split(grid, tgrid);
        Trajectory traj =
            solve_linear(mc.initial_state(grid), bset, h, f, {}, grid, tgrid);
        const auto ms = build_moment_series(traj, bset, h, f, om);
        double dev = 0.0;
        for (int m = 0; m < tgrid->node_count(); ++m)
            dev = std::max(dev,
                           std::abs(ms.qprime_identity.values[m] - ms.qprime_fd.values[m]));
        return dev;
    };
    const double d0 = run(48);
    const double d1 = run(96);
    CHECK(std::log2(d0 / d1) > 1.6);
}

TEST_CASE("identity variants differ by the curvature-weighted trace") {
    GridPtr grid = make_grid(1.0, 48);
    TimeGridPtr tgrid = make_time_grid(0.25, 32);
    const TestFunction om = canonical_omega(1.0, false);
    BoundarySet bset = BoundarySet::zero(tgrid);
    bset.h2 = TimeSeries::sample(tgrid, [](double t) { return 0.7 * std::sin(9.0 * t); });
    auto traj = static_trajectory(grid, tgrid, [](double x) { return x * x * (1 - x); });
    const auto rc = qprime_identity(traj, bset, TimeSeries::zero(tgrid), SourceSplit::zero(),
                                    om, TraceIdentityForm::consistent);
    const auto ra = qprime_identity(traj, bset, TimeSeries::zero(tgrid), SourceSplit::zero(),
                                    om, TraceIdentityForm::asymmetric);
    const double w2L = eval_deriv(om, 2, 1.0);
    for (int m = 0; m < tgrid->node_count(); ++m)
        CHECK(std::abs((rc.values[m] - ra.values[m]) + w2L * bset.h2.values[m]) < 1e-12);
}

TEST_CASE("rate bound ratio is nondecreasing with the horizon") {
    // the same datum supported in [0, 0.25], extended by zero to longer
    // horizons: the rate keeps accumulating mass, the data norms do not
    const TestFunction om = canonical_omega(1.0, false);
    const double pi = 3.14159265358979323846;
    auto measured_C = [&](double T) {
        GridPtr grid = make_grid(1.0, 64);
        const int steps = static_cast<int>(std::lround(T / 0.015625)); // shared dt
        TimeGridPtr tgrid = make_time_grid(T, steps);
        auto chopped = [&](double t) { return t <= 0.25 ? std::sin(8.0 * pi * t) : 0.0; };
        auto h = TimeSeries::sample(tgrid, chopped);
        SourceSplit f = SourceSplit::from_f1(grid, tgrid, [&](double t, double x) {
            return std::sin(pi * x) * chopped(t);
        });
        Trajectory traj = solve_linear(GridFunction::zero(grid), BoundarySet::zero(tgrid), h,
                                       f, {}, grid, tgrid);
        const auto r = qprime_identity(traj, BoundarySet::zero(tgrid), h, f, om);
        auto trap_l2 = [&](const std::vector<double>& v) {
            double s = 0.0;
            for (size_t m = 0; m + 1 < v.size(); ++m)
                s += 0.5 * tgrid->dt * (v[m] * v[m] + v[m + 1] * v[m + 1]);
            return std::sqrt(s);
        };
        std::vector<double> fn(tgrid->node_count());
        for (int m = 0; m < tgrid->node_count(); ++m) fn[m] = l2_norm(f.f1[m]);
        const double data = trap_l2(h.values) + trap_l2(fn);
        return trap_l2(r.values) / data;
    };
    const double c1 = measured_C(0.25);
    const double c2 = measured_C(0.5);
    const double c3 = measured_C(1.0);
    CHECK(c2 >= c1 - 0.01 * std::abs(c1));
    CHECK(c3 >= c2 - 0.01 * std::abs(c2));
}

TEST_CASE("energy margins") {
    GridPtr grid = make_grid(1.0, 64);
    const int steps = static_cast<int>(std::lround(0.5 / grid->dx));
    TimeGridPtr tgrid = make_time_grid(0.5, steps);
    const double pi = 3.14159265358979323846;

    SECTION("zero data gives zero margins") {
        Trajectory traj =
            solve_linear(GridFunction::zero(grid), BoundarySet::zero(tgrid),
                         TimeSeries::zero(tgrid), SourceSplit::zero(), {}, grid, tgrid);
        const auto rep = energy_check(traj, TimeSeries::zero(tgrid), SourceSplit::zero());
        CHECK(rep.min_margin == Catch::Approx(0.0).margin(1e-15));
        CHECK(rep.pass);
    }
    SECTION("pure control satisfies the trace bound") {
        auto h = TimeSeries::sample(tgrid,
                                    [&](double t) { return 0.8 * std::sin(4.0 * pi * t); });
        Trajectory traj = solve_linear(GridFunction::zero(grid), BoundarySet::zero(tgrid), h,
                                       SourceSplit::zero(), {}, grid, tgrid);
        const auto rep = energy_check(traj, h, SourceSplit::zero());
        CHECK(rep.min_margin >= -1e-6);
    }
    SECTION("hypothesis violations are rejected") {
        auto u0 = GridFunction::sample(grid, [&](double x) { return std::sin(pi * x); });
        Trajectory traj = solve_linear(u0, BoundarySet::zero(tgrid), TimeSeries::zero(tgrid),
                                       SourceSplit::zero(), {}, grid, tgrid);
        CHECK_THROWS_AS(energy_check(traj, TimeSeries::zero(tgrid), SourceSplit::zero()),
                        precondition_error);
    }
}

TEST_CASE("bilinear ratio") {
    GridPtr grid = make_grid(1.0, 99);
    TimeGridPtr tgrid = make_time_grid(1.0, 64);
    const double pi = 3.14159265358979323846;
    auto traj = static_trajectory(grid, tgrid, [&](double x) { return std::sin(pi * x); });

    SECTION("matches the closed-form value for a static sine") {
        // ||u^2||_{L2(Q_T)} = sqrt(T * 3/8); norm_X = sqrt(1/2)(1 + pi^2)
        const double expected =
            std::sqrt(3.0 / 8.0) /
            (2.0 * 0.5 * (1.0 + pi * pi) * (1.0 + pi * pi));
        const double got = gn_ratio(traj);
        CHECK(got == Catch::Approx(expected).epsilon(0.02));
        CHECK(got > 0.0);
    }
    SECTION("zero trajectory is rejected") {
        auto zero = static_trajectory(grid, tgrid, [](double) { return 0.0; });
        CHECK_THROWS_AS(gn_ratio(zero), argument_error);
    }
}
