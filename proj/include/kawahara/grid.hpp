#ifndef KAWAHARA_GRID_HPP
#define KAWAHARA_GRID_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "kawahara/errors.hpp"

namespace kawahara {

// Uniform spatial grid on [0, L] with N interior nodes, dx = L/(N+1).
// Nodes include both endpoints, so node_count() == N + 2.
struct Grid {
    double length = 0.0;
    int interior = 0;
    double dx = 0.0;
    std::vector<double> nodes;

    int node_count() const { return interior + 2; }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(double length, int interior) {
    if (!(length > 0.0))
        throw config_error("grid: domain length must be positive, got " +
                           std::to_string(length));
    if (interior < 16)
        throw config_error("grid: interior node count must be at least 16, got " +
                           std::to_string(interior));
    auto g = std::make_shared<Grid>();
    g->length = length;
    g->interior = interior;
    g->dx = length / (interior + 1);
    g->nodes.resize(interior + 2);
    for (int i = 0; i <= interior + 1; ++i) g->nodes[i] = g->dx * i;
    g->nodes.back() = length;
    return g;
}

// Uniform time grid on [0, T] with M steps, dt = T/M.
struct TimeGrid {
    double horizon = 0.0;
    int steps = 0;
    double dt = 0.0;
    std::vector<double> times;

    int node_count() const { return steps + 1; }
};

using TimeGridPtr = std::shared_ptr<const TimeGrid>;

inline TimeGridPtr make_time_grid(double horizon, int steps) {
    if (!(horizon > 0.0))
        throw config_error("time grid: horizon must be positive, got " +
                           std::to_string(horizon));
    if (steps < 1)
        throw config_error("time grid: step count must be at least 1, got " +
                           std::to_string(steps));
    auto g = std::make_shared<TimeGrid>();
    g->horizon = horizon;
    g->steps = steps;
    g->dt = horizon / steps;
    g->times.resize(steps + 1);
    for (int m = 0; m <= steps; ++m) g->times[m] = g->dt * m;
    g->times.back() = horizon;
    return g;
}

// Samples of a function of x at every grid node (endpoints included).
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid->node_count())
            throw config_error("grid function: expected " +
                               std::to_string(grid->node_count()) + " values, got " +
                               std::to_string(values.size()));
    }

    static GridFunction zero(GridPtr g) {
        std::vector<double> v(g->node_count(), 0.0);
        return GridFunction(std::move(g), std::move(v));
    }

    template <class F>
    static GridFunction sample(GridPtr g, F&& f) {
        std::vector<double> v(g->node_count());
        for (int i = 0; i < g->node_count(); ++i) v[i] = f(g->nodes[i]);
        return GridFunction(std::move(g), std::move(v));
    }
};

// Samples of a function of t at every time node.
struct TimeSeries {
    TimeGridPtr tgrid;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(TimeGridPtr g, std::vector<double> v)
        : tgrid(std::move(g)), values(std::move(v)) {
        if (static_cast<int>(values.size()) != tgrid->node_count())
            throw config_error("time series: expected " +
                               std::to_string(tgrid->node_count()) + " values, got " +
                               std::to_string(values.size()));
    }

    static TimeSeries zero(TimeGridPtr g) {
        std::vector<double> v(g->node_count(), 0.0);
        return TimeSeries(std::move(g), std::move(v));
    }

    template <class F>
    static TimeSeries sample(TimeGridPtr g, F&& f) {
        std::vector<double> v(g->node_count());
        for (int m = 0; m < g->node_count(); ++m) v[m] = f(g->times[m]);
        return TimeSeries(std::move(g), std::move(v));
    }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace kawahara

#endif
