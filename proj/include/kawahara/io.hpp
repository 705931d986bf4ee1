#ifndef KAWAHARA_IO_HPP
#define KAWAHARA_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kawahara/errors.hpp"
#include "kawahara/manufactured.hpp"
#include "kawahara/solver.hpp"

namespace kawahara {

// Full-precision decimal formatting shared by every artifact writer so that
// identical runs produce byte-identical files.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out << "t,x,u\n";
    for (int m = 0; m <= traj.tgrid->steps; ++m)
        for (int i = 0; i < traj.grid->node_count(); ++i)
            out << format_full(traj.tgrid->times[m]) << ',' << format_full(traj.grid->nodes[i])
                << ',' << format_full(traj.states[m][i]) << '\n';
}

inline void write_traces_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out << "t,uxx0,uxxL\n";
    for (int m = 0; m <= traj.tgrid->steps; ++m)
        out << format_full(traj.tgrid->times[m]) << ',' << format_full(traj.uxx_at_0.values[m])
            << ',' << format_full(traj.uxx_at_L.values[m]) << '\n';
}

inline void write_series_csv(const std::string& path, const TimeSeries& s,
                             const std::string& value_name = "value") {
    std::ofstream out(path);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out << "t," << value_name << '\n';
    for (int m = 0; m < s.tgrid->node_count(); ++m)
        out << format_full(s.tgrid->times[m]) << ',' << format_full(s.values[m]) << '\n';
}

inline void write_residuals_csv(const std::string& path, const std::vector<double>& hist) {
    std::ofstream out(path);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out << "iter,residual\n";
    for (size_t k = 0; k < hist.size(); ++k)
        out << k << ',' << format_full(hist[k]) << '\n';
}

inline void write_convergence_csv(const std::string& path, const ConvergenceTable& table) {
    std::ofstream out(path);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out << "level,dx,dt,error,order\n";
    for (const auto& lev : table.levels)
        out << lev.level << ',' << format_full(lev.dx) << ',' << format_full(lev.dt) << ','
            << format_full(lev.error) << ',' << format_full(lev.order) << '\n';
}

// Reads a two-column CSV (optional header) and returns the second column.
inline std::vector<double> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error({"cannot read file: " + path});
    std::vector<double> vals;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string ts, vs;
        if (!std::getline(ls, ts, ',') || !std::getline(ls, vs))
            throw validation_error({"malformed CSV row in " + path + ": " + line});
        try {
            vals.push_back(std::stod(vs));
        } catch (...) {
            if (first) { first = false; continue; } // header row
            throw validation_error({"non-numeric value in " + path + ": " + line});
        }
        first = false;
    }
    return vals;
}

} // namespace kawahara

#endif
