// Trajectory and table exports: CSV (17 significant digits, byte-stable) and
// a compact binary dump (uint32 header nx, nt, m; doubles row-major).

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace nullctrl {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// columns: t, x, component, value; boundary nodes included with zero values
inline void write_trajectory_csv(const Trajectory& y, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "t,x,component,value\n";
    const Grid& g = y.grid;
    for (int n = 0; n <= g.nt; ++n)
        for (int c = 0; c < y.m; ++c)
            for (int i = 0; i <= g.nx + 1; ++i) {
                double v = (i == 0 || i == g.nx + 1) ? 0.0 : y.at(n).at(c, i - 1);
                out << fmt17(g.t(n)) << ',' << fmt17(g.x(i)) << ',' << (c + 1) << ','
                    << fmt17(v) << '\n';
            }
    if (!out) throw IoError("write failed: " + path);
}

inline void write_trajectory_binary(const Trajectory& y, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    uint32_t header[3] = {static_cast<uint32_t>(y.grid.nx), static_cast<uint32_t>(y.grid.nt),
                          static_cast<uint32_t>(y.m)};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    // row-major: time, then component, then interior node
    for (int n = 0; n <= y.grid.nt; ++n)
        out.write(reinterpret_cast<const char*>(y.at(n).v.data()),
                  static_cast<std::streamsize>(y.at(n).v.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path);
}

inline Trajectory read_trajectory_binary(const std::string& path, double x_lo, double x_hi,
                                         double T) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    uint32_t header[3];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in) throw IoError("truncated header in " + path);
    Grid g(static_cast<int>(header[0]), static_cast<int>(header[1]), x_lo, x_hi, T);
    Trajectory y(g, static_cast<int>(header[2]));
    for (int n = 0; n <= g.nt; ++n) {
        in.read(reinterpret_cast<char*>(y.at(n).v.data()),
                static_cast<std::streamsize>(y.at(n).v.size() * sizeof(double)));
        if (!in) throw IoError("truncated payload in " + path);
    }
    return y;
}

// generic numeric table, one header row
inline void write_csv_table(const std::string& path, const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    for (size_t c = 0; c < columns.size(); ++c) out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const auto& r : rows) {
        for (size_t c = 0; c < r.size(); ++c) out << fmt17(r[c]) << (c + 1 < r.size() ? ',' : '\n');
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace nullctrl
