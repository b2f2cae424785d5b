// Uniform space-time grids and multi-component grid functions.
//
// Space: interior nodes x_i = x_lo + (i+1)h, i = 0..nx-1, h = (x_hi-x_lo)/(nx+1),
// with homogeneous Dirichlet values at the two boundary nodes.
// Time: nodes t_n = n*tau, n = 0..nt, tau = T/nt.
// All types here are immutable-by-convention after construction and safe to
// share across threads.

#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nullctrl {

struct Grid {
    int nx = 0;          // interior spatial nodes
    int nt = 0;          // time steps (nt+1 time nodes)
    double x_lo = 0.0, x_hi = 1.0;
    double T = 1.0;
    double h = 0.0, tau = 0.0;

    Grid() = default;
    Grid(int nx_, int nt_, double xlo, double xhi, double T_)
        : nx(nx_), nt(nt_), x_lo(xlo), x_hi(xhi), T(T_) {
        if (nx < 1 || nt < 1 || !(x_hi > x_lo) || !(T > 0.0))
            throw std::invalid_argument("Grid: need nx,nt >= 1, x_hi > x_lo, T > 0");
        h = (x_hi - x_lo) / (nx + 1);
        tau = T / nt;
    }

    // x(0) and x(nx+1) are the boundary nodes.
    double x(int i) const { return x_lo + i * h; }
    double xi(int i) const { return x_lo + (i + 1) * h; }  // i-th interior node
    double t(int n) const { return n * tau; }
    double t_half(int n) const { return (n + 0.5) * tau; }
};

// m-component function on the interior nodes of a grid slice.
struct GridFunction {
    int m = 0, nx = 0;
    std::vector<double> v;  // [c*nx + i]

    GridFunction() = default;
    GridFunction(int m_, int nx_) : m(m_), nx(nx_), v(static_cast<size_t>(m_) * nx_, 0.0) {}

    double& at(int c, int i) { return v[static_cast<size_t>(c) * nx + i]; }
    double at(int c, int i) const { return v[static_cast<size_t>(c) * nx + i]; }
    size_t size() const { return v.size(); }
    bool same_shape(const GridFunction& o) const { return m == o.m && nx == o.nx; }

    GridFunction& operator+=(const GridFunction& o) {
        assert(same_shape(o));
        for (size_t k = 0; k < v.size(); ++k) v[k] += o.v[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        assert(same_shape(o));
        for (size_t k = 0; k < v.size(); ++k) v[k] -= o.v[k];
        return *this;
    }
    GridFunction& operator*=(double a) {
        for (double& x : v) x *= a;
        return *this;
    }

    template <class F>  // F(c, x) -> value
    static GridFunction sample(const Grid& g, int m, F&& f) {
        GridFunction out(m, g.nx);
        for (int c = 0; c < m; ++c)
            for (int i = 0; i < g.nx; ++i) out.at(c, i) = f(c, g.xi(i));
        return out;
    }
};

inline GridFunction operator+(GridFunction a, const GridFunction& b) { a += b; return a; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { a -= b; return a; }
inline GridFunction operator*(double s, GridFunction a) { a *= s; return a; }

inline void axpy(double a, const GridFunction& x, GridFunction& y) {
    assert(x.same_shape(y));
    for (size_t k = 0; k < x.v.size(); ++k) y.v[k] += a * x.v[k];
}

// Discrete L^2(Omega)^m inner product, h * sum.
inline double dot_h(const GridFunction& a, const GridFunction& b, double h) {
    assert(a.same_shape(b));
    double s = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) s += a.v[k] * b.v[k];
    return h * s;
}
inline double norm_h(const GridFunction& a, double h) { return std::sqrt(dot_h(a, a, h)); }

// Time-indexed family of m-component grid functions, slice[n] at t = n*tau.
// Boundary values are identically zero by construction (not stored).
struct Trajectory {
    Grid grid;
    int m = 0;
    std::vector<GridFunction> slice;  // nt+1 entries

    Trajectory() = default;
    Trajectory(const Grid& g, int m_) : grid(g), m(m_), slice(g.nt + 1, GridFunction(m_, g.nx)) {}

    GridFunction& at(int n) { return slice[n]; }
    const GridFunction& at(int n) const { return slice[n]; }
    const GridFunction& terminal() const { return slice.back(); }
};

// ---- discrete norms --------------------------------------------------------

inline double l2_space(const GridFunction& u, double h) { return norm_h(u, h); }

inline double l2_spacetime(const Trajectory& y) {
    double s = 0.0;
    for (const auto& u : y.slice) s += dot_h(u, u, y.grid.h);
    // trapezoid in time: half weight on the end slices
    s -= 0.5 * (dot_h(y.slice.front(), y.slice.front(), y.grid.h) +
                dot_h(y.slice.back(), y.slice.back(), y.grid.h));
    return std::sqrt(std::max(0.0, s * y.grid.tau));
}

inline double h1_space(const GridFunction& u, double h) {
    double s = dot_h(u, u, h);
    for (int c = 0; c < u.m; ++c) {
        double prev = 0.0;  // Dirichlet boundary
        for (int i = 0; i <= u.nx; ++i) {
            double cur = (i < u.nx) ? u.at(c, i) : 0.0;
            double d = (cur - prev) / h;
            s += h * d * d;
            prev = cur;
        }
    }
    return std::sqrt(s);
}

// L^2 of value + two space derivatives + one time derivative, the discrete
// stand-in for the W^{2,1}_2 norm. Differences are one-sided at the ends.
inline double w21_like(const Trajectory& y) {
    const Grid& g = y.grid;
    double s = 0.0;
    for (int n = 0; n <= g.nt; ++n) {
        const GridFunction& u = y.at(n);
        for (int c = 0; c < y.m; ++c) {
            for (int i = 0; i < g.nx; ++i) {
                double um = (i > 0) ? u.at(c, i - 1) : 0.0;
                double up = (i < g.nx - 1) ? u.at(c, i + 1) : 0.0;
                double ux = (up - um) / (2 * g.h);
                double uxx = (up - 2 * u.at(c, i) + um) / (g.h * g.h);
                double ut;
                if (n == 0)
                    ut = (y.at(1).at(c, i) - u.at(c, i)) / g.tau;
                else if (n == g.nt)
                    ut = (u.at(c, i) - y.at(n - 1).at(c, i)) / g.tau;
                else
                    ut = (y.at(n + 1).at(c, i) - y.at(n - 1).at(c, i)) / (2 * g.tau);
                double w = (n == 0 || n == g.nt) ? 0.5 : 1.0;
                s += w * g.tau * g.h *
                     (u.at(c, i) * u.at(c, i) + ux * ux + uxx * uxx + ut * ut);
            }
        }
    }
    return std::sqrt(s);
}

struct DiscreteNorms {
    double l2_space = 0.0;
    double l2_spacetime = 0.0;
    double h1_space = 0.0;
    double w21 = 0.0;
};

// ---- misc helpers ----------------------------------------------------------

inline GridFunction random_gridfunction(const Grid& g, int m, std::mt19937_64& rng,
                                        double amp = 1.0) {
    std::normal_distribution<double> nrm(0.0, amp);
    GridFunction u(m, g.nx);
    for (double& x : u.v) x = nrm(rng);
    return u;
}

// Least-squares slope of log(err) vs log(h); NaN entries are skipped.
inline double fit_order(const std::vector<double>& hs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t k = 0; k < hs.size(); ++k) {
        if (!(errs[k] > 0.0) || !std::isfinite(errs[k])) continue;
        double lx = std::log(hs[k]), ly = std::log(errs[k]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nullctrl
