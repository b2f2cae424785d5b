// Space-time fields on the full node lattice and the centered-stencil engine
// that differential operators are applied with. Operators act on sampled
// fields; each derivative application shrinks the valid index window by the
// stencil radius unless the field is flagged compactly supported, in which
// case out-of-window reads are exact zeros.
//
// Stencils (all second-order accurate):
//   d_x   : (f_{i+1} - f_{i-1}) / 2h
//   d_xx  : (f_{i+1} - 2 f_i + f_{i-1}) / h^2
//   d_xxx : (f_{i+2} - 2 f_{i+1} + 2 f_{i-1} - f_{i-2}) / 2h^3   (5-point)
//   d_xxxx: (f_{i+2} - 4 f_{i+1} + 6 f_i - 4 f_{i-1} + f_{i-2}) / h^4
// and the same radius-1 forms in time; mixed derivatives compose the two.
// div(d grad .) uses the conservative flux form with d at half nodes, and
// d_x(g .) differentiates the product grid.

#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"

namespace nullctrl {

struct OperatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// m-component field on all (nt+1) x (nx+2) lattice nodes (boundary included).
struct SampledField {
    Grid grid;
    int m = 0;
    std::vector<double> data;  // [c][(nt+1)][(nx+2)]
    // valid index windows (inclusive); reads outside return 0 when
    // compact_support, and are invalid otherwise
    int t_lo = 0, t_hi = 0, x_lo = 0, x_hi = 0;
    bool compact_support = false;

    SampledField() = default;
    SampledField(const Grid& g, int m_)
        : grid(g), m(m_),
          data(static_cast<size_t>(m_) * (g.nt + 1) * (g.nx + 2), 0.0),
          t_hi(g.nt), x_hi(g.nx + 1) {}

    size_t idx(int c, int n, int i) const {
        return (static_cast<size_t>(c) * (grid.nt + 1) + n) * (grid.nx + 2) + i;
    }
    double& at(int c, int n, int i) { return data[idx(c, n, i)]; }
    double at(int c, int n, int i) const { return data[idx(c, n, i)]; }

    // read with zero extension outside the lattice (compact support semantics)
    double get(int c, int n, int i) const {
        if (n < 0 || n > grid.nt || i < 0 || i > grid.nx + 1) return 0.0;
        return data[idx(c, n, i)];
    }

    template <class F>  // F(c, t, x)
    static SampledField sample(const Grid& g, int m, F&& f) {
        SampledField out(g, m);
        for (int c = 0; c < m; ++c)
            for (int n = 0; n <= g.nt; ++n)
                for (int i = 0; i <= g.nx + 1; ++i) out.at(c, n, i) = f(c, g.t(n), g.x(i));
        return out;
    }

    static SampledField from_trajectory(const Trajectory& y, bool compact = false) {
        SampledField out(y.grid, y.m);
        out.compact_support = compact;
        for (int c = 0; c < y.m; ++c)
            for (int n = 0; n <= y.grid.nt; ++n)
                for (int i = 0; i < y.grid.nx; ++i) out.at(c, n, i + 1) = y.at(n).at(c, i);
        return out;
    }

    Trajectory to_trajectory() const {
        Trajectory y(grid, m);
        for (int c = 0; c < m; ++c)
            for (int n = 0; n <= grid.nt; ++n)
                for (int i = 0; i < grid.nx; ++i) y.at(n).at(c, i) = at(c, n, i + 1);
        return y;
    }

    void shrink(int dt_rad, int dx_rad) {
        if (compact_support) return;  // zero extension is exact
        t_lo += dt_rad;
        t_hi -= dt_rad;
        x_lo += dx_rad;
        x_hi -= dx_rad;
        if (t_lo > t_hi || x_lo > x_hi) throw OperatorError("stencil radius exhausted the grid");
    }

    void intersect_window(const SampledField& o) {
        t_lo = std::max(t_lo, o.t_lo);
        t_hi = std::min(t_hi, o.t_hi);
        x_lo = std::max(x_lo, o.x_lo);
        x_hi = std::min(x_hi, o.x_hi);
        compact_support = compact_support && o.compact_support;
    }
};

// discrete L^2 norm over the common valid window of (a - b), single component
inline double field_l2_diff(const SampledField& a, const SampledField& b) {
    if (a.m != b.m) throw OperatorError("component mismatch");
    int tlo = std::max(a.t_lo, b.t_lo), thi = std::min(a.t_hi, b.t_hi);
    int xlo = std::max(a.x_lo, b.x_lo), xhi = std::min(a.x_hi, b.x_hi);
    if (tlo > thi || xlo > xhi) throw OperatorError("empty comparison window");
    double s = 0.0;
    for (int c = 0; c < a.m; ++c)
        for (int n = tlo; n <= thi; ++n)
            for (int i = xlo; i <= xhi; ++i) {
                double d = a.at(c, n, i) - b.at(c, n, i);
                s += d * d;
            }
    return std::sqrt(a.grid.tau * a.grid.h * s);
}

inline double field_max_abs(const SampledField& a) {
    double mx = 0.0;
    for (int c = 0; c < a.m; ++c)
        for (int n = a.t_lo; n <= a.t_hi; ++n)
            for (int i = a.x_lo; i <= a.x_hi; ++i) mx = std::max(mx, std::abs(a.at(c, n, i)));
    return mx;
}

namespace stencil {

inline int x_radius(int order) {
    switch (order) {
        case 0: return 0;
        case 1: case 2: return 1;
        case 3: case 4: return 2;
        default: throw OperatorError("x-derivative order > 4 not supported");
    }
}
inline int t_radius(int order) {
    switch (order) {
        case 0: return 0;
        case 1: case 2: return 1;
        default: throw OperatorError("t-derivative order > 2 not supported");
    }
}

// pointwise derivative of one component through an accessor v(n, i)
template <class V>
inline double point_value(const V& v, int n, int i, int ot, int ox, double tau, double h) {
    auto tval = [&](int nn, int ii) -> double {
        switch (ot) {
            case 0: return v(nn, ii);
            case 1: return (v(nn + 1, ii) - v(nn - 1, ii)) / (2 * tau);
            case 2: return (v(nn + 1, ii) - 2 * v(nn, ii) + v(nn - 1, ii)) / (tau * tau);
            default: throw OperatorError("t-order > 2 not supported");
        }
    };
    switch (ox) {
        case 0: return tval(n, i);
        case 1: return (tval(n, i + 1) - tval(n, i - 1)) / (2 * h);
        case 2: return (tval(n, i + 1) - 2 * tval(n, i) + tval(n, i - 1)) / (h * h);
        case 3:
            return (tval(n, i + 2) - 2 * tval(n, i + 1) + 2 * tval(n, i - 1) - tval(n, i - 2)) /
                   (2 * h * h * h);
        case 4:
            return (tval(n, i + 2) - 4 * tval(n, i + 1) + 6 * tval(n, i) - 4 * tval(n, i - 1) +
                    tval(n, i - 2)) /
                   (h * h * h * h);
        default: throw OperatorError("x-order > 4 not supported");
    }
}

// D_t^ot D_x^ox of component c, accumulated into out_c of `out` over the
// window appropriate for the stencil radii
inline void add_derivative(const SampledField& f, int c, int ot, int ox, SampledField& out,
                           int out_c, double scale = 1.0) {
    const Grid& g = f.grid;
    auto v = [&](int n, int i) { return f.compact_support ? f.get(c, n, i) : f.at(c, n, i); };
    int rt = t_radius(ot), rx = x_radius(ox);
    int tlo = f.t_lo, thi = f.t_hi, xlo = f.x_lo, xhi = f.x_hi;
    if (!f.compact_support) {
        tlo += rt; thi -= rt; xlo += rx; xhi -= rx;
        if (tlo > thi || xlo > xhi) throw OperatorError("stencil radius exhausted the grid");
    }
    for (int n = tlo; n <= thi; ++n)
        for (int i = xlo; i <= xhi; ++i)
            out.at(out_c, n, i) += scale * point_value(v, n, i, ot, ox, g.tau, g.h);
}

}  // namespace stencil

// A finite sum of terms acting on multi-component sampled fields. Term kinds:
//   derivative : coef(t,x) * D_t^ot D_x^ox u_in          -> row out
//   flux_div   : d_x( coef d_x u_in ), conservative form -> row out
//   div_prod   : D_t^ot D_x^(ox-1) applied after d_x( coef * u_in )
//                (ox counts the outer d_x; div_prod with ox=1 is d_x(c u))
struct DiffOperator {
    enum class Kind { derivative, flux_div, div_prod };
    struct Term {
        Kind kind = Kind::derivative;
        CoefficientField coef;
        int ot = 0, ox = 0;
        int in_c = 0, out_c = 0;
        double factor = 1.0;
    };

    int in_arity = 0, out_arity = 0;
    std::vector<Term> terms;
    std::string name;

    DiffOperator(int in_a, int out_a, std::string nm = "")
        : in_arity(in_a), out_arity(out_a), name(std::move(nm)) {}

    DiffOperator& add(const CoefficientField& coef, int ot, int ox, int in_c, int out_c,
                      double factor = 1.0) {
        terms.push_back({Kind::derivative, coef, ot, ox, in_c, out_c, factor});
        return *this;
    }
    DiffOperator& add_flux(const CoefficientField& d, int in_c, int out_c, double factor = 1.0) {
        terms.push_back({Kind::flux_div, d, 0, 2, in_c, out_c, factor});
        return *this;
    }
    DiffOperator& add_div_prod(const CoefficientField& gc, int in_c, int out_c,
                               double factor = 1.0) {
        terms.push_back({Kind::div_prod, gc, 0, 1, in_c, out_c, factor});
        return *this;
    }

    int max_t_radius() const {
        int r = 0;
        for (const auto& tm : terms) r = std::max(r, stencil::t_radius(tm.ot));
        return r;
    }
    int max_x_radius() const {
        int r = 0;
        for (const auto& tm : terms) r = std::max(r, stencil::x_radius(tm.ox));
        return r;
    }

    SampledField apply(const SampledField& f) const {
        if (f.m != in_arity) throw OperatorError("operator arity mismatch: " + name);
        SampledField out(f.grid, out_arity);
        out.compact_support = f.compact_support;
        out.t_lo = f.t_lo; out.t_hi = f.t_hi; out.x_lo = f.x_lo; out.x_hi = f.x_hi;
        if (!f.compact_support) {
            out.t_lo += max_t_radius();
            out.t_hi -= max_t_radius();
            out.x_lo += max_x_radius();
            out.x_hi -= max_x_radius();
            if (out.t_lo > out.t_hi || out.x_lo > out.x_hi)
                throw OperatorError("stencil radius exhausted the grid: " + name);
        }
        const Grid& g = f.grid;
        for (const auto& tm : terms) {
            if (tm.in_c >= in_arity || tm.out_c >= out_arity)
                throw OperatorError("term component out of range: " + name);
            int tlo = out.t_lo, thi = out.t_hi, xlo = out.x_lo, xhi = out.x_hi;
            auto v = [&](int n, int i) {
                return f.compact_support ? f.get(tm.in_c, n, i) : f.at(tm.in_c, n, i);
            };
            switch (tm.kind) {
                case Kind::derivative: {
                    const bool cconst = tm.coef.is_constant();
                    const double cv = cconst ? tm.factor * tm.coef.constant_value() : 0.0;
                    if (cconst && cv == 0.0) break;
                    for (int n = tlo; n <= thi; ++n) {
                        double t = g.t(n);
                        for (int i = xlo; i <= xhi; ++i) {
                            double coef = cconst ? cv : tm.factor * tm.coef(t, g.x(i));
                            out.at(tm.out_c, n, i) +=
                                coef * stencil::point_value(v, n, i, tm.ot, tm.ox, g.tau, g.h);
                        }
                    }
                    break;
                }
                case Kind::flux_div: {
                    for (int n = tlo; n <= thi; ++n) {
                        double t = g.t(n);
                        for (int i = xlo; i <= xhi; ++i) {
                            double dp = tm.coef(t, g.x(i) + 0.5 * g.h);
                            double dm = tm.coef(t, g.x(i) - 0.5 * g.h);
                            out.at(tm.out_c, n, i) +=
                                tm.factor *
                                (dp * (v(n, i + 1) - v(n, i)) - dm * (v(n, i) - v(n, i - 1))) /
                                (g.h * g.h);
                        }
                    }
                    break;
                }
                case Kind::div_prod: {
                    for (int n = tlo; n <= thi; ++n) {
                        double t = g.t(n);
                        for (int i = xlo; i <= xhi; ++i) {
                            double pp = tm.coef(t, g.x(i + 1)) * v(n, i + 1);
                            double pm = tm.coef(t, g.x(i - 1)) * v(n, i - 1);
                            out.at(tm.out_c, n, i) += tm.factor * (pp - pm) / (2 * g.h);
                        }
                    }
                    break;
                }
            }
        }
        return out;
    }

    std::string describe() const {
        auto num = [](double v) {
            char b[32];
            std::snprintf(b, sizeof b, "%g", v);
            return std::string(b);
        };
        std::string s = name + " (" + std::to_string(in_arity) + " -> " +
                        std::to_string(out_arity) + " components)\n";
        for (const auto& tm : terms) {
            if (tm.coef.is_constant() && tm.factor * tm.coef.constant_value() == 0.0)
                continue;  // structural zeros add nothing to the report
            // fold the sign factor into constant coefficients
            std::string coef;
            std::string fac;
            if (tm.coef.is_constant()) {
                coef = num(tm.factor * tm.coef.constant_value());
            } else {
                coef = tm.coef.formula().empty() ? "c(t,x)" : "(" + tm.coef.formula() + ")";
                if (tm.factor != 1.0) fac = num(tm.factor) + " * ";
            }
            s += "  out[" + std::to_string(tm.out_c) + "] += " + fac;
            switch (tm.kind) {
                case Kind::derivative: {
                    std::string op;
                    for (int k = 0; k < tm.ot; ++k) op += "d_t ";
                    for (int k = 0; k < tm.ox; ++k) op += "d_x ";
                    s += coef + " * " + op + "u[" + std::to_string(tm.in_c) + "]\n";
                    break;
                }
                case Kind::flux_div:
                    s += "d_x( " + coef + " * d_x u[" + std::to_string(tm.in_c) + "] )\n";
                    break;
                case Kind::div_prod:
                    s += "d_x( " + coef + " * u[" + std::to_string(tm.in_c) + "] )\n";
                    break;
            }
        }
        return s;
    }

};

}  // namespace nullctrl
