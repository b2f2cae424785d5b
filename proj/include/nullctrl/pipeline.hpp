// End-to-end construction and verification of the null control:
//   1. analytic step: penalized HUM gives (z, v) with z(T) ~ 0,
//   2. algebraic step: (zhat, vhat) := M(theta v) with L(zhat,vhat) = N(theta v)
//      (or = theta v in the two-equation direct mode),
//   3. assemble y := z - zhat, u := -vhat (m-1 components).
// The report recomputes the original system's residual for (y, u) with an
// independent stencil set (nodal centered time differences, non-conservative
// diffusion), so the verification does not share code paths with the solver.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "algebraic.hpp"
#include "hum.hpp"
#include "io.hpp"

namespace nullctrl {

struct VerificationReport {
    double pde_residual = 0.0;      // independent-stencil residual of the controlled system
    double terminal_norm = 0.0;     // || y(T) ||
    double support_violation = 0.0; // max |u| outside omega
    double boundary_violation = 0.0;
    double zhat_initial = 0.0;      // || zhat(0) || and || zhat(T) ||: both must
    double zhat_terminal = 0.0;     // vanish (the weight kills theta*v near 0, T)
    double consistency_residual = 0.0;  // || L(zhat,vhat) - N(theta v) || over the valid window
    int nx = 0, nt = 0;
    double h = 0.0, tau = 0.0;
};

struct PipelineResult {
    Trajectory y;       // controlled state, m components
    Trajectory u;       // control, m-1 components
    HumSolution hum;
    VerificationReport report;
};

namespace detail_pipeline {

// residual of the original system for (y,u): centered nodal time derivative,
// non-conservative diffusion d*u_xx + d_x*u_x; independent of the CN solver
inline double independent_residual(const ProblemSpec& spec, const Trajectory& y,
                                   const Trajectory& u) {
    const Grid& g = y.grid;
    int m = spec.m;
    double acc = 0.0;
    for (int n = 1; n < g.nt; ++n) {
        double t = g.t(n);
        for (int l = 0; l < m; ++l)
            for (int i = 0; i < g.nx; ++i) {
                double x = g.xi(i);
                double yv = y.at(n).at(l, i);
                double ym = (i > 0) ? y.at(n).at(l, i - 1) : 0.0;
                double yp = (i < g.nx - 1) ? y.at(n).at(l, i + 1) : 0.0;
                double yt = (y.at(n + 1).at(l, i) - y.at(n - 1).at(l, i)) / (2 * g.tau);
                double yx = (yp - ym) / (2 * g.h);
                double yxx = (yp - 2 * yv + ym) / (g.h * g.h);
                double r = yt - spec.coeffs.d[l](t, x) * yxx -
                           spec.coeffs.d[l].partial(0, 1, t, x) * yx;
                for (int j = 0; j < m; ++j) {
                    double yjm = (i > 0) ? y.at(n).at(j, i - 1) : 0.0;
                    double yjp = (i < g.nx - 1) ? y.at(n).at(j, i + 1) : 0.0;
                    r -= spec.coeffs.G(l, j)(t, x) * (yjp - yjm) / (2 * g.h);
                    r -= spec.coeffs.A(l, j)(t, x) * y.at(n).at(j, i);
                }
                if (l < m - 1) r -= u.at(n).at(l, i);
                acc += g.tau * g.h * r * r;
            }
    }
    return std::sqrt(acc);
}

// theta * v as a compactly supported lattice field
inline SampledField control_source_field(const Grid& grid, int m, const CutoffTheta& theta,
                                         const Trajectory& v) {
    SampledField f(grid, m);
    f.compact_support = true;
    for (int c = 0; c < m; ++c)
        for (int n = 0; n <= grid.nt; ++n)
            for (int i = 0; i < grid.nx; ++i)
                f.at(c, n, i + 1) = theta.at_interior(i) * v.at(n).at(c, i);
    return f;
}

inline SampledField apply_reduction(ReductionMode mode, const CoefficientSet& coeffs, int i0,
                                    const SampledField& f) {
    switch (mode) {
        case ReductionMode::constant_coefficients:
            return build_reduction_constant(i0, coeffs).apply(f);
        case ReductionMode::zero_order_coupling:
            return ZeroOrderReduction(coeffs).apply(f);
        case ReductionMode::determinant_condition:
        default:
            return DerivativeStackReduction(coeffs).apply(f);
    }
}

// y = z - zhat, u = -vhat from the reduction output (z comps, then v comps)
inline void assemble_pair(const Grid& grid, int m, const Trajectory& z, const SampledField& red,
                          Trajectory& y, Trajectory& u) {
    y = Trajectory(grid, m);
    u = Trajectory(grid, m - 1);
    for (int n = 0; n <= grid.nt; ++n) {
        for (int c = 0; c < m; ++c)
            for (int i = 0; i < grid.nx; ++i)
                y.at(n).at(c, i) = z.at(n).at(c, i) - red.at(c, n, i + 1);
        for (int c = 0; c < m - 1; ++c)
            for (int i = 0; i < grid.nx; ++i) u.at(n).at(c, i) = -red.at(m + c, n, i + 1);
    }
}

}  // namespace detail_pipeline

inline PipelineResult run_pipeline(const ProblemSpec& spec, const Grid& grid,
                                   ReductionMode mode, const GridFunction& y0, HumConfig cfg) {
    {
        auto bad = validate_spec(spec);
        if (!bad.empty()) throw std::invalid_argument("invalid problem spec: " + bad.front());
    }
    PipelineResult out;
    cfg.form = (mode == ReductionMode::constant_coefficients) ? ControlForm::coupling_operator
                                                              : ControlForm::direct;
    out.hum = hum_solve(spec, grid, cfg, y0);
    int m = spec.m;

    SampledField f = detail_pipeline::control_source_field(grid, m, *cfg.theta, out.hum.control);
    SampledField red = detail_pipeline::apply_reduction(mode, spec.coeffs, out.hum.i0, f);
    detail_pipeline::assemble_pair(grid, m, out.hum.state, red, out.y, out.u);

    VerificationReport& rep = out.report;
    rep.nx = grid.nx;
    rep.nt = grid.nt;
    rep.h = grid.h;
    rep.tau = grid.tau;
    rep.terminal_norm = norm_h(out.y.terminal(), grid.h);
    GridFunction zhatT(m, grid.nx), zhat0(m, grid.nx);
    for (int c = 0; c < m; ++c)
        for (int i = 0; i < grid.nx; ++i) {
            zhatT.at(c, i) = red.at(c, grid.nt, i + 1);
            zhat0.at(c, i) = red.at(c, 0, i + 1);
        }
    rep.zhat_terminal = norm_h(zhatT, grid.h);
    rep.zhat_initial = norm_h(zhat0, grid.h);
    double y0n = norm_h(y0, grid.h);
    if (std::max(rep.zhat_terminal, rep.zhat_initial) > 1e-8 * std::max(y0n, 1e-30))
        throw SolverError("zhat failed to vanish at a time endpoint: weight decay too weak "
                          "for this grid");

    // support: u must be identically zero outside omega
    for (int n = 0; n <= grid.nt; ++n)
        for (int c = 0; c < m - 1; ++c)
            for (int i = 0; i < grid.nx; ++i)
                if (!spec.omega.contains(grid.xi(i)))
                    rep.support_violation =
                        std::max(rep.support_violation, std::abs(out.u.at(n).at(c, i)));

    rep.pde_residual = detail_pipeline::independent_residual(spec, out.y, out.u);

    // consistency chain || L(zhat, vhat) - N(theta v) || (or - theta v)
    {
        DiffOperator L = op_L(spec.coeffs);
        SampledField lred = L.apply(red);
        SampledField rhs;
        if (mode == ReductionMode::constant_coefficients) {
            DiffOperator N = op_N(out.hum.i0, spec.coeffs);
            rhs = N.apply(f);
        } else {
            rhs = f;
        }
        // compare on the interior window reached by both stencils
        int rt = 2, rx = std::max(2, L.max_x_radius() + 4);
        lred.t_lo = rt; lred.t_hi = grid.nt - rt;
        lred.x_lo = rx; lred.x_hi = grid.nx + 1 - rx;
        lred.compact_support = false;
        rhs.t_lo = lred.t_lo; rhs.t_hi = lred.t_hi;
        rhs.x_lo = lred.x_lo; rhs.x_hi = lred.x_hi;
        rhs.compact_support = false;
        rep.consistency_residual = field_l2_diff(lred, rhs);
    }
    return out;
}

struct ApproximateControlResult {
    PipelineResult pipeline;
    double achieved_error = 0.0;  // || y(T) - yT ||^2
    double final_k = 0.0;
    bool reached = false;
};

// Target-tracking variant: raise k until || z(T) - yT ||^2 <= eps (or k_max),
// then run the algebraic step on the final control.
inline ApproximateControlResult approximate_control(const ProblemSpec& spec, const Grid& grid,
                                                    ReductionMode mode, const GridFunction& y0,
                                                    const GridFunction& yT, double eps,
                                                    HumConfig cfg, double k_max = 1e8) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    cfg.form = (mode == ReductionMode::constant_coefficients) ? ControlForm::coupling_operator
                                                              : ControlForm::direct;
    ApproximateControlResult res;
    GridFunction warm;
    bool have_warm = false;
    HumSolution sol;
    for (;;) {
        sol = hum_solve(spec, grid, cfg, y0, &yT, have_warm ? &warm : nullptr);
        warm = sol.chi;
        have_warm = true;
        res.final_k = cfg.k;
        if (sol.terminal_norm * sol.terminal_norm <= eps) {
            res.reached = true;
            break;
        }
        if (cfg.k >= k_max) break;
        cfg.k = std::min(cfg.k * 100.0, k_max);
    }
    // algebraic step on the final control (the reduction is blind to the target)
    PipelineResult out;
    out.hum = sol;
    int m = spec.m;
    SampledField f = detail_pipeline::control_source_field(grid, m, *cfg.theta, sol.control);
    SampledField red = detail_pipeline::apply_reduction(mode, spec.coeffs, sol.i0, f);
    detail_pipeline::assemble_pair(grid, m, sol.state, red, out.y, out.u);
    GridFunction err = out.y.terminal();
    err -= yT;
    res.achieved_error = dot_h(err, err, grid.h);
    out.report.terminal_norm = norm_h(out.y.terminal(), grid.h);
    out.report.nx = grid.nx; out.report.nt = grid.nt;
    out.report.h = grid.h; out.report.tau = grid.tau;
    res.pipeline = std::move(out);
    return res;
}

}  // namespace nullctrl
