// Spatial cutoff: 1 on the inner window, 0 outside the support window, with a
// polynomial smoothstep across the two collars. The default quintic
// 6u^5 - 15u^4 + 10u^3 is C^2 across the junctions, which is enough for the
// reductions of order <= 2 in space; the derivative-stack reduction applies
// four space derivatives to theta*v, so it uses the C^4 nonic variant
// (derivatives 1..4 vanish at both collar ends).

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace nullctrl {

enum class CutoffSmoothness { c2, c4 };

struct CutoffTheta {
    Window inner, support;
    Grid grid;
    CutoffSmoothness smoothness = CutoffSmoothness::c2;
    std::vector<double> values;  // on all nx+2 lattice nodes

    double eval(double x) const {
        if (x <= support.lo || x >= support.hi) return 0.0;
        if (x >= inner.lo && x <= inner.hi) return 1.0;
        double u = (x < inner.lo) ? (x - support.lo) / (inner.lo - support.lo)
                                  : (support.hi - x) / (support.hi - inner.hi);
        if (smoothness == CutoffSmoothness::c2)
            return u * u * u * (6.0 * u * u - 15.0 * u + 10.0);
        double u5 = u * u * u * u * u;
        return u5 * (70.0 * u * u * u * u - 315.0 * u * u * u + 540.0 * u * u - 420.0 * u + 126.0);
    }
    double at_node(int i) const { return values[i]; }          // lattice index 0..nx+1
    double at_interior(int i) const { return values[i + 1]; }  // interior index 0..nx-1
};

inline CutoffTheta build_cutoff(const Window& inner, const Window& support, const Grid& grid,
                                CutoffSmoothness smoothness = CutoffSmoothness::c2) {
    if (!inner.valid() || !support.valid() || !inner.strictly_inside(support))
        throw std::invalid_argument("cutoff windows must satisfy inner strictly inside support");
    CutoffTheta th;
    th.inner = inner;
    th.support = support;
    th.grid = grid;
    th.smoothness = smoothness;
    th.values.resize(grid.nx + 2);
    for (int i = 0; i <= grid.nx + 1; ++i) th.values[i] = th.eval(grid.x(i));
    return th;
}

// The cutoff windows for each reduction mode: the inner window is where the
// observability diagnostics look, the support window keeps a collar inside the
// control region so the reduction's stencils cannot spill past omega.
inline CutoffTheta default_cutoff(const ProblemSpec& spec, const Grid& grid, bool constant_mode) {
    if (constant_mode) {
        Window support{0.5 * (spec.omega.lo + spec.omega0.lo), 0.5 * (spec.omega.hi + spec.omega0.hi)};
        return build_cutoff(spec.omega0, support, grid, CutoffSmoothness::c2);
    }
    return build_cutoff(spec.omega1, spec.omega0, grid, CutoffSmoothness::c4);
}

}  // namespace nullctrl
