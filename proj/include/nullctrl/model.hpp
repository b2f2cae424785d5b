// Problem definitions and the controllability conditions: m coupled parabolic
// equations on an interval, m-1 controls acting on the first m-1 equations
// through a nested family of control windows omega2 cc omega1 cc omega0 cc
// omega. Condition checks:
//   - constant coefficients: some column i0 < m couples into the last equation
//     (necessary and sufficient; absence means the last equation evolves
//     freely and the system is not null controllable),
//   - m = 2, zero-order coupling: g21 == 0 and |a21| bounded below on a
//     space-time window,
//   - m = 2, first-order coupling: |det H| bounded below on a window.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "solvability.hpp"

namespace nullctrl {

struct ConditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Window {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x > lo && x < hi; }
    bool strictly_inside(const Window& outer) const { return lo > outer.lo && hi < outer.hi; }
    bool valid() const { return hi > lo; }
};

struct SpaceTimeWindow {
    double t0 = 0.0, t1 = 0.0;
    double x0 = 0.0, x1 = 0.0;
    bool valid() const { return t1 > t0 && x1 > x0; }
};

struct ProblemSpec {
    int m = 2;
    int space_dim = 1;  // all PDE solves are 1-D
    double x_lo = 0.0, x_hi = 1.0;
    double T = 1.0;
    Window omega;                       // control window
    Window omega0, omega1, omega2;      // nested: omega2 cc omega1 cc omega0 cc omega
    CoefficientSet coeffs;

    int control_count() const { return m - 1; }
};

// default sampling density for the open-condition checks
inline constexpr int kConditionSamples = 64;
inline constexpr double kTolPos = 1e-8;

inline std::vector<std::string> validate_spec(const ProblemSpec& spec) {
    std::vector<std::string> bad;
    if (spec.m < 2) bad.push_back("equation count must be >= 2");
    if (!(spec.x_hi > spec.x_lo)) bad.push_back("domain must satisfy x_lo < x_hi");
    if (!(spec.T > 0.0)) bad.push_back("horizon violated: T must be positive");
    if (!spec.omega.valid() || spec.omega.lo < spec.x_lo || spec.omega.hi > spec.x_hi ||
        !(spec.omega.lo > spec.x_lo) || !(spec.omega.hi < spec.x_hi))
        bad.push_back("window nesting violated: omega must be a strict open subinterval of the domain");
    else {
        if (!spec.omega0.valid() || !spec.omega0.strictly_inside(spec.omega))
            bad.push_back("window nesting violated: omega0 not strictly inside omega");
        if (!spec.omega1.valid() || !spec.omega1.strictly_inside(spec.omega0))
            bad.push_back("window nesting violated: omega1 not strictly inside omega0");
        if (!spec.omega2.valid() || !spec.omega2.strictly_inside(spec.omega1))
            bad.push_back("window nesting violated: omega2 not strictly inside omega1");
    }
    if (spec.coeffs.m != spec.m) bad.push_back("coefficient set has wrong equation count");
    if (spec.coeffs.m == spec.m && spec.T > 0.0 && spec.x_hi > spec.x_lo) {
        // ellipticity spot check on a sample lattice over Q_T
        double dmin = std::numeric_limits<double>::infinity();
        for (int l = 0; l < spec.m; ++l)
            for (int it = 0; it <= kConditionSamples; ++it)
                for (int ix = 0; ix <= kConditionSamples; ++ix) {
                    double t = spec.T * it / kConditionSamples;
                    double x = spec.x_lo + (spec.x_hi - spec.x_lo) * ix / kConditionSamples;
                    dmin = std::min(dmin, spec.coeffs.d[l](t, x));
                }
        if (!(dmin > 0.0)) bad.push_back("ellipticity violated: min d_l = " + std::to_string(dmin));
        if (spec.coeffs.is_constant) {
            // spot-check the constancy claim at scattered points
            auto varies = [&](const CoefficientField& f) {
                double ref = f(0.31 * spec.T, spec.x_lo + 0.17 * (spec.x_hi - spec.x_lo));
                for (auto [ft, fx] : {std::pair{0.83, 0.71}, {0.07, 0.93}, {0.55, 0.41}}) {
                    double v = f(ft * spec.T, spec.x_lo + fx * (spec.x_hi - spec.x_lo));
                    if (std::abs(v - ref) > 1e-12 * (1 + std::abs(ref))) return true;
                }
                return false;
            };
            bool any = false;
            for (const auto& f : spec.coeffs.d) any = any || varies(f);
            for (const auto& f : spec.coeffs.g) any = any || varies(f);
            for (const auto& f : spec.coeffs.a) any = any || varies(f);
            if (any) bad.push_back("constant-coefficient flag set but a coefficient varies");
        }
    }
    return bad;
}

// Constant coupling data for the m-equation condition; g entries may be
// N-dimensional vectors (the PDE solves stay 1-D, the check does not).
struct ConstantCouplings {
    int m = 0;
    std::vector<std::vector<std::vector<double>>> g;  // g[i][j] = vector in R^N
    std::vector<std::vector<double>> a;               // a[i][j]

    static ConstantCouplings zeros(int m, int dim = 1) {
        ConstantCouplings c;
        c.m = m;
        c.g.assign(m, std::vector<std::vector<double>>(m, std::vector<double>(dim, 0.0)));
        c.a.assign(m, std::vector<double>(m, 0.0));
        return c;
    }
};

// Smallest column index i0 (0-based, < m-1) whose coupling into the last
// equation is nonzero; absence certifies that the system is NOT null
// controllable (the last equation is decoupled from all controlled ones).
inline std::optional<int> find_i0(const ConstantCouplings& c) {
    for (int j = 0; j + 1 < c.m; ++j) {
        bool g_nonzero = false;
        for (double comp : c.g[c.m - 1][j]) g_nonzero = g_nonzero || comp != 0.0;
        if (g_nonzero || c.a[c.m - 1][j] != 0.0) return j;
    }
    return std::nullopt;
}

inline ConstantCouplings extract_constant_couplings(const CoefficientSet& coeffs) {
    if (!coeffs.is_constant || !coeffs.all_fields_constant())
        throw ConditionError("constant-coefficient condition requires a constant coefficient set");
    ConstantCouplings c = ConstantCouplings::zeros(coeffs.m, 1);
    for (int i = 0; i < coeffs.m; ++i)
        for (int j = 0; j < coeffs.m; ++j) {
            c.g[i][j][0] = coeffs.G(i, j).constant_value();
            c.a[i][j] = coeffs.A(i, j).constant_value();
        }
    return c;
}

inline std::optional<int> find_i0(const CoefficientSet& coeffs) {
    return find_i0(extract_constant_couplings(coeffs));
}

inline void require_window_in_qt(const ProblemSpec& spec, const SpaceTimeWindow& w) {
    if (!w.valid() || w.t0 < 0.0 || w.t1 > spec.T || w.x0 < spec.omega.lo || w.x1 > spec.omega.hi)
        throw ConditionError("working window must lie inside (0,T) x omega");
}

// m=2 zero-order case: g21 vanishes identically on the window and |a21| stays
// above tol_pos there.
inline bool check_condition_case_i(const ProblemSpec& spec, const SpaceTimeWindow& w,
                                   double tol_pos = kTolPos, int samples = kConditionSamples) {
    if (spec.m != 2) throw ConditionError("zero-order coupling condition needs m = 2");
    require_window_in_qt(spec, w);
    const CoefficientField& g21 = spec.coeffs.G(1, 0);
    const CoefficientField& a21 = spec.coeffs.A(1, 0);
    for (int it = 0; it <= samples; ++it)
        for (int ix = 0; ix <= samples; ++ix) {
            double t = w.t0 + (w.t1 - w.t0) * it / samples;
            double x = w.x0 + (w.x1 - w.x0) * ix / samples;
            if (std::abs(g21(t, x)) > tol_pos) return false;
            if (std::abs(a21(t, x)) < tol_pos) return false;
        }
    return true;
}

struct DetConditionReport {
    bool holds = false;
    double min_abs_det = 0.0;
    double argmin_t = 0.0, argmin_x = 0.0;
};

inline DetConditionReport scan_det_condition(const ProblemSpec& spec, const SpaceTimeWindow& w,
                                             double c_bound, int samples = kConditionSamples) {
    if (spec.m != 2) throw ConditionError("determinant condition needs m = 2");
    if (spec.space_dim != 1) throw ConditionError("determinant condition needs space_dim = 1");
    require_window_in_qt(spec, w);
    DetConditionReport rep;
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= samples; ++it)
        for (int ix = 0; ix <= samples; ++ix) {
            double t = w.t0 + (w.t1 - w.t0) * it / samples;
            double x = w.x0 + (w.x1 - w.x0) * ix / samples;
            double dh = std::abs(det_H_numeric(spec.coeffs, t, x));
            if (dh < rep.min_abs_det) {
                rep.min_abs_det = dh;
                rep.argmin_t = t;
                rep.argmin_x = x;
            }
        }
    rep.holds = rep.min_abs_det > c_bound;
    return rep;
}

inline bool check_condition_case_ii(const ProblemSpec& spec, const SpaceTimeWindow& w,
                                    double c_bound, int samples = kConditionSamples) {
    return scan_det_condition(spec, w, c_bound, samples).holds;
}

}  // namespace nullctrl
