// Carleman weight system
//   alpha(t,x) = (exp(12 lam M) - exp(lam(10 M + eta0(x)))) / (t^5 (T-t)^5),
//   xi(t,x)    =  exp(lam(10 M + eta0(x)))                  / (t^5 (T-t)^5),
// with M = max eta0, alpha*(t) = max_x alpha, xi*(t) = min_x xi, and the
// control weight rho = xi^p exp(-2 s0 alpha) (p = 7 for the constant
// -coefficient mode, 9 for the two-equation variable mode).
//
// eta0 is positive inside the domain, zero at both ends, and its gradient is
// bounded below outside the innermost window omega2. In 1-D we use the quartic
//   eta0(x) = 2 int_a^x (c - s)(1 + q (s-c)^2) ds,
// whose only critical point is the midpoint c of omega2; q is fixed by
// eta0(b) = 0 and the construction degenerates to (x-a)(b-x) for centered c.
//
// alpha and xi blow up at t = 0 and t = T; profiles are only evaluated at
// interior times, and exp(-2 s alpha) is computed in log space with the
// product xi^p exp(-2 s0 alpha) clamped to exact zero on underflow (so
// controls vanish identically near the time endpoints).

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "discretize.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace nullctrl {

struct WeightError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Polynomial spatial profile of degree at most four,
//   eta0(x) = 2 int_a^x (c - s) w(s - c) ds,   w(u) = 1 + p u + q u^2,
// zero at both ends (one linear condition on (p, q)), positive inside, and
// with the single critical point c as long as w > 0 on [a, b]. The even
// correction (p = 0) degenerates to (x - a)(b - x) for a centered window;
// when it loses positivity for strongly off-center windows, the odd cubic
// correction (q = 0) takes over.
struct Eta0 {
    double a = 0.0, b = 1.0;  // domain ends
    double c = 0.5;           // critical point = midpoint of omega2
    double p = 0.0, q = 0.0;

    double operator()(double x) const {
        auto F = [&](double s) {
            double u = s - c;
            return -(0.5 * u * u + p * u * u * u / 3.0 + 0.25 * q * u * u * u * u);
        };
        return 2.0 * (F(x) - F(a));
    }
    double deriv(double x) const {
        double u = x - c;
        return -2.0 * u * (1.0 + p * u + q * u * u);
    }
    double second_deriv(double x) const {
        double u = x - c;
        return -2.0 * (1.0 + 2.0 * p * u + 3.0 * q * u * u);
    }
    double max_value() const { return (*this)(c); }
};

struct Eta0Result {
    Eta0 eta0;
    double kappa = 0.0;  // min |eta0'| outside omega2
};

inline Eta0Result build_eta0(double x_lo, double x_hi, const Window& omega2) {
    if (!(omega2.lo > x_lo) || !(omega2.hi < x_hi))
        throw WeightError("omega2 must be strictly interior to the domain");
    Eta0 e;
    e.a = x_lo;
    e.b = x_hi;
    e.c = omega2.mid();
    // eta0(b) = 0 requires i1 + p i2 + q i3 = 0 with i_k = int_a^b (s-c)^k ds
    double ub = e.b - e.c, ua = e.a - e.c;
    double i1 = 0.5 * (ub * ub - ua * ua);
    double i2 = (ub * ub * ub - ua * ua * ua) / 3.0;
    double i3 = 0.25 * (ub * ub * ub * ub - ua * ua * ua * ua);
    double umax2 = std::max(ua * ua, ub * ub);
    e.p = 0.0;
    e.q = (i3 != 0.0) ? -i1 / i3 : 0.0;
    if (1.0 + e.q * umax2 <= 0.0) {
        e.q = 0.0;
        e.p = (i2 != 0.0) ? -i1 / i2 : 0.0;
        if (1.0 + e.p * ua <= 0.0 || 1.0 + e.p * ub <= 0.0)
            throw WeightError("omega2 too close to the boundary for a polynomial profile");
    }

    // kappa: check the outside-interval endpoints and any stationary point of
    // eta0' (root of 1 + 2 p u + 3 q u^2 = 0) that falls outside omega2
    double kappa = std::numeric_limits<double>::infinity();
    auto consider = [&](double x) {
        if (x < e.a || x > e.b) return;
        if (x > omega2.lo && x < omega2.hi) return;
        kappa = std::min(kappa, std::abs(e.deriv(x)));
    };
    consider(omega2.lo);
    consider(omega2.hi);
    consider(e.a);
    consider(e.b);
    double disc = e.p * e.p - 3.0 * e.q;
    if (e.q != 0.0 && disc >= 0.0) {
        for (double sgn : {-1.0, 1.0})
            consider(e.c + (-e.p + sgn * std::sqrt(disc)) / (3.0 * e.q));
    } else if (e.q == 0.0 && e.p != 0.0) {
        consider(e.c - 1.0 / (2.0 * e.p));
    }
    if (!(kappa > 0.0)) throw WeightError("eta0 gradient bound failed outside omega2");
    return {e, kappa};
}

inline std::pair<double, double> default_s_lambda(double T, double c_cal = 1.0) {
    if (!(T > 0.0)) throw WeightError("default_s_lambda needs T > 0");
    double s0 = c_cal * (std::pow(T, 5) + std::pow(T, 10));
    return {s0, c_cal};
}

// s chosen so that 2 s alpha ~= target_exponent at the mid-time center of the
// innermost window; keeps exp(-2 s alpha) spanning a usable floating-point
// range for any horizon (alpha grows like (T/2)^{-10}).
inline double auto_s(const Eta0Result& eta, double lambda, double T,
                     double target_exponent = 30.0) {
    double num = std::exp(12.0 * lambda * eta.eta0.max_value()) -
                 std::exp(lambda * (10.0 * eta.eta0.max_value() + eta.eta0.max_value()));
    double den = std::pow(T / 2, 5) * std::pow(T / 2, 5);
    double alpha_mid = num / den;
    if (!(alpha_mid > 0.0)) throw WeightError("degenerate weight profile");
    return target_exponent / (2.0 * alpha_mid);
}

struct WeightProfile {
    Eta0 eta0;
    double kappa = 0.0;
    double lambda = 1.0;
    double s = 1.0;
    double s0 = 1.0;  // reference value used inside rho
    int p = 7;        // rho exponent: 7 or 9 depending on mode, never inferred
    double T = 1.0;
    double eta_max = 0.0;

    // sampled on the grid (interior time nodes only; row n-1 is t = n*tau)
    Grid grid;
    std::vector<double> alpha_s, xi_s;        // [(n-1)*(nx+2) + i], i includes boundary columns
    std::vector<double> alpha_star_s, xi_star_s;  // per interior time node
    std::vector<double> rho_s;

    double alpha(double t, double x) const {
        check_interior(t);
        double num = std::exp(12.0 * lambda * eta_max) -
                     std::exp(lambda * (10.0 * eta_max + eta0(x)));
        return num / time_den(t);
    }
    double xi(double t, double x) const {
        check_interior(t);
        return std::exp(lambda * (10.0 * eta_max + eta0(x))) / time_den(t);
    }
    double alpha_star(double t) const {  // max over x: attained where eta0 = 0
        check_interior(t);
        return (std::exp(12.0 * lambda * eta_max) - std::exp(10.0 * lambda * eta_max)) / time_den(t);
    }
    double xi_star(double t) const {  // min over x: attained where eta0 = 0
        check_interior(t);
        return std::exp(10.0 * lambda * eta_max) / time_den(t);
    }

    // exp(-2 s alpha), log-space, clamped below at 1e-300
    double exp_weight(double t, double x) const {
        double e = -2.0 * s * alpha(t, x);
        return (e < -690.0) ? 1e-300 : std::exp(e);
    }

    // rho = xi^p exp(-2 s0 alpha); exact zero at t in {0, T} and on underflow
    double rho(double t, double x) const {
        if (t <= 0.0 || t >= T) return 0.0;
        double lr = p * std::log(xi(t, x)) - 2.0 * s0 * alpha(t, x);
        return (lr < -690.0) ? 0.0 : std::exp(lr);
    }

    // log of the grid maximum of rho, computed without forming rho (safe for
    // any s); the normalization used wherever rho must stay in floating-point
    // range (control characterization, observability diagnostics)
    double log_rho_max = -std::numeric_limits<double>::infinity();

    // rho / max(rho), exact zero at the time endpoints and on underflow
    double rho_hat(double t, double x) const {
        if (t <= 0.0 || t >= T) return 0.0;
        double lr = p * std::log(xi(t, x)) - 2.0 * s0 * alpha(t, x) - log_rho_max;
        return (lr < -690.0) ? 0.0 : std::exp(lr);
    }

private:
    void check_interior(double t) const {
        if (!(t > 0.0) || !(t < T))
            throw WeightError("weights are singular at t = 0 and t = T; evaluate at interior times");
    }
    double time_den(double t) const { return std::pow(t, 5) * std::pow(T - t, 5); }
};

inline WeightProfile build_weights(const Eta0Result& eta, double lambda, double s,
                                   const Grid& grid, int p) {
    if (!(lambda > 0.0) || !(s > 0.0)) throw WeightError("build_weights needs lambda, s > 0");
    if (p != 7 && p != 9) throw WeightError("rho exponent must be 7 or 9");
    WeightProfile w;
    w.eta0 = eta.eta0;
    w.kappa = eta.kappa;
    w.lambda = lambda;
    w.s = s;
    w.s0 = s;
    w.p = p;
    w.T = grid.T;
    w.eta_max = eta.eta0.max_value();
    w.grid = grid;
    int nxx = grid.nx + 2;
    w.alpha_s.assign(static_cast<size_t>(grid.nt - 1) * nxx, 0.0);
    w.xi_s.assign(static_cast<size_t>(grid.nt - 1) * nxx, 0.0);
    w.rho_s.assign(static_cast<size_t>(grid.nt - 1) * nxx, 0.0);
    w.alpha_star_s.assign(grid.nt - 1, 0.0);
    w.xi_star_s.assign(grid.nt - 1, 0.0);
    for (int n = 1; n < grid.nt; ++n) {
        double t = grid.t(n);
        double amax = -std::numeric_limits<double>::infinity();
        double xmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nxx; ++i) {
            double x = grid.x(i);
            double av = w.alpha(t, x), xv = w.xi(t, x);
            w.alpha_s[static_cast<size_t>(n - 1) * nxx + i] = av;
            w.xi_s[static_cast<size_t>(n - 1) * nxx + i] = xv;
            w.rho_s[static_cast<size_t>(n - 1) * nxx + i] = w.rho(t, x);
            w.log_rho_max = std::max(w.log_rho_max, p * std::log(xv) - 2.0 * s * av);
            amax = std::max(amax, av);
            xmin = std::min(xmin, xv);
        }
        w.alpha_star_s[n - 1] = amax;
        w.xi_star_s[n - 1] = xmin;
    }
    return w;
}

// I(s,lam;u) = s^3 lam^4 iint e^{-2 s alpha} xi^3 |u|^2
//            + s lam^2  iint e^{-2 s alpha} xi   |grad u|^2,
// interior time slices only, centered gradient with Dirichlet closure.
inline double carleman_functional(const WeightProfile& w, const Trajectory& u) {
    const Grid& g = u.grid;
    double s3l4 = std::pow(w.s, 3) * std::pow(w.lambda, 4);
    double sl2 = w.s * w.lambda * w.lambda;
    double acc = 0.0;
    for (int n = 1; n < g.nt; ++n) {
        double t = g.t(n);
        for (int c = 0; c < u.m; ++c)
            for (int i = 0; i < g.nx; ++i) {
                double x = g.xi(i);
                double ew = w.exp_weight(t, x);
                double xv = w.xi(t, x);
                double uv = u.at(n).at(c, i);
                double um = (i > 0) ? u.at(n).at(c, i - 1) : 0.0;
                double up = (i < g.nx - 1) ? u.at(n).at(c, i + 1) : 0.0;
                double ux = (up - um) / (2 * g.h);
                acc += g.tau * g.h * ew * (s3l4 * xv * xv * xv * uv * uv + sl2 * xv * ux * ux);
            }
    }
    return acc;
}

// One observability sample: ratio ||psi(0)||^2 / (weighted window observation)
struct ObsSample {
    double ratio = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool denominator_zero = false;
};

enum class ObsMode {
    coupling_operator,  // observe |N* psi|^2 over omega0 with xi^7 weight
    direct              // observe |psi|^2 over omega1 with xi^9 weight
};

// N* psi = (g . grad - a) psi componentwise, centered differences; used by the
// coupling-operator observability diagnostic (constant g, a).
inline GridFunction apply_nstar_pointwise(const GridFunction& psi, double g_coef, double a_coef,
                                          double h) {
    GridFunction out(psi.m, psi.nx);
    for (int c = 0; c < psi.m; ++c)
        for (int i = 0; i < psi.nx; ++i) {
            double pm = (i > 0) ? psi.at(c, i - 1) : 0.0;
            double pp = (i < psi.nx - 1) ? psi.at(c, i + 1) : 0.0;
            out.at(c, i) = g_coef * (pp - pm) / (2 * h) - a_coef * psi.at(c, i);
        }
    return out;
}

inline std::vector<ObsSample> observability_ratio(const ProblemSpec& spec, const Grid& grid,
                                                  const WeightProfile& w, ObsMode mode,
                                                  const std::vector<GridFunction>& terminal_samples,
                                                  double g_coef = 0.0, double a_coef = 0.0) {
    ParabolicSolver solver(spec.coeffs, grid);
    const Window& win = (mode == ObsMode::coupling_operator) ? spec.omega0 : spec.omega1;
    int pw = (mode == ObsMode::coupling_operator) ? 7 : 9;
    std::vector<ObsSample> out;
    out.reserve(terminal_samples.size());
    if (pw != w.p) throw WeightError("observability mode does not match the profile exponent");
    for (const GridFunction& psiT : terminal_samples) {
        AdjointSolution adj = solver.adjoint(psiT);
        ObsSample s;
        s.numerator = dot_h(adj.psi.at(0), adj.psi.at(0), grid.h);
        double den = 0.0;
        for (int n = 1; n < grid.nt; ++n) {
            double t = grid.t(n);
            GridFunction obs = (mode == ObsMode::coupling_operator)
                                   ? apply_nstar_pointwise(adj.psi.at(n), g_coef, a_coef, grid.h)
                                   : adj.psi.at(n);
            for (int c = 0; c < obs.m; ++c)
                for (int i = 0; i < grid.nx; ++i) {
                    double x = grid.xi(i);
                    if (!win.contains(x)) continue;
                    // weight normalized by max rho so the quadrature stays in range
                    den += grid.tau * grid.h * w.rho_hat(t, x) * obs.at(c, i) * obs.at(c, i);
                }
        }
        s.denominator = den;
        if (den > 0.0) {
            s.ratio = s.numerator / den;
        } else {
            s.denominator_zero = true;
            s.ratio = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace nullctrl
