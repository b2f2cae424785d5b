#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nullctrl/algebraic.hpp>
#include "test_helpers.hpp"

#include <random>

using namespace nullctrl;
using namespace testutil;

namespace {

// hard-coded 6x6 template, written against the matrix display rather than
// through build_H (structural cross-check)
Mat6 hardcoded_H(const CouplingDerivatives& v) {
    Mat6 H{};
    double a21 = v.a21, g21 = v.g21;
    H[0][0] = -a21 + v.g21_x;                 H[0][1] = g21;
    H[1][0] = -v.a21_x + v.g21_xx;            H[1][1] = -a21 + 2 * v.g21_x;   H[1][3] = g21;
    H[2][0] = -v.a21_t + v.g21_tx;            H[2][1] = v.g21_t;
    H[2][2] = -a21 + v.g21_x;                 H[2][4] = g21;
    H[3][0] = -v.a21_xx + v.g21_xxx;          H[3][1] = -2 * v.a21_x + 3 * v.g21_xx;
    H[3][3] = -a21 + 3 * v.g21_x;             H[3][5] = g21;
    H[4][0] = -v.a22 + v.g22_x;               H[4][1] = v.g22 - v.d2_x;
    H[4][2] = -1;                             H[4][3] = -v.d2;
    H[5][0] = -v.a22_x + v.g22_xx;            H[5][1] = -v.a22 + 2 * v.g22_x - v.d2_xx;
    H[5][3] = v.g22 - 2 * v.d2_x;             H[5][4] = -1;                   H[5][5] = -v.d2;
    return H;
}

// smooth analytic two-component test field
struct Phi2 {
    Expr p1 = Expr::parse("sin(2*x + t) + 0.3*x*x");
    Expr p2 = Expr::parse("cos(3*x)*exp(-0.5*t)");
    double operator()(int c, double t, double x) const { return c == 0 ? p1(t, x) : p2(t, x); }
};

}  // namespace

TEST_CASE("H matrix matches the hard-coded template entry by entry") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        CoefficientSet c = random_smooth_bundle(rng);
        std::uniform_real_distribution<double> U(0.1, 0.9);
        double t = U(rng), x = U(rng);
        auto v = CouplingDerivatives::eval(c, t, x);
        Mat6 a = build_H(v), b = hardcoded_H(v);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(a[i][j] == b[i][j]);
    }
}

TEST_CASE("derivative-stack matrix: identity first row, H block, determinant relation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        CoefficientSet c = random_smooth_bundle(rng);
        std::uniform_real_distribution<double> U(0.1, 0.9);
        double t = U(rng), x = U(rng);
        auto v = CouplingDerivatives::eval(c, t, x);
        Mat7 M = build_derivative_stack_matrix(v);
        CHECK(M[0][0] == 1.0);
        for (int j = 1; j < 7; ++j) {
            CHECK(M[0][j] == 0.0);
            CHECK(M[j][0] == 0.0);
        }
        Mat6 H = build_H(v);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(M[i + 1][j + 1] == H[i][j]);
        // the block determinant carries one factor g21 relative to det_H
        double block = det6(H);
        double want = v.g21 * det_H_numeric(c, t, x);
        CHECK(block == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("determinant routes agree: LU vs explicit expansion, 100 random bundles") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
        CoefficientSet c = random_smooth_bundle(rng);
        double t = U(rng), x = U(rng);
        double dn = det_H_numeric(c, t, x);
        double de = det_H_explicit(c, t, x);
        CHECK(std::abs(dn - de) <= 1e-10 * std::max({1.0, std::abs(dn), std::abs(de)}));
    }
}

TEST_CASE("closed-form reductions of the determinant") {
    // g21 = kappa = 2 constant, a21 = 0, a22 = x, g22 = 0, d2 = 1:
    // only kappa^3 (dx a22 - dxx g22) survives -> 8
    ProblemSpec kap = benchmark_variable();
    CHECK(det_H_numeric(kap.coeffs, 0.3, 0.45) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(det_H_explicit(kap.coeffs, 0.3, 0.45) == doctest::Approx(8.0).epsilon(1e-12));

    // time-only coefficients: g21 (g21 dt a21 - a21 dt g21) = (1+t) -> 1.5 at t = 0.5
    CoefficientSet c(2);
    c.d[0] = CoefficientField(1.0);
    c.d[1] = CoefficientField(1.0);
    c.G(1, 0) = CoefficientField::from_expression("1 + t", 3, 7);
    c.A(1, 0) = CoefficientField::from_expression("t", 3, 7);
    CHECK(det_H_numeric(c, 0.5, 0.2) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(det_H_explicit(c, 0.5, 0.2) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("every operator is linear and kills zero") {
    std::mt19937_64 rng(9);
    CoefficientSet c = benchmark_variable().coeffs;
    Grid g(20, 20, 0.0, 1.0, 1.0);
    auto check_op = [&](const DiffOperator& op) {
        SampledField zero(g, op.in_arity);
        SampledField oz = op.apply(zero);
        CHECK(field_max_abs(oz) == 0.0);
        std::normal_distribution<double> N;
        SampledField a(g, op.in_arity), b(g, op.in_arity);
        for (auto& v : a.data) v = N(rng);
        for (auto& v : b.data) v = N(rng);
        double al = 0.7, be = -1.3;
        SampledField lin(g, op.in_arity);
        for (size_t k = 0; k < lin.data.size(); ++k) lin.data[k] = al * a.data[k] + be * b.data[k];
        SampledField left = op.apply(lin);
        SampledField ra = op.apply(a), rb = op.apply(b);
        double worst = 0;
        for (int cc = 0; cc < op.out_arity; ++cc)
            for (int n = left.t_lo; n <= left.t_hi; ++n)
                for (int i = left.x_lo; i <= left.x_hi; ++i)
                    worst = std::max(worst, std::abs(left.at(cc, n, i) - al * ra.at(cc, n, i) -
                                                     be * rb.at(cc, n, i)));
        double scale = std::max(field_max_abs(ra), field_max_abs(rb));
        CHECK(worst <= 1e-11 * std::max(1.0, scale));
    };
    check_op(op_L(c));
    check_op(op_L_star(c));
    check_op(op_R1(c));
    check_op(op_N(0, benchmark_constant().coeffs));
    check_op(build_reduction_constant(0, benchmark_constant().coeffs));
}

TEST_CASE("coupling source operator on closed forms") {
    // g = 0, a = 1: N f = -f
    CoefficientSet c(2);
    c.d[0] = CoefficientField(1.0);
    c.d[1] = CoefficientField(1.0);
    c.A(1, 0) = CoefficientField(1.0);
    c.is_constant = true;
    Grid g(30, 10, 0.0, 1.0, 1.0);
    DiffOperator N = op_N(0, c);
    SampledField f = SampledField::sample(g, 2, [](int cc, double t, double x) {
        return std::sin((cc + 1) * x) + t;
    });
    SampledField nf = N.apply(f);
    for (int cc = 0; cc < 2; ++cc)
        for (int n = nf.t_lo; n <= nf.t_hi; ++n)
            for (int i = nf.x_lo; i <= nf.x_hi; ++i)
                CHECK(nf.at(cc, n, i) == doctest::Approx(-f.at(cc, n, i)).epsilon(1e-14));

    // g = 1, a = 0 on sin(pi x): N f = -pi cos(pi x) + O(h^2)
    CoefficientSet cg(2);
    cg.d[0] = CoefficientField(1.0);
    cg.d[1] = CoefficientField(1.0);
    cg.G(1, 0) = CoefficientField(1.0);
    cg.is_constant = true;
    DiffOperator Ng = op_N(0, cg);
    SampledField fs = SampledField::sample(g, 2, [](int, double, double x) {
        return std::sin(M_PI * x);
    });
    SampledField ns = Ng.apply(fs);
    for (int i = ns.x_lo; i <= ns.x_hi; ++i) {
        double want = -M_PI * std::cos(M_PI * g.x(i));
        CHECK(ns.at(0, 4, i) == doctest::Approx(want).epsilon(2e-3));
    }
}

TEST_CASE("residual operator vanishes on an exact controlled solution") {
    // z = (e^{-pi^2 d1 t} sin(pi x), 0), v chosen as the residual closer:
    // with the second row forced by the coupling this is easiest checked by
    // feeding the manufactured z through L and matching the known closed form
    CoefficientSet c = benchmark_constant().coeffs;  // a21 = 1 coupling
    Grid g(80, 160, 0.0, 1.0, 0.3);
    SampledField zv(g, 3);
    for (int n = 0; n <= g.nt; ++n)
        for (int i = 0; i <= g.nx + 1; ++i) {
            double t = g.t(n), x = g.x(i);
            double z1 = std::exp(-M_PI * M_PI * t) * std::sin(M_PI * x);
            zv.at(0, n, i) = z1;
            zv.at(1, n, i) = 0.0;
            zv.at(2, n, i) = 0.0;  // v = 0: row 1 is exactly the heat equation
        }
    DiffOperator L = op_L(c);
    SampledField r = L.apply(zv);
    // row 0: dt z1 - dxx z1 - v = 0 up to O(h^2 + tau^2)
    // row 1: -a21 z1, nonzero by construction
    double worst0 = 0.0;
    for (int n = r.t_lo; n <= r.t_hi; ++n)
        for (int i = r.x_lo; i <= r.x_hi; ++i) worst0 = std::max(worst0, std::abs(r.at(0, n, i)));
    CHECK(worst0 < 5e-3);
    CHECK(std::abs(r.at(1, g.nt / 2, g.nx / 2) +
                   zv.at(0, g.nt / 2, g.nx / 2)) < 1e-12);  // row 1 = -z1
    // L(0,0) = 0
    SampledField zero(g, 3);
    CHECK(field_max_abs(L.apply(zero)) == 0.0);
}

TEST_CASE("adjoint pair: <L(z,v), phi> = <z, (L*phi)_z> - <v, (L*phi)_v>") {
    // the discrete residual adjoint is the exact transpose of the residual
    // operator up to the sign of the control block, so on compactly supported
    // fields the pairing identity holds at roundoff on every grid
    CoefficientSet c = benchmark_zero_order().coeffs;
    std::vector<double> hs, errs;
    for (int nx : {50, 100, 200}) {
        Grid g(nx, nx, 0.0, 1.0, 0.5);
        // compactly supported smooth fields: sin^6 packets vanish to high
        // order at the window edges, zero outside
        auto packet = [&](double t, double x, double w1, double w2) {
            if (x <= 0.15 || x >= 0.85 || t <= 0.1 * g.T || t >= 0.9 * g.T) return 0.0;
            double sx = std::sin(M_PI * (x - 0.15) / 0.7);
            double st = std::sin(M_PI * (t - 0.1 * g.T) / (0.8 * g.T));
            return std::pow(sx, 6) * std::pow(st, 6) * std::cos(w1 * x + w2 * t);
        };
        SampledField zv(g, 3), phi(g, 2);
        for (int n = 0; n <= g.nt; ++n)
            for (int i = 0; i <= g.nx + 1; ++i) {
                double t = g.t(n), x = g.x(i);
                zv.at(0, n, i) = packet(t, x, 3.0, 1.0);
                zv.at(1, n, i) = packet(t, x, 2.0, -1.5);
                zv.at(2, n, i) = packet(t, x, 1.0, 2.0);
                phi.at(0, n, i) = packet(t, x, -2.0, 0.5);
                phi.at(1, n, i) = packet(t, x, 4.0, -0.5);
            }
        zv.compact_support = true;
        phi.compact_support = true;
        DiffOperator L = op_L(c), Lstar = op_L_star(c);
        SampledField Lzv = L.apply(zv), Lsphi = Lstar.apply(phi);
        double lhs = 0, rhs = 0;
        for (int n = 0; n <= g.nt; ++n)
            for (int i = 1; i <= g.nx; ++i) {
                for (int cc = 0; cc < 2; ++cc) lhs += g.tau * g.h * Lzv.at(cc, n, i) * phi.at(cc, n, i);
                for (int cc = 0; cc < 2; ++cc) rhs += g.tau * g.h * zv.at(cc, n, i) * Lsphi.at(cc, n, i);
                rhs -= g.tau * g.h * zv.at(2, n, i) * Lsphi.at(2, n, i);  // control block sign
            }
        hs.push_back(g.h);
        errs.push_back(std::abs(lhs - rhs));
    }
    for (double e : errs) CHECK(e <= 1e-12);
}

TEST_CASE("constant reduction: L(Mf) = Nf at machine precision, m = 2 and 3") {
    for (int m : {2, 3}) {
        CoefficientSet c(m);
        c.is_constant = true;
        for (int l = 0; l < m; ++l) c.d[l] = CoefficientField(0.6 + 0.2 * l);
        c.A(m - 1, 0) = CoefficientField(1.3);
        c.G(m - 1, 0) = CoefficientField(0.4);
        c.A(0, 0) = CoefficientField(-0.5);
        if (m == 3) c.G(1, 0) = CoefficientField(0.2);
        Grid g(24, 24, 0.0, 1.0, 1.0);
        DiffOperator M = build_reduction_constant(0, c);
        DiffOperator L = op_L(c);
        DiffOperator N = op_N(0, c);
        SampledField f = SampledField::sample(g, m, [](int cc, double t, double x) {
            return std::sin((cc + 1) * 3.0 * x) * std::exp(-t) + x * t;
        });
        SampledField lmf = L.apply(M.apply(f));
        SampledField nf = N.apply(f);
        CHECK(field_l2_diff(lmf, nf) <= 1e-12);
    }
}

TEST_CASE("constant reduction on polynomials against the analytic source") {
    // degree <= 2 in x, <= 1 in t: stencils are exact, so the residual against
    // the analytically differentiated source is at roundoff
    CoefficientSet c(2);
    c.is_constant = true;
    c.d[0] = CoefficientField(0.9);
    c.d[1] = CoefficientField(1.1);
    c.G(1, 0) = CoefficientField(0.7);
    c.A(1, 0) = CoefficientField(1.2);
    c.A(0, 1) = CoefficientField(0.5);
    AnalyticField f;
    f.comps.push_back(Expr::parse("1 + 2*x + 0.5*x*x + t*(0.3 + 0.1*x)"));
    f.comps.push_back(Expr::parse("0.4 - x + 0.8*x*x + 0.2*t"));
    auto rep = verify_reduction_identity(ReductionMode::constant_coefficients, c, 0, f,
                                         {16, 32}, 0.0, 1.0, 1.0);
    for (double r : rep.residuals) CHECK(r <= 1e-12);
    CHECK(rep.exact);
}

TEST_CASE("constant reduction: refinement order against the analytic source") {
    CoefficientSet c(2);
    c.is_constant = true;
    c.d[0] = CoefficientField(1.0);
    c.d[1] = CoefficientField(1.0);
    c.G(1, 0) = CoefficientField(1.0);  // first-order coupling makes the route h-dependent
    c.A(1, 0) = CoefficientField(0.5);
    AnalyticField f;
    f.comps.push_back(Expr::parse("sin(2*x + t)"));
    f.comps.push_back(Expr::parse("cos(3*x)*exp(-t)"));
    auto rep = verify_reduction_identity(ReductionMode::constant_coefficients, c, 0, f,
                                         {64, 128, 256}, 0.0, 1.0, 1.0);
    CHECK_FALSE(rep.exact);
    CHECK(rep.fitted_order > 1.7);
    CHECK(rep.fitted_order < 2.3);

    // three equations, coupling into the last through column 1
    CoefficientSet c3(3);
    c3.is_constant = true;
    for (int l = 0; l < 3; ++l) c3.d[l] = CoefficientField(1.0);
    c3.G(2, 0) = CoefficientField(0.8);
    c3.A(2, 0) = CoefficientField(1.0);
    c3.A(1, 0) = CoefficientField(0.4);
    AnalyticField f3 = f;
    f3.comps.push_back(Expr::parse("sin(4*x)*exp(-2*t)"));
    auto rep3 = verify_reduction_identity(ReductionMode::constant_coefficients, c3, 0, f3,
                                          {64, 128, 256}, 0.0, 1.0, 1.0);
    CHECK_FALSE(rep3.exact);
    CHECK(rep3.fitted_order > 1.7);
    CHECK(rep3.fitted_order < 2.3);
}

TEST_CASE("constant-mode adjoint pair: M* composed with L* reproduces N*") {
    // the adjoint-side identity behind the construction, at stencil level
    for (int m : {2, 3}) {
        CoefficientSet c(m);
        c.is_constant = true;
        for (int l = 0; l < m; ++l) c.d[l] = CoefficientField(0.8 + 0.1 * l);
        c.G(m - 1, 0) = CoefficientField(0.6);
        c.A(m - 1, 0) = CoefficientField(1.1);
        c.A(0, 0) = CoefficientField(-0.2);
        if (m == 3) c.G(1, 0) = CoefficientField(0.3);
        Grid g(24, 24, 0.0, 1.0, 1.0);
        DiffOperator Lstar = op_L_star(c);
        DiffOperator Mstar = build_Mstar_constant(0, c);
        SampledField phi = SampledField::sample(g, m, [](int cc, double t, double x) {
            return std::sin((cc + 2) * x) * std::exp(-0.4 * t) + x * t * t;
        });
        SampledField got = Mstar.apply(Lstar.apply(phi));
        // N* phi = (g d/dx - a) phi componentwise with the same stencils
        double gm = c.G(m - 1, 0).constant_value(), am = c.A(m - 1, 0).constant_value();
        DiffOperator Nstar(m, m, "nstar");
        for (int j = 0; j < m; ++j) {
            Nstar.add(CoefficientField(gm), 0, 1, j, j);
            Nstar.add(CoefficientField(-am), 0, 0, j, j);
        }
        SampledField want = Nstar.apply(phi);
        CHECK(field_l2_diff(got, want) <= 1e-12);
    }
}

TEST_CASE("zero-order reduction: M* L* is the identity at stencil level") {
    CoefficientSet c = benchmark_zero_order().coeffs;
    Grid g(30, 30, 0.0, 1.0, 1.0);
    DiffOperator Lstar = op_L_star(c);
    ZeroOrderReduction red(c);
    Phi2 phi;
    SampledField ph = SampledField::sample(g, 2, [&](int cc, double t, double x) {
        return phi(cc, t, x);
    });
    SampledField got = red.apply_star(Lstar.apply(ph));
    SampledField want = ph;
    want.t_lo = got.t_lo; want.t_hi = got.t_hi; want.x_lo = got.x_lo; want.x_hi = got.x_hi;
    CHECK(field_l2_diff(got, want) <= 1e-12);

    // zero in, zero out
    SampledField zero(g, 3);
    CHECK(field_max_abs(red.apply_star(zero)) == 0.0);
    CHECK(field_max_abs(red.apply(SampledField(g, 2))) == 0.0);

    // constant-coefficient display: M*(psi1, 0, psi3) = (psi3, -psi1 - dt psi3 - dxx psi3)
    CoefficientSet cc(2);
    cc.d[0] = CoefficientField(1.0);
    cc.d[1] = CoefficientField(1.0);
    cc.A(1, 0) = CoefficientField(1.0);
    ZeroOrderReduction red2(cc);
    SampledField psi(g, 3);
    for (int n = 0; n <= g.nt; ++n)
        for (int i = 0; i <= g.nx + 1; ++i) {
            double t = g.t(n), x = g.x(i);
            psi.at(0, n, i) = std::sin(2 * x) * t;
            psi.at(2, n, i) = std::cos(x) * (1 + t * t);
        }
    SampledField out = red2.apply_star(psi);
    for (int n = out.t_lo; n <= out.t_hi; ++n)
        for (int i = out.x_lo; i <= out.x_hi; ++i) {
            double t = g.t(n), x = g.x(i);
            CHECK(out.at(0, n, i) == doctest::Approx(std::cos(x) * (1 + t * t)).epsilon(1e-12));
            double dt3 = std::cos(x) * 2 * t;
            double dxx3 = -std::cos(x) * (1 + t * t);
            double want2 = -(std::sin(2 * x) * t) - dt3 - dxx3;
            CHECK(out.at(1, n, i) == doctest::Approx(want2).epsilon(2e-3));  // stencil accuracy
        }

    // a21 falling below the tolerance at an evaluated node is rejected
    CoefficientSet bad = c;
    bad.A(1, 0) = CoefficientField::from_expression("x - 0.5", 3, 7);
    ZeroOrderReduction redbad(bad, /*tol_pos=*/0.05);
    CHECK_THROWS_AS(redbad.apply_star(Lstar.apply(ph)), ConditionError);
}

TEST_CASE("zero-order reduction: convergence of the analytic-adjoint route") {
    CoefficientSet c = benchmark_zero_order().coeffs;
    AnalyticField f;
    f.comps.push_back(Expr::parse("sin(2*x + t)"));
    f.comps.push_back(Expr::parse("cos(3*x)*exp(-t)"));
    auto rep = verify_reduction_identity(ReductionMode::zero_order_coupling, c, 0, f,
                                         {64, 128, 256}, 0.0, 1.0, 1.0);
    CHECK_FALSE(rep.exact);
    CHECK(rep.fitted_order > 1.7);
    CHECK(rep.fitted_order < 2.3);
}

TEST_CASE("stacked-operator rows equal the matrix times the derivative stack") {
    // two independent evaluation paths for Q(phi): the closed-form rows and
    // M(t,x) applied to the analytic derivative stack
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.15, 0.85);
    Phi2 phi;
    for (int trial = 0; trial < 40; ++trial) {
        CoefficientSet c = random_smooth_bundle(rng);
        double t = U(rng), x = U(rng);
        auto v = CouplingDerivatives::eval(c, t, x);
        double p1 = phi.p1(t, x);
        double p2 = phi.p2(t, x);
        double p2x = phi.p2.derivative(0, 1)(t, x);
        double p2t = phi.p2.derivative(1, 0)(t, x);
        double p2xx = phi.p2.derivative(0, 2)(t, x);
        double p2xt = phi.p2.derivative(1, 1)(t, x);
        double p2xxx = phi.p2.derivative(0, 3)(t, x);
        // closed-form rows
        double q[7];
        q[0] = p1;
        q[1] = (-v.a21 + v.g21_x) * p2 + v.g21 * p2x;
        q[2] = (-v.a21_x + v.g21_xx) * p2 + (-v.a21 + 2 * v.g21_x) * p2x + v.g21 * p2xx;
        q[3] = (-v.a21_t + v.g21_tx) * p2 + v.g21_t * p2x + (-v.a21 + v.g21_x) * p2t +
               v.g21 * p2xt;
        q[4] = (-v.a21_xx + v.g21_xxx) * p2 + (-2 * v.a21_x + 3 * v.g21_xx) * p2x +
               (-v.a21 + 3 * v.g21_x) * p2xx + v.g21 * p2xxx;
        q[5] = (-v.a22 + v.g22_x) * p2 + (-v.d2_x + v.g22) * p2x - p2t - v.d2 * p2xx;
        q[6] = (-v.a22_x + v.g22_xx) * p2 + (-v.d2_xx - v.a22 + 2 * v.g22_x) * p2x +
               (-2 * v.d2_x + v.g22) * p2xx - p2xt - v.d2 * p2xxx;
        // matrix route
        Mat7 M = build_derivative_stack_matrix(v);
        double stack[7] = {p1, p2, p2x, p2t, p2xx, p2xt, p2xxx};
        for (int r = 0; r < 7; ++r) {
            double mr = 0;
            for (int cc = 0; cc < 7; ++cc) mr += M[r][cc] * stack[cc];
            CHECK(std::abs(mr - q[r]) <= 1e-10 * std::max(1.0, std::abs(q[r])));
        }
    }
}

TEST_CASE("derivative-stack reduction: polynomial exactness within stencil range") {
    CoefficientSet c = benchmark_variable().coeffs;  // det H = 8 everywhere
    Grid g(24, 24, 0.0, 1.0, 1.0);
    DiffOperator Lstar = op_L_star(c);
    DerivativeStackReduction red(c);
    // phi1 quadratic in x, phi2 linear in x: all stencil applications exact
    SampledField ph = SampledField::sample(g, 2, [](int cc, double t, double x) {
        return cc == 0 ? (1.0 + 2.0 * x + 0.5 * x * x) * (1.0 - 0.3 * t)
                       : (0.7 + 1.1 * x) * (0.4 + t);
    });
    SampledField got = red.apply_star(Lstar.apply(ph));
    SampledField want = ph;
    want.t_lo = got.t_lo; want.t_hi = got.t_hi; want.x_lo = got.x_lo; want.x_hi = got.x_hi;
    CHECK(field_l2_diff(got, want) <= 1e-12);
}

TEST_CASE("derivative-stack reduction: convergence of the analytic-adjoint route") {
    CoefficientSet c = benchmark_variable().coeffs;
    AnalyticField f;
    f.comps.push_back(Expr::parse("sin(2*x + t)"));
    f.comps.push_back(Expr::parse("cos(3*x)*exp(-t)"));
    auto rep = verify_reduction_identity(ReductionMode::determinant_condition, c, 0, f,
                                         {64, 128, 256}, 0.0, 1.0, 1.0);
    CHECK_FALSE(rep.exact);
    CHECK(rep.fitted_order > 1.7);
    CHECK(rep.fitted_order < 2.3);
    // residuals strictly decreasing
    CHECK(rep.residuals[1] < rep.residuals[0]);
    CHECK(rep.residuals[2] < rep.residuals[1]);
}

TEST_CASE("identity verification on the zero field reports zero residuals") {
    CoefficientSet c = benchmark_zero_order().coeffs;
    AnalyticField zero;
    zero.comps.push_back(Expr::constant(0.0));
    zero.comps.push_back(Expr::constant(0.0));
    auto rep = verify_reduction_identity(ReductionMode::zero_order_coupling, c, 0, zero,
                                         {16, 32}, 0.0, 1.0, 1.0);
    for (double r : rep.residuals) CHECK(r == 0.0);
    CHECK(rep.exact);
}

TEST_CASE("derivative-stack reduction rejects a singular matrix at grid scale") {
    CoefficientSet sing(2);  // all couplings zero: det M identically zero
    sing.d[0] = CoefficientField(1.0);
    sing.d[1] = CoefficientField(1.0);
    DerivativeStackReduction red(sing);
    Grid g(10, 10, 0.0, 1.0, 1.0);
    SampledField f = SampledField::sample(g, 2, [](int, double, double x) { return x; });
    CHECK_THROWS_AS(red.apply(f), ConditionError);
}

TEST_CASE("reductions act locally: outputs vanish outside the source support") {
    Grid g(64, 32, 0.0, 1.0, 0.5);
    auto masked = [&](int, double t, double x) {
        if (x <= 0.4 || x >= 0.6 || t <= 0.15 || t >= 0.35) return 0.0;
        return std::sin(20 * x) * std::cos(7 * t);
    };
    SampledField f = SampledField::sample(g, 2, masked);
    f.compact_support = true;

    auto check_locality = [&](const SampledField& out, int x_pad, int t_pad) {
        for (int cc = 0; cc < out.m; ++cc)
            for (int n = 0; n <= g.nt; ++n)
                for (int i = 0; i <= g.nx + 1; ++i) {
                    bool inside_x = g.x(i) > 0.4 - (x_pad + 0.5) * g.h && g.x(i) < 0.6 + (x_pad + 0.5) * g.h;
                    bool inside_t = g.t(n) > 0.15 - (t_pad + 0.5) * g.tau && g.t(n) < 0.35 + (t_pad + 0.5) * g.tau;
                    if (!inside_x || !inside_t) CHECK(out.at(cc, n, i) == 0.0);
                }
    };
    check_locality(build_reduction_constant(0, benchmark_constant().coeffs).apply(f), 1, 1);
    check_locality(ZeroOrderReduction(benchmark_zero_order().coeffs).apply(f), 1, 1);
    check_locality(DerivativeStackReduction(benchmark_variable().coeffs).apply(f), 4, 2);
}

TEST_CASE("poincare diagnostic") {
    // g = 0, a = 1: the operator is -Id, Rayleigh minimum exactly 1
    CHECK(poincare_rayleigh(0.0, 1.0, 200) == doctest::Approx(1.0).epsilon(1e-12));

    // g = 1, a = 0: discrete Dirichlet-Laplacian minimum, within 2% of pi^2
    double lam = poincare_rayleigh(1.0, 0.0, 200);
    CHECK(std::abs(lam - M_PI * M_PI) / (M_PI * M_PI) < 0.02);

    // independent route: Sturm bisection on the same quadratic form matrix
    {
        int nx = 200;
        double h = 1.0 / (nx + 1);
        std::vector<double> diag(nx, 2.0 / (h * h)), off(nx - 1, -1.0 / (h * h));
        double sturm = tridiag_smallest_eig(diag, off);
        CHECK(lam == doctest::Approx(sturm).epsilon(1e-10));
    }

    // g != 0 and a != 0: positive, and inside the sandwich that the
    // exponential change of variables u -> u exp(-(a/g) x) provides:
    //   g^2 lam1 min(mu)/max(mu) <= R <= g^2 lam1 max(mu)/min(mu) + a^2-ish
    {
        double gg = 1.0, aa = 0.8;
        double R = poincare_rayleigh(gg, aa, 300);
        CHECK(R > 0.0);
        double lam1 = poincare_rayleigh(1.0, 0.0, 300);
        double mu_ratio = std::exp(2.0 * aa / gg);  // max mu / min mu on (0,1)
        CHECK(R >= gg * gg * lam1 / mu_ratio);
        CHECK(R <= gg * gg * lam1 * mu_ratio + aa * aa);
    }

    CHECK_THROWS_AS(poincare_rayleigh(0.0, 0.0, 50), ConditionError);
}
