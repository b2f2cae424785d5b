#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nullctrl/hum.hpp>
#include "test_helpers.hpp"

#include <random>

using namespace nullctrl;
using namespace testutil;

namespace {

struct HumFixture {
    ProblemSpec spec;
    Grid grid;
    Eta0Result eta;
    WeightProfile weights;
    CutoffTheta theta;
    HumConfig cfg;

    explicit HumFixture(const ProblemSpec& s, int nx = 60, int nt = 120, bool constant_mode = true,
                        double target_expo = 30.0)
        : spec(s), grid(nx, nt, s.x_lo, s.x_hi, s.T),
          eta(build_eta0(s.x_lo, s.x_hi, s.omega2)),
          weights(build_weights(eta, 1.0, auto_s(eta, 1.0, s.T, target_expo), grid,
                                constant_mode ? 7 : 9)),
          theta(default_cutoff(s, grid, constant_mode)) {
        cfg.form = constant_mode ? ControlForm::coupling_operator : ControlForm::direct;
        cfg.weights = &weights;
        cfg.theta = &theta;
        cfg.k = 1e6;
        cfg.cg_tol = 1e-9;
        cfg.cg_max_iter = 500;
    }
};

GridFunction sine_data(const Grid& g, int m) {
    return GridFunction::sample(g, m, [](int, double x) { return std::sin(M_PI * x); });
}

}  // namespace

TEST_CASE("zero initial data gives the zero minimizer") {
    HumFixture fx(benchmark_constant());
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, GridFunction(2, fx.grid.nx));
    CHECK(sol.terminal_norm == 0.0);
    CHECK(sol.cost == 0.0);
    CHECK(l2_spacetime(sol.control) == 0.0);
    CHECK(sol.cg_iterations == 0);
}

TEST_CASE("the terminal map is symmetric and nonnegative") {
    HumFixture fx(benchmark_constant());
    HumSystem sys(fx.spec, fx.grid, fx.cfg);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        GridFunction a = random_gridfunction(fx.grid, 2, rng);
        GridFunction b = random_gridfunction(fx.grid, 2, rng);
        GridFunction Ga(2, fx.grid.nx), Gb(2, fx.grid.nx);
        sys.apply_gramian(a, Ga);
        sys.apply_gramian(b, Gb);
        double gap = std::abs(dot_h(Ga, b, fx.grid.h) - dot_h(a, Gb, fx.grid.h));
        CHECK(gap <= 1e-10 * norm_h(a, fx.grid.h) * norm_h(b, fx.grid.h));
        CHECK(dot_h(Ga, a, fx.grid.h) >= -1e-14);
    }
}

TEST_CASE("benchmark null control: characterization, support, duality data") {
    HumFixture fx(benchmark_constant(), 100, 200);
    GridFunction y0 = sine_data(fx.grid, 2);
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, y0);
    double y0n = norm_h(y0, fx.grid.h);

    // terminal ratio at k = 1e6 on the pinned grid
    CHECK(sol.terminal_norm / y0n <= 0.05);

    // phi(T) = k (z(T) - 0), i.e. adjoint terminal = -chi = k z(T)
    {
        GridFunction want = sol.state.terminal();
        want *= fx.cfg.k;
        GridFunction got = sol.adjoint.at(fx.grid.nt);
        got -= want;
        CHECK(norm_h(got, fx.grid.h) <= 1e-6 * std::max(1.0, norm_h(want, fx.grid.h)));
    }

    // control characterization v = -rho theta N* phi, re-derived pointwise
    {
        HumSystem sys(fx.spec, fx.grid, fx.cfg);
        double worst = 0.0;
        for (int n = 0; n <= fx.grid.nt; ++n) {
            GridFunction vr = sys.control_from_adjoint(sol.adjoint.at(n), sys.rho_node_row(n));
            for (size_t kk = 0; kk < vr.v.size(); ++kk)
                worst = std::max(worst, std::abs(vr.v[kk] - sol.control.at(n).v[kk]));
        }
        CHECK(worst <= 1e-12);
    }

    // hard zeros outside supp theta, and at the time endpoints
    for (int n = 0; n <= fx.grid.nt; ++n)
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < fx.grid.nx; ++i)
                if (fx.theta.at_interior(i) == 0.0)
                    CHECK(sol.control.at(n).at(c, i) == 0.0);
    CHECK(l2_space(sol.control.at(0), fx.grid.h) == 0.0);
    CHECK(l2_space(sol.control.at(fx.grid.nt), fx.grid.h) == 0.0);

    // cost identity J_k = <y0, phi(0)>/2 holds to solver tolerance
    CHECK(cost_identity_check(sol, y0, fx.grid.h) <= 1e-6 * sol.cost);
}

TEST_CASE("cost identity degrades gracefully with a loose solver tolerance") {
    HumFixture fx(benchmark_constant());
    fx.cfg.cg_tol = 1e-2;
    fx.cfg.k = 1e4;
    GridFunction y0 = sine_data(fx.grid, 2);
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, y0);
    CHECK(cost_identity_check(sol, y0, fx.grid.h) <= 10 * fx.cfg.cg_tol * sol.cost);
}

TEST_CASE("terminal norm is nonincreasing and cost nondecreasing in k") {
    HumFixture fx(benchmark_constant());
    GridFunction y0 = sine_data(fx.grid, 2);
    auto rows = penalty_sweep(fx.spec, fx.grid, fx.cfg, y0, {1e2, 1e4, 1e6});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].terminal_norm < rows[0].terminal_norm);
    CHECK(rows[2].terminal_norm < rows[1].terminal_norm);
    CHECK(rows[1].cost >= rows[0].cost);
    CHECK(rows[2].cost >= rows[1].cost);
    // sweep on zero data: single zero row
    auto zrows = penalty_sweep(fx.spec, fx.grid, fx.cfg, GridFunction(2, fx.grid.nx), {1.0});
    CHECK(zrows.size() == 1);
    CHECK(zrows[0].terminal_norm == 0.0);
    CHECK(zrows[0].cost == 0.0);
    // non-increasing penalty list is rejected
    CHECK_THROWS_AS(penalty_sweep(fx.spec, fx.grid, fx.cfg, y0, {1e4, 1e2}),
                    std::invalid_argument);
}

TEST_CASE("solution is linear in the initial data") {
    HumFixture fx(benchmark_constant());
    fx.cfg.cg_tol = 1e-11;
    GridFunction y0 = sine_data(fx.grid, 2);
    HumSolution a = hum_solve(fx.spec, fx.grid, fx.cfg, y0);
    GridFunction y2 = y0;
    y2 *= 2.0;
    HumSolution b = hum_solve(fx.spec, fx.grid, fx.cfg, y2);
    double vn = l2_spacetime(a.control);
    Trajectory diff = b.control;
    for (int n = 0; n <= fx.grid.nt; ++n) axpy(-2.0, a.control.at(n), diff.at(n));
    CHECK(l2_spacetime(diff) <= 1e-6 * vn);
    CHECK(b.terminal_norm == doctest::Approx(2.0 * a.terminal_norm).epsilon(1e-6));
}

TEST_CASE("direct control form on the two-equation variable benchmark") {
    HumFixture fx(benchmark_variable(), 64, 128, /*constant_mode=*/false);
    GridFunction y0 = sine_data(fx.grid, 2);
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, y0);
    CHECK(sol.terminal_norm / norm_h(y0, fx.grid.h) <= 0.05);
    CHECK(cost_identity_check(sol, y0, fx.grid.h) <= 1e-6 * sol.cost);

    // direct-mode characterization v = -rho theta phi, re-derived pointwise
    HumSystem sys(fx.spec, fx.grid, fx.cfg);
    double worst = 0.0;
    for (int n = 0; n <= fx.grid.nt; ++n) {
        GridFunction vr = sys.control_from_adjoint(sol.adjoint.at(n), sys.rho_node_row(n));
        for (size_t kk = 0; kk < vr.v.size(); ++kk)
            worst = std::max(worst, std::abs(vr.v[kk] - sol.control.at(n).v[kk]));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("approximate-controllability variant tracks a reachable target") {
    HumFixture fx(benchmark_constant());
    GridFunction y0 = sine_data(fx.grid, 2);
    // target on the free trajectory: zero control achieves it exactly
    ParabolicSolver solver(fx.spec.coeffs, fx.grid);
    GridFunction yT = solver.forward(y0).terminal();
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, y0, &yT);
    CHECK(sol.terminal_norm <= 1e-10);
    CHECK(l2_spacetime(sol.control) <= 1e-8);
}

TEST_CASE("regularity diagnostic: finite weighted norms, linear scaling") {
    HumFixture fx(benchmark_constant());
    GridFunction y0 = sine_data(fx.grid, 2);
    fx.cfg.cg_tol = 1e-11;
    HumSolution sol = hum_solve(fx.spec, fx.grid, fx.cfg, y0);
    RegularityReport rep = control_regularity_report(sol, fx.weights, 0.5);
    CHECK(std::isfinite(rep.total()));
    CHECK(rep.total() > 0.0);
    for (double v : {rep.l2, rep.dx, rep.dxx, rep.dt}) CHECK(std::isfinite(v));

    GridFunction y2 = y0;
    y2 *= 2.0;
    HumSolution sol2 = hum_solve(fx.spec, fx.grid, fx.cfg, y2);
    RegularityReport rep2 = control_regularity_report(sol2, fx.weights, 0.5);
    CHECK(rep2.total() == doctest::Approx(2.0 * rep.total()).epsilon(1e-6));

    // zero control: all norms zero
    HumSolution zsol = hum_solve(fx.spec, fx.grid, fx.cfg, GridFunction(2, fx.grid.nx));
    RegularityReport zrep = control_regularity_report(zsol, fx.weights, 0.5);
    CHECK(zrep.total() == 0.0);
    CHECK_THROWS_AS(control_regularity_report(sol, fx.weights, 1.5), std::invalid_argument);
}

TEST_CASE("config validation and failure modes") {
    HumFixture fx(benchmark_constant());
    GridFunction y0 = sine_data(fx.grid, 2);

    HumConfig bad = fx.cfg;
    bad.k = -1.0;
    CHECK_THROWS_AS(hum_solve(fx.spec, fx.grid, bad, y0), std::invalid_argument);
    bad = fx.cfg;
    bad.cg_tol = 2.0;
    CHECK_THROWS_AS(hum_solve(fx.spec, fx.grid, bad, y0), std::invalid_argument);
    bad = fx.cfg;
    bad.weights = nullptr;
    CHECK_THROWS_AS(hum_solve(fx.spec, fx.grid, bad, y0), std::invalid_argument);

    // CG starved of iterations reports the residual
    HumConfig starve = fx.cfg;
    starve.cg_max_iter = 1;
    starve.cg_tol = 1e-13;
    CHECK_THROWS_AS(hum_solve(fx.spec, fx.grid, starve, y0), CgFailure);

    // decoupled system: no coupled column, condition error
    ProblemSpec dec = benchmark_constant();
    dec.coeffs.A(1, 0) = CoefficientField(0.0);
    CHECK_THROWS_AS(hum_solve(dec, fx.grid, fx.cfg, y0), ConditionError);
}
