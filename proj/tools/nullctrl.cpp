// Command-line front end. One self-describing config file per run; flags only
// for output directory, seed, formats, and verbosity.
//
//   nullctrl <subcommand> <config> [--out DIR] [--seed N] [--format csv,json,binary] [-v]
//
// Subcommands: check | hum | pipeline | sweep | weights | verify-identity | poincare
// Exit codes: 0 success, 1 config error, 2 condition unsatisfied, 3 solver failure.
// The only environment variable consulted is NULLCTRL_THREADS (sampling loops).

#include <CLI11.hpp>
#include <json.hpp>

#include <nullctrl/algebraic.hpp>
#include <nullctrl/config.hpp>
#include <nullctrl/io.hpp>
#include <nullctrl/pipeline.hpp>

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>

using nlohmann::json;
using namespace nullctrl;

namespace {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 20240107;
    std::vector<std::string> formats = {"csv", "json"};
    int verbosity = 0;
};

int thread_count() {
    const char* env = std::getenv("NULLCTRL_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

bool wants(const Options& opt, const std::string& fmt) {
    for (const auto& f : opt.formats)
        if (f == fmt) return true;
    return false;
}

std::string outpath(const Options& opt, const std::string& file) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / file).string();
}

void write_json(const Options& opt, const std::string& file, const json& j) {
    std::ofstream out(outpath(opt, file));
    out << j.dump(2) << "\n";
}

WeightProfile make_weights(const RunSetup& rs) {
    auto eta = build_eta0(rs.spec.x_lo, rs.spec.x_hi, rs.spec.omega2);
    return build_weights(eta, rs.lambda, rs.s_value, rs.grid, rs.rho_exponent);
}

HumConfig make_hum_config(const RunSetup& rs, const WeightProfile& w, const CutoffTheta& th) {
    HumConfig cfg;
    cfg.k = rs.penalty;
    cfg.cg_tol = rs.cg_tol;
    cfg.cg_max_iter = rs.cg_max_iter;
    cfg.K = rs.regularity_K;
    cfg.form = rs.mode == ReductionMode::constant_coefficients ? ControlForm::coupling_operator
                                                               : ControlForm::direct;
    cfg.weights = &w;
    cfg.theta = &th;
    return cfg;
}

// condition gate shared by the solving subcommands; returns false when the
// requested mode's condition does not hold
bool condition_holds(const RunSetup& rs, std::string* detail) {
    switch (rs.mode) {
        case ReductionMode::constant_coefficients: {
            auto i0 = find_i0(rs.spec.coeffs);
            if (!i0) {
                *detail = "the uncontrolled equation is decoupled from all controlled ones";
                return false;
            }
            *detail = "coupled column " + std::to_string(*i0 + 1);
            return true;
        }
        case ReductionMode::zero_order_coupling: {
            if (!rs.has_check_window) {
                *detail = "[check] window required for the zero-order coupling mode";
                return false;
            }
            bool ok = check_condition_case_i(rs.spec, rs.check_window, rs.tol_pos, rs.samples);
            *detail = ok ? "g21 vanishes and |a21| is bounded below on the window"
                         : "zero-order coupling condition fails on the window";
            return ok;
        }
        case ReductionMode::determinant_condition:
        default: {
            if (!rs.has_check_window) {
                *detail = "[check] window required for the determinant mode";
                return false;
            }
            auto rep = scan_det_condition(rs.spec, rs.check_window, rs.det_bound, rs.samples);
            std::ostringstream os;
            os.precision(17);
            os << "min |det H| = " << rep.min_abs_det << " at (t, x) = (" << rep.argmin_t << ", "
               << rep.argmin_x << ")";
            *detail = os.str();
            return rep.holds;
        }
    }
}

int cmd_check(const Options& opt, const RunSetup& rs) {
    auto bad = validate_spec(rs.spec);
    if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "spec: " << b << "\n";
        return 1;
    }
    json j;
    j["equations"] = rs.spec.m;
    bool any = false;
    if (rs.spec.coeffs.is_constant) {
        auto i0 = find_i0(rs.spec.coeffs);
        if (i0) {
            std::cout << "constant-coefficient coupling condition holds (column " << *i0 + 1
                      << "): null and approximately controllable\n";
            j["constant_condition"] = {{"holds", true}, {"column", *i0 + 1}};
            any = true;
        } else {
            std::cout << "not null controllable: the uncontrolled equation is decoupled "
                         "(necessary condition fails)\n";
            j["constant_condition"] = {{"holds", false}};
        }
    }
    if (rs.spec.m == 2 && rs.has_check_window) {
        bool zi = check_condition_case_i(rs.spec, rs.check_window, rs.tol_pos, rs.samples);
        std::cout << "zero-order coupling condition on window: " << (zi ? "holds" : "fails") << "\n";
        j["zero_order_condition"] = zi;
        any = any || zi;
        try {
            auto rep = scan_det_condition(rs.spec, rs.check_window, rs.det_bound, rs.samples);
            std::cout << "solvability determinant on window: min |det H| = " << fmt17(rep.min_abs_det)
                      << " at (t, x) = (" << fmt17(rep.argmin_t) << ", " << fmt17(rep.argmin_x)
                      << ") -> " << (rep.holds ? "holds" : "fails") << " (bound " << rs.det_bound
                      << ")\n";
            j["determinant_condition"] = {{"holds", rep.holds},
                                          {"min_abs_det", rep.min_abs_det},
                                          {"argmin_t", rep.argmin_t},
                                          {"argmin_x", rep.argmin_x},
                                          {"bound", rs.det_bound}};
            any = any || rep.holds;
        } catch (const DerivativeOrderError& e) {
            std::cout << "solvability determinant not evaluable: " << e.what() << "\n";
        }
    }
    if (wants(opt, "json")) write_json(opt, "check.json", j);
    // heatmap of the solvability determinant over the working window
    if (rs.spec.m == 2 && rs.has_check_window && wants(opt, "csv")) {
        try {
            std::ofstream out(outpath(opt, "det_heatmap.csv"));
            out << "t,x,detH\n";
            const SpaceTimeWindow& w = rs.check_window;
            for (int it = 0; it <= rs.samples; ++it)
                for (int ix = 0; ix <= rs.samples; ++ix) {
                    double t = w.t0 + (w.t1 - w.t0) * it / rs.samples;
                    double x = w.x0 + (w.x1 - w.x0) * ix / rs.samples;
                    out << fmt17(t) << ',' << fmt17(x) << ','
                        << fmt17(det_H_numeric(rs.spec.coeffs, t, x)) << '\n';
                }
        } catch (const DerivativeOrderError&) {
            // field not evaluable for this coefficient set; skip the heatmap
        }
    }
    return any ? 0 : 2;
}

int cmd_hum(const Options& opt, const RunSetup& rs) {
    WeightProfile w = make_weights(rs);
    CutoffTheta th = default_cutoff(rs.spec, rs.grid,
                                    rs.mode == ReductionMode::constant_coefficients);
    HumConfig cfg = make_hum_config(rs, w, th);
    GridFunction y0 = rs.initial_data();
    HumSolution sol = hum_solve(rs.spec, rs.grid, cfg, y0);
    double y0n = norm_h(y0, rs.grid.h);
    RegularityReport reg = control_regularity_report(sol, w, cfg.K);
    json j;
    j["terminal_norm"] = sol.terminal_norm;
    j["terminal_ratio"] = y0n > 0 ? sol.terminal_norm / y0n : 0.0;
    j["cost"] = sol.cost;
    j["cg_iterations"] = sol.cg_iterations;
    j["cg_residual"] = sol.cg_residual;
    j["cost_identity_gap"] = cost_identity_check(sol, y0, rs.grid.h);
    j["log_rho_scale"] = sol.log_rho_scale;
    j["regularity"] = {{"l2", reg.l2}, {"dx", reg.dx}, {"dxx", reg.dxx}, {"dt", reg.dt},
                       {"total", reg.total()}};
    if (wants(opt, "json")) write_json(opt, "hum.json", j);
    if (wants(opt, "csv")) {
        write_trajectory_csv(sol.control, outpath(opt, "control.csv"));
        write_trajectory_csv(sol.state, outpath(opt, "state.csv"));
        write_trajectory_csv(sol.adjoint, outpath(opt, "adjoint.csv"));
    }
    if (wants(opt, "binary")) {
        write_trajectory_binary(sol.control, outpath(opt, "control.bin"));
        write_trajectory_binary(sol.state, outpath(opt, "state.bin"));
    }
    std::cout << "terminal norm " << fmt17(sol.terminal_norm) << " (ratio "
              << fmt17(y0n > 0 ? sol.terminal_norm / y0n : 0.0) << "), cost "
              << fmt17(sol.cost) << ", " << sol.cg_iterations << " cg iterations\n";
    return 0;
}

int cmd_pipeline(const Options& opt, const RunSetup& rs) {
    WeightProfile w = make_weights(rs);
    CutoffTheta th = default_cutoff(rs.spec, rs.grid,
                                    rs.mode == ReductionMode::constant_coefficients);
    HumConfig cfg = make_hum_config(rs, w, th);
    GridFunction y0 = rs.initial_data();
    json j;
    if (!rs.target_exprs.empty() && rs.approx_eps > 0.0) {
        // approximate-controllability variant
        if (static_cast<int>(rs.target_exprs.size()) != rs.spec.m)
            throw ConfigError("[approximate] must define target1..target" + std::to_string(rs.spec.m));
        std::vector<Expr> te;
        for (const auto& e : rs.target_exprs) te.push_back(Expr::parse(e));
        GridFunction yT = GridFunction::sample(rs.grid, rs.spec.m,
                                               [&](int c, double x) { return te[c](0.0, x); });
        auto res = approximate_control(rs.spec, rs.grid, rs.mode, y0, yT, rs.approx_eps, cfg,
                                       rs.approx_k_max);
        j["achieved_error"] = res.achieved_error;
        j["eps"] = rs.approx_eps;
        j["final_k"] = res.final_k;
        j["reached"] = res.reached;
        if (wants(opt, "csv")) {
            write_trajectory_csv(res.pipeline.y, outpath(opt, "state.csv"));
            write_trajectory_csv(res.pipeline.u, outpath(opt, "control.csv"));
        }
        if (wants(opt, "json")) write_json(opt, "report.json", j);
        std::cout << "approximate control: achieved error " << fmt17(res.achieved_error)
                  << (res.reached ? " <= " : " > ") << fmt17(rs.approx_eps) << " at k = "
                  << fmt17(res.final_k) << "\n";
        return res.reached ? 0 : 3;
    }
    auto res = run_pipeline(rs.spec, rs.grid, rs.mode, y0, cfg);
    j["pde_residual"] = res.report.pde_residual;
    j["terminal_norm"] = res.report.terminal_norm;
    j["support_violation"] = res.report.support_violation;
    j["boundary_violation"] = res.report.boundary_violation;
    j["zhat_initial"] = res.report.zhat_initial;
    j["zhat_terminal"] = res.report.zhat_terminal;
    j["consistency_residual"] = res.report.consistency_residual;
    j["hum"] = {{"terminal_norm", res.hum.terminal_norm},
                {"cost", res.hum.cost},
                {"cg_iterations", res.hum.cg_iterations}};
    j["grid"] = {{"nx", res.report.nx}, {"nt", res.report.nt}, {"h", res.report.h},
                 {"tau", res.report.tau}};
    if (wants(opt, "json")) write_json(opt, "report.json", j);
    if (wants(opt, "csv")) {
        write_trajectory_csv(res.y, outpath(opt, "state.csv"));
        write_trajectory_csv(res.u, outpath(opt, "control.csv"));
    }
    if (wants(opt, "binary")) {
        write_trajectory_binary(res.y, outpath(opt, "state.bin"));
        write_trajectory_binary(res.u, outpath(opt, "control.bin"));
    }
    std::cout << "pipeline: ||y(T)|| = " << fmt17(res.report.terminal_norm)
              << ", pde residual " << fmt17(res.report.pde_residual) << ", support violation "
              << fmt17(res.report.support_violation) << "\n";
    return 0;
}

int cmd_sweep(const Options& opt, const RunSetup& rs) {
    if (rs.sweep_penalties.empty()) throw ConfigError("[sweep] penalties = [...] required");
    WeightProfile w = make_weights(rs);
    CutoffTheta th = default_cutoff(rs.spec, rs.grid,
                                    rs.mode == ReductionMode::constant_coefficients);
    HumConfig cfg = make_hum_config(rs, w, th);
    GridFunction y0 = rs.initial_data();
    auto rows = penalty_sweep(rs.spec, rs.grid, cfg, y0, rs.sweep_penalties);
    std::vector<std::vector<double>> table;
    for (const auto& r : rows)
        table.push_back({r.k, r.terminal_norm, r.cost, static_cast<double>(r.cg_iterations)});
    if (wants(opt, "csv"))
        write_csv_table(outpath(opt, "sweep.csv"), {"k", "terminal_norm", "J_k", "cg_iterations"},
                        table);
    for (const auto& r : rows)
        std::cout << "k = " << fmt17(r.k) << "  terminal_norm = " << fmt17(r.terminal_norm)
                  << "  J_k = " << fmt17(r.cost) << "  iterations = " << r.cg_iterations << "\n";
    return 0;
}

int cmd_weights(const Options& opt, const RunSetup& rs) {
    WeightProfile w = make_weights(rs);
    if (wants(opt, "csv")) {
        std::ofstream out(outpath(opt, "weights.csv"));
        out << "t,x,alpha,xi,rho\n";
        for (int n = 1; n < rs.grid.nt; ++n)
            for (int i = 0; i <= rs.grid.nx + 1; ++i) {
                double t = rs.grid.t(n), x = rs.grid.x(i);
                out << fmt17(t) << ',' << fmt17(x) << ',' << fmt17(w.alpha(t, x)) << ','
                    << fmt17(w.xi(t, x)) << ',' << fmt17(w.rho(t, x)) << '\n';
            }
    }
    std::cout << "weights: lambda = " << fmt17(w.lambda) << ", s = " << fmt17(w.s)
              << ", exponent p = " << w.p << ", kappa = " << fmt17(w.kappa)
              << ", log max rho = " << fmt17(w.log_rho_max) << "\n";
    if (rs.observability_samples > 0) {
        std::mt19937_64 rng(opt.seed);
        std::vector<GridFunction> samples;
        for (int k = 0; k < rs.observability_samples; ++k)
            samples.push_back(random_gridfunction(rs.grid, rs.spec.m, rng));
        ObsMode mode = rs.mode == ReductionMode::constant_coefficients
                           ? ObsMode::coupling_operator
                           : ObsMode::direct;
        double g_coef = 0.0, a_coef = 0.0;
        if (mode == ObsMode::coupling_operator) {
            auto i0 = find_i0(rs.spec.coeffs);
            if (!i0) throw ConditionError("observability diagnostic needs a coupled column");
            g_coef = rs.spec.coeffs.G(rs.spec.m - 1, *i0).constant_value();
            a_coef = rs.spec.coeffs.A(rs.spec.m - 1, *i0).constant_value();
        }
        // chunked over NULLCTRL_THREADS; slots are preassigned so the output
        // order (and the CSV bytes) do not depend on the thread count
        std::vector<ObsSample> obs;
        int nthreads = std::min<int>(thread_count(), static_cast<int>(samples.size()));
        if (nthreads <= 1) {
            obs = observability_ratio(rs.spec, rs.grid, w, mode, samples, g_coef, a_coef);
        } else {
            obs.resize(samples.size());
            std::vector<std::future<std::vector<ObsSample>>> futs;
            int chunk = (static_cast<int>(samples.size()) + nthreads - 1) / nthreads;
            for (int tid = 0; tid < nthreads; ++tid) {
                int lo = tid * chunk, hi = std::min<int>(lo + chunk, samples.size());
                if (lo >= hi) break;
                std::vector<GridFunction> part(samples.begin() + lo, samples.begin() + hi);
                futs.push_back(std::async(std::launch::async, [&, part]() {
                    return observability_ratio(rs.spec, rs.grid, w, mode, part, g_coef, a_coef);
                }));
            }
            size_t at = 0;
            for (auto& fu : futs)
                for (auto& o : fu.get()) obs[at++] = o;
        }
        std::vector<std::vector<double>> table;
        double worst = 0.0;
        int zero_den = 0;
        for (const auto& o : obs) {
            table.push_back({o.ratio, o.numerator, o.denominator});
            if (o.denominator_zero) ++zero_den;
            else worst = std::max(worst, o.ratio);
        }
        if (wants(opt, "csv"))
            write_csv_table(outpath(opt, "observability.csv"), {"ratio", "numerator", "denominator"},
                            table);
        std::cout << "observability: " << obs.size() << " samples, empirical max ratio "
                  << fmt17(worst) << ", zero denominators " << zero_den << "\n";
    }
    return 0;
}

int cmd_verify_identity(const Options& opt, const RunSetup& rs) {
    if (rs.verify_nx.empty()) throw ConfigError("[verify] nx_levels = [...] required");
    AnalyticField f;
    if (rs.verify_fields.empty()) {
        // default smooth packets
        for (int c = 0; c < rs.spec.m; ++c)
            f.comps.push_back(Expr::parse("sin(" + std::to_string(2 + c) + "*x + t)"));
    } else {
        if (static_cast<int>(rs.verify_fields.size()) != rs.spec.m)
            throw ConfigError("[verify] needs f1..f" + std::to_string(rs.spec.m));
        for (const auto& e : rs.verify_fields) f.comps.push_back(Expr::parse(e));
    }
    int i0 = 0;
    if (rs.mode == ReductionMode::constant_coefficients) {
        auto found = find_i0(rs.spec.coeffs);
        if (!found) return 2;
        i0 = *found;
    }
    auto rep = verify_reduction_identity(rs.mode, rs.spec.coeffs, i0, f, rs.verify_nx,
                                         rs.spec.x_lo, rs.spec.x_hi, rs.spec.T,
                                         rs.verify_nt_over_nx);
    std::vector<std::vector<double>> table;
    for (size_t k = 0; k < rep.hs.size(); ++k) table.push_back({rep.hs[k], rep.residuals[k]});
    if (wants(opt, "csv"))
        write_csv_table(outpath(opt, "identity.csv"), {"h", "residual"}, table);
    for (size_t k = 0; k < rep.hs.size(); ++k)
        std::cout << "h = " << fmt17(rep.hs[k]) << "  residual = " << fmt17(rep.residuals[k]) << "\n";
    if (rep.exact)
        std::cout << "identity holds at roundoff on all grids (order fit not applicable)\n";
    else
        std::cout << "fitted order = " << fmt17(rep.fitted_order) << "\n";
    // audit dump of the operator term lists
    if (opt.verbosity > 0) {
        std::ofstream out(outpath(opt, "operators.txt"));
        out << op_L(rs.spec.coeffs).describe() << "\n" << op_L_star(rs.spec.coeffs).describe();
        if (rs.mode == ReductionMode::constant_coefficients)
            out << "\n" << build_reduction_constant(i0, rs.spec.coeffs).describe() << "\n"
                << op_N(i0, rs.spec.coeffs).describe();
        else
            out << "\n" << op_R1(rs.spec.coeffs).describe() << "\n"
                << op_R2(rs.spec.coeffs).describe();
        std::cout << "operator term lists written to operators.txt\n";
    }
    return 0;
}

int cmd_poincare(const Options& opt, const RunSetup& rs) {
    double lam = poincare_rayleigh(rs.poincare_g, rs.poincare_a, rs.poincare_nx, rs.spec.x_lo,
                                   rs.spec.x_hi);
    std::cout << "rayleigh minimum = " << fmt17(lam) << ", empirical constant C = "
              << fmt17(1.0 / lam) << "\n";
    if (wants(opt, "json"))
        write_json(opt, "poincare.json",
                   json{{"rayleigh_min", lam}, {"constant", 1.0 / lam},
                        {"g", rs.poincare_g}, {"a", rs.poincare_a}, {"nx", rs.poincare_nx}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"null-control toolkit for coupled parabolic systems"};
    app.require_subcommand(1);
    Options opt;
    std::string fmt_csv = "csv,json";
    // common options live on the parent; subcommand arguments fall through
    app.add_option("config", opt.config_path, "run configuration file");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--seed", opt.seed, "seed for sampling commands");
    app.add_option("--format", fmt_csv, "comma-separated outputs: csv,json,binary");
    app.add_flag("-v,--verbose", opt.verbosity, "verbosity");
    CLI::App* c_check = app.add_subcommand("check", "evaluate the controllability conditions");
    CLI::App* c_hum = app.add_subcommand("hum", "solve the analytic control problem");
    CLI::App* c_pipe = app.add_subcommand("pipeline", "full analytic + algebraic construction");
    CLI::App* c_sweep = app.add_subcommand("sweep", "penalty sweep");
    CLI::App* c_weights = app.add_subcommand("weights", "weight profile and observability diagnostics");
    CLI::App* c_verify = app.add_subcommand("verify-identity", "reduction identity convergence study");
    CLI::App* c_poincare = app.add_subcommand("poincare", "weighted Poincare diagnostic");
    for (CLI::App* sub : {c_check, c_hum, c_pipe, c_sweep, c_weights, c_verify, c_poincare})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    if (opt.config_path.empty()) {
        std::cerr << "a run configuration file is required\n";
        return 1;
    }
    {
        opt.formats.clear();
        std::stringstream ss(fmt_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok != "csv" && tok != "json" && tok != "binary") {
                std::cerr << "unknown format \"" << tok << "\"\n";
                return 1;
            }
            opt.formats.push_back(tok);
        }
    }

    try {
        ConfigFile cfg = ConfigFile::parse_file(opt.config_path);
        RunSetup rs = load_run_setup(cfg);
        if (auto unused = cfg.unused_keys(); !unused.empty()) {
            for (const auto& [key, line] : unused)
                std::cerr << opt.config_path << ":" << line << ": unknown or unused key \"" << key
                          << "\"\n";
            return 1;
        }
        {
            auto bad = validate_spec(rs.spec);
            if (!bad.empty() && !c_check->parsed()) {
                for (const auto& b : bad) std::cerr << "spec: " << b << "\n";
                return 1;
            }
        }
        // commands that solve require the mode condition up front
        if (c_hum->parsed() || c_pipe->parsed() || c_sweep->parsed()) {
            std::string detail;
            if (!condition_holds(rs, &detail)) {
                std::cerr << "condition unsatisfied: " << detail << "\n";
                return 2;
            }
            if (opt.verbosity > 0) std::cout << "condition: " << detail << "\n";
        }
        int rc = 1;
        if (c_check->parsed()) rc = cmd_check(opt, rs);
        else if (c_hum->parsed()) rc = cmd_hum(opt, rs);
        else if (c_pipe->parsed()) rc = cmd_pipeline(opt, rs);
        else if (c_sweep->parsed()) rc = cmd_sweep(opt, rs);
        else if (c_weights->parsed()) rc = cmd_weights(opt, rs);
        else if (c_verify->parsed()) rc = cmd_verify_identity(opt, rs);
        else if (c_poincare->parsed()) rc = cmd_poincare(opt, rs);
        // derivative callbacks that fell back to finite differences
        bool fd_used = false;
        for (const auto& f : rs.spec.coeffs.d) fd_used = fd_used || f.fd_fallback_used();
        for (const auto& f : rs.spec.coeffs.g) fd_used = fd_used || f.fd_fallback_used();
        for (const auto& f : rs.spec.coeffs.a) fd_used = fd_used || f.fd_fallback_used();
        if (fd_used)
            std::cerr << "warning: some coefficient derivatives used the finite-difference "
                         "fallback\n";
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ExprError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ConditionError& e) {
        std::cerr << "condition unsatisfied: " << e.what() << "\n";
        return 2;
    } catch (const CgFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
