// Crank-Nicolson solvers for the forward system
//   dt y = div(D grad y) + G . grad y + A y + f
// and its discrete adjoint, on uniform grids with homogeneous Dirichlet data.
//
// Scheme: coefficients frozen at the half step t_{n+1/2},
//   (I - tau/2 L_n) y^{n+1} = (I + tau/2 L_n) y^n + tau f^{n+1/2},
// with the conservative flux stencil for div(d grad .) and centered first
// differences for g . grad. The coupled m-component step is one banded solve
// (node-major interleaving, bandwidth 2m-1 each side).
//
// The adjoint solver marches the exact transpose of the one-step map:
//   w^{n+1/2} = (I - tau/2 L_n)^{-T} psi^{n+1},  psi^n = (I + tau/2 L_n)^T w,
// so the discrete Green identity
//   <y(T),psi(T)> - <y0,psi(0)> = sum_n tau <f^{n+1/2}, w^{n+1/2}>
// holds to machine precision. The half-step weights w are returned alongside
// the nodal trajectory; they are what sources must be paired with.

#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"
#include "linalg.hpp"

namespace nullctrl {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Source term sampled at the nt half steps.
struct SourceTerm {
    std::vector<GridFunction> half;  // size nt

    static SourceTerm zeros(const Grid& g, int m) {
        SourceTerm s;
        s.half.assign(g.nt, GridFunction(m, g.nx));
        return s;
    }
    // node-sampled trajectory -> half-step averages
    static SourceTerm from_trajectory(const Trajectory& f) {
        SourceTerm s;
        s.half.reserve(f.grid.nt);
        for (int n = 0; n < f.grid.nt; ++n) {
            GridFunction u = f.at(n);
            u += f.at(n + 1);
            u *= 0.5;
            s.half.push_back(std::move(u));
        }
        return s;
    }
    // control injector: u has m-1 components, pattern (identity; 0)
    static SourceTerm from_control(const Grid& g, int m, const std::vector<GridFunction>& u_half) {
        SourceTerm s = zeros(g, m);
        for (int n = 0; n < g.nt; ++n)
            for (int c = 0; c < m - 1; ++c)
                for (int i = 0; i < g.nx; ++i) s.half[n].at(c, i) = u_half[n].at(c, i);
        return s;
    }
};

enum class AdjointScheme {
    transpose,  // exact transpose of the forward one-step map
    direct      // consistency-only: CN discretization of the adjoint PDE
};

struct AdjointSolution {
    Trajectory psi;                       // nodal values, psi.at(nt) = terminal datum
    std::vector<GridFunction> half;       // duality weights w^{n+1/2}, size nt
};

// Owns mutable scratch (cached coefficient samples and step factorizations):
// one solve at a time per instance, distinct instances run in parallel safely,
// returned trajectories are independent of the solver.
class ParabolicSolver {
public:
    ParabolicSolver(const CoefficientSet& coeffs, const Grid& grid)
        : c_(coeffs), g_(grid), m_(coeffs.m), n_(coeffs.m * grid.nx) {
        time_independent_ = all_time_independent();
        samples_.resize(g_.nt);
    }

    const Grid& grid() const { return g_; }
    int components() const { return m_; }

    Trajectory forward(const GridFunction& y0, const SourceTerm* src = nullptr) {
        check_shape(y0);
        if (src && static_cast<int>(src->half.size()) != g_.nt)
            throw SolverError("source term has wrong number of half-step slices");
        Trajectory y(g_, m_);
        y.at(0) = y0;
        std::vector<double> rhs(n_), tmp(n_);
        for (int n = 0; n < g_.nt; ++n) {
            const StepOps& op = step_ops(n);
            pack(y.at(n), tmp);
            op.B.matvec(tmp, rhs);
            if (src) {
                pack(src->half[n], tmp);
                for (int k = 0; k < n_; ++k) rhs[k] += g_.tau * tmp[k];
            }
            op.A.solve(rhs);
            unpack(rhs, y.at(n + 1));
        }
        return y;
    }

    AdjointSolution adjoint(const GridFunction& psiT, AdjointScheme scheme = AdjointScheme::transpose) {
        check_shape(psiT);
        if (scheme == AdjointScheme::direct) return adjoint_direct(psiT);
        AdjointSolution out;
        out.psi = Trajectory(g_, m_);
        out.half.assign(g_.nt, GridFunction(m_, g_.nx));
        out.psi.at(g_.nt) = psiT;
        std::vector<double> w(n_), tmp(n_);
        for (int n = g_.nt - 1; n >= 0; --n) {
            const StepOps& op = step_ops(n);
            pack(out.psi.at(n + 1), w);
            op.AT.solve(w);
            unpack(w, out.half[n]);
            op.BT.matvec(w, tmp);
            unpack(tmp, out.psi.at(n));
        }
        return out;
    }

    // max over sampled d_l of the recorded scheme data; exposed for diagnostics
    bool is_time_independent() const { return time_independent_; }

private:
    struct CoeffSamples {
        // per half step: d at spatial half nodes, g and a at interior nodes
        std::vector<double> d_half;  // [l][i], i = 0..nx (faces)
        std::vector<double> g_node;  // [l][j][i]
        std::vector<double> a_node;  // [l][j][i]
        bool ready = false;
    };

    struct StepOps {
        BandedMatrix A, AT, B, BT;
        bool ready = false;
    };

    bool all_time_independent() const {
        auto field_ti = [](const CoefficientField& f) {
            if (f.is_constant()) return true;
            if (!f.has_analytic_derivatives() || f.max_order_t() < 1) return false;
            // probe the t-derivative at scattered points
            for (double t : {0.13, 0.57, 0.91})
                for (double x : {0.21, 0.68})
                    if (f.partial(1, 0, t, x) != 0.0) return false;
            return true;
        };
        for (const auto& f : c_.d) if (!field_ti(f)) return false;
        for (const auto& f : c_.g) if (!field_ti(f)) return false;
        for (const auto& f : c_.a) if (!field_ti(f)) return false;
        return true;
    }

    void check_shape(const GridFunction& u) const {
        if (u.m != m_ || u.nx != g_.nx) throw SolverError("grid function has wrong shape");
    }

    void pack(const GridFunction& u, std::vector<double>& v) const {
        v.resize(n_);
        for (int i = 0; i < g_.nx; ++i)
            for (int c = 0; c < m_; ++c) v[static_cast<size_t>(i) * m_ + c] = u.at(c, i);
    }
    void unpack(const std::vector<double>& v, GridFunction& u) const {
        for (int i = 0; i < g_.nx; ++i)
            for (int c = 0; c < m_; ++c) u.at(c, i) = v[static_cast<size_t>(i) * m_ + c];
    }

    const CoeffSamples& samples_at(int n) {
        CoeffSamples& s = samples_[time_independent_ ? 0 : n];
        if (s.ready) return s;
        double t = g_.t_half(n);
        int nx = g_.nx;
        s.d_half.assign(static_cast<size_t>(m_) * (nx + 1), 0.0);
        s.g_node.assign(static_cast<size_t>(m_) * m_ * nx, 0.0);
        s.a_node.assign(static_cast<size_t>(m_) * m_ * nx, 0.0);
        for (int l = 0; l < m_; ++l)
            for (int i = 0; i <= nx; ++i)
                s.d_half[static_cast<size_t>(l) * (nx + 1) + i] = c_.d[l](t, g_.x_lo + (i + 0.5) * g_.h);
        for (int l = 0; l < m_; ++l)
            for (int j = 0; j < m_; ++j)
                for (int i = 0; i < nx; ++i) {
                    double x = g_.xi(i);
                    s.g_node[(static_cast<size_t>(l) * m_ + j) * nx + i] = c_.G(l, j)(t, x);
                    s.a_node[(static_cast<size_t>(l) * m_ + j) * nx + i] = c_.A(l, j)(t, x);
                }
        s.ready = true;
        return s;
    }

    // Insert tau/2-scaled spatial operator into A (minus), B (plus) and their
    // transposes, then add the identity.
    const StepOps& step_ops(int n) {
        if (time_independent_ && cached_.ready) return cached_;
        StepOps& op = time_independent_ ? cached_ : scratch_ops_;
        const CoeffSamples& s = samples_at(n);
        int kb = 2 * m_ - 1;
        op.A = BandedMatrix(n_, kb, kb);
        op.AT = BandedMatrix(n_, kb, kb);
        op.B = BandedMatrix(n_, kb, kb);
        op.BT = BandedMatrix(n_, kb, kb);
        const double ht = 0.5 * g_.tau;
        const double h2 = g_.h * g_.h, h = g_.h;
        auto put = [&](int r, int cn, double lval) {
            op.A.add(r, cn, -ht * lval);
            op.AT.add(cn, r, -ht * lval);
            op.B.add(r, cn, ht * lval);
            op.BT.add(cn, r, ht * lval);
        };
        int nx = g_.nx;
        for (int i = 0; i < nx; ++i) {
            for (int l = 0; l < m_; ++l) {
                int row = i * m_ + l;
                double dm = s.d_half[static_cast<size_t>(l) * (nx + 1) + i];
                double dp = s.d_half[static_cast<size_t>(l) * (nx + 1) + i + 1];
                put(row, row, -(dp + dm) / h2);
                if (i + 1 < nx) put(row, (i + 1) * m_ + l, dp / h2);
                if (i > 0) put(row, (i - 1) * m_ + l, dm / h2);
                for (int j = 0; j < m_; ++j) {
                    double gv = s.g_node[(static_cast<size_t>(l) * m_ + j) * nx + i];
                    double av = s.a_node[(static_cast<size_t>(l) * m_ + j) * nx + i];
                    if (gv != 0.0) {
                        if (i + 1 < nx) put(row, (i + 1) * m_ + j, gv / (2 * h));
                        if (i > 0) put(row, (i - 1) * m_ + j, -gv / (2 * h));
                    }
                    if (av != 0.0) put(row, i * m_ + j, av);
                }
            }
        }
        for (int k = 0; k < n_; ++k) {
            op.A.add(k, k, 1.0);
            op.AT.add(k, k, 1.0);
            op.B.add(k, k, 1.0);
            op.BT.add(k, k, 1.0);
        }
        try {
            op.A.factor();
            op.AT.factor();
        } catch (const std::runtime_error& e) {
            throw SolverError(std::string("singular step matrix (tau/h pathology): ") + e.what());
        }
        op.ready = true;
        return op;
    }

    // Consistency-only adjoint: CN applied to the adjoint PDE
    //   -dt psi_l = div(d_l grad psi_l) - sum_j dx(g_jl psi_j) + sum_j a_jl psi_j
    // with the first-order terms in product-rule form -g dx psi - (dx g) psi
    // and coefficients frozen at the time node rather than the half step.
    // Same order of consistency as the forward scheme, but not its transpose,
    // so the discrete Green identity only holds up to truncation.
    AdjointSolution adjoint_direct(const GridFunction& psiT) {
        AdjointSolution out;
        out.psi = Trajectory(g_, m_);
        out.half.assign(g_.nt, GridFunction(m_, g_.nx));
        out.psi.at(g_.nt) = psiT;
        int nx = g_.nx, kb = 2 * m_ - 1;
        std::vector<double> rhs(n_), tmp(n_);
        for (int n = g_.nt - 1; n >= 0; --n) {
            double t = g_.t(n + 1);
            BandedMatrix A(n_, kb, kb), B(n_, kb, kb);
            auto put = [&](int r, int cn, double lval) {
                A.add(r, cn, -0.5 * g_.tau * lval);
                B.add(r, cn, 0.5 * g_.tau * lval);
            };
            for (int i = 0; i < nx; ++i) {
                double x = g_.xi(i);
                for (int l = 0; l < m_; ++l) {
                    int row = i * m_ + l;
                    double dm = c_.d[l](t, x - 0.5 * g_.h);
                    double dp = c_.d[l](t, x + 0.5 * g_.h);
                    put(row, row, -(dp + dm) / (g_.h * g_.h));
                    if (i + 1 < nx) put(row, (i + 1) * m_ + l, dp / (g_.h * g_.h));
                    if (i > 0) put(row, (i - 1) * m_ + l, dm / (g_.h * g_.h));
                    for (int j = 0; j < m_; ++j) {
                        double gv = c_.G(j, l)(t, x);
                        double gx = c_.G(j, l).is_constant() ? 0.0
                                                             : c_.G(j, l).partial(0, 1, t, x);
                        if (i + 1 < nx) put(row, (i + 1) * m_ + j, -gv / (2 * g_.h));
                        if (i > 0) put(row, (i - 1) * m_ + j, gv / (2 * g_.h));
                        put(row, i * m_ + j, c_.A(j, l)(t, x) - gx);
                    }
                }
            }
            for (int k = 0; k < n_; ++k) {
                A.add(k, k, 1.0);
                B.add(k, k, 1.0);
            }
            A.factor();
            pack(out.psi.at(n + 1), tmp);
            B.matvec(tmp, rhs);
            A.solve(rhs);
            unpack(rhs, out.psi.at(n));
            for (int i = 0; i < nx; ++i)
                for (int c = 0; c < m_; ++c)
                    out.half[n].at(c, i) = 0.5 * (out.psi.at(n).at(c, i) + out.psi.at(n + 1).at(c, i));
        }
        return out;
    }

    CoefficientSet c_;  // shared-impl fields, cheap copy
    Grid g_;
    int m_, n_;
    bool time_independent_ = false;
    std::vector<CoeffSamples> samples_;
    StepOps cached_;       // time-independent fast path
    StepOps scratch_ops_;  // rebuilt per step otherwise
};

// |<y(T),psi(T)> - <y0,psi(0)> - sum_n tau <f_half, w_half>| for the forward
// solution y and adjoint psi; machine-zero for the transpose scheme.
inline double duality_residual(const CoefficientSet& coeffs, const Grid& grid,
                               const GridFunction& y0, const SourceTerm& f,
                               const GridFunction& psiT,
                               AdjointScheme scheme = AdjointScheme::transpose) {
    ParabolicSolver solver(coeffs, grid);
    Trajectory y = solver.forward(y0, &f);
    AdjointSolution adj = solver.adjoint(psiT, scheme);
    double lhs = dot_h(y.terminal(), psiT, grid.h) - dot_h(y0, adj.psi.at(0), grid.h);
    double src = 0.0;
    for (int n = 0; n < grid.nt; ++n) src += grid.tau * dot_h(f.half[n], adj.half[n], grid.h);
    return std::abs(lhs - src);
}

}  // namespace nullctrl
