// Scalar coefficient fields c(t,x) with partial-derivative access up to a
// declared order. Three flavors:
//   - expression-backed (exact symbolic derivatives, the normal path),
//   - callback-backed with analytic partial closures,
//   - callback-backed with a central finite-difference fallback (flagged).
// Requesting a derivative beyond the declared orders throws; it is never a
// silent zero.

#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"

namespace nullctrl {

struct DerivativeOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CoefficientField {
public:
    using Fn = std::function<double(double, double)>;
    // analytic partial generator: (order_t, order_x) -> evaluator
    using PartialFn = std::function<double(int, int, double, double)>;

    CoefficientField() : CoefficientField(0.0) {}

    explicit CoefficientField(double c) {
        impl_ = std::make_shared<Impl>();
        impl_->constant = true;
        impl_->const_value = c;
        impl_->max_t = 64;  // derivatives of a constant exist to any order
        impl_->max_x = 64;
        impl_->analytic = true;
    }

    static CoefficientField constant(double c) { return CoefficientField(c); }

    static CoefficientField from_expression(const std::string& formula, int max_t, int max_x) {
        CoefficientField f;
        f.impl_ = std::make_shared<Impl>();
        f.impl_->max_t = max_t;
        f.impl_->max_x = max_x;
        f.impl_->analytic = true;
        Expr e = Expr::parse(formula);
        if (e.is_constant()) {
            f.impl_->constant = true;
            f.impl_->const_value = e.constant_value();
            f.impl_->max_t = 64;
            f.impl_->max_x = 64;
            return f;
        }
        f.impl_->derivs.assign(static_cast<size_t>(max_t + 1) * (max_x + 1), Expr());
        for (int i = 0; i <= max_t; ++i)
            for (int j = 0; j <= max_x; ++j)
                f.impl_->derivs[static_cast<size_t>(i) * (max_x + 1) + j] = e.derivative(i, j);
        f.impl_->formula = formula;
        return f;
    }

    // Analytic callbacks for value and partials.
    static CoefficientField from_callbacks(Fn value, PartialFn partial, int max_t, int max_x) {
        CoefficientField f;
        f.impl_ = std::make_shared<Impl>();
        f.impl_->fn = std::move(value);
        f.impl_->partial_fn = std::move(partial);
        f.impl_->max_t = max_t;
        f.impl_->max_x = max_x;
        f.impl_->analytic = true;
        return f;
    }

    // Plain callback; derivatives fall back to central differences and set the
    // fd_fallback_used flag. `scale` sets the base step h_fd = 1e-5 * scale.
    static CoefficientField from_callable(Fn value, int max_t, int max_x, double scale = 1.0) {
        CoefficientField f;
        f.impl_ = std::make_shared<Impl>();
        f.impl_->fn = std::move(value);
        f.impl_->max_t = max_t;
        f.impl_->max_x = max_x;
        f.impl_->analytic = false;
        f.impl_->scale = scale;
        return f;
    }

    double operator()(double t, double x) const {
        if (impl_->constant) return impl_->const_value;
        if (!impl_->derivs.empty()) return impl_->derivs[0](t, x);
        return impl_->fn(t, x);
    }

    double partial(int order_t, int order_x, double t, double x) const {
        if (order_t == 0 && order_x == 0) return (*this)(t, x);
        if (order_t > impl_->max_t || order_x > impl_->max_x || order_t < 0 || order_x < 0)
            throw DerivativeOrderError(
                "coefficient derivative (" + std::to_string(order_t) + "," +
                std::to_string(order_x) + ") beyond declared orders (" +
                std::to_string(impl_->max_t) + "," + std::to_string(impl_->max_x) + ")");
        if (impl_->constant) return 0.0;
        if (!impl_->derivs.empty())
            return impl_->derivs[static_cast<size_t>(order_t) * (impl_->max_x + 1) + order_x](t, x);
        if (impl_->partial_fn) return impl_->partial_fn(order_t, order_x, t, x);
        impl_->fd_used.store(true, std::memory_order_relaxed);
        return fd_partial(order_t, order_x, t, x);
    }

    // same field multiplied by a constant (shares the underlying data)
    CoefficientField scaled(double factor) const {
        if (impl_->constant) return CoefficientField(factor * impl_->const_value);
        CoefficientField src = *this;
        CoefficientField f;
        f.impl_ = std::make_shared<Impl>();
        f.impl_->max_t = impl_->max_t;
        f.impl_->max_x = impl_->max_x;
        f.impl_->analytic = impl_->analytic;
        f.impl_->fn = [src, factor](double t, double x) { return factor * src(t, x); };
        f.impl_->partial_fn = [src, factor](int ot, int ox, double t, double x) {
            return factor * src.partial(ot, ox, t, x);
        };
        return f;
    }

    int max_order_t() const { return impl_->max_t; }
    int max_order_x() const { return impl_->max_x; }
    bool is_constant() const { return impl_->constant; }
    double constant_value() const { return impl_->const_value; }
    bool has_analytic_derivatives() const { return impl_->analytic; }
    bool fd_fallback_used() const { return impl_->fd_used.load(std::memory_order_relaxed); }
    const std::string& formula() const { return impl_->formula; }

private:
    struct Impl {
        Fn fn;
        PartialFn partial_fn;
        std::vector<Expr> derivs;   // expression path, row-major (t, x)
        std::string formula;
        bool constant = false;
        double const_value = 0.0;
        int max_t = 0, max_x = 0;
        bool analytic = false;
        double scale = 1.0;
        mutable std::atomic<bool> fd_used{false};
    };

    // Central difference of order k in one variable; the step widens with the
    // order so roundoff O(eps/h^k) stays below the O(h^2) truncation.
    template <class G>
    static double central_diff(const G& g, double u, int order, double step) {
        switch (order) {
            case 1: return (g(u + step) - g(u - step)) / (2 * step);
            case 2: return (g(u + step) - 2 * g(u) + g(u - step)) / (step * step);
            case 3:
                return (g(u + 2 * step) - 2 * g(u + step) + 2 * g(u - step) - g(u - 2 * step)) /
                       (2 * step * step * step);
            case 4:
                return (g(u + 2 * step) - 4 * g(u + step) + 6 * g(u) - 4 * g(u - step) +
                        g(u - 2 * step)) /
                       (step * step * step * step);
            default:
                throw DerivativeOrderError("finite-difference fallback supports orders <= 4");
        }
    }

    static double fd_step(int order, double scale) {
        if (order <= 1) return 1e-5 * scale;
        // eps^(1/(order+2))
        return scale * std::pow(2.2e-16, 1.0 / (order + 2));
    }

    double fd_partial(int ot, int ox, double t, double x) const {
        const Fn& f = impl_->fn;
        if (ot == 0)
            return central_diff([&](double xx) { return f(t, xx); }, x, ox, fd_step(ox, impl_->scale));
        if (ox == 0)
            return central_diff([&](double tt) { return f(tt, x); }, t, ot, fd_step(ot, impl_->scale));
        // mixed: x-derivative of the t-derivative
        auto gt = [&](double xx) {
            return central_diff([&](double tt) { return f(tt, xx); }, t, ot, fd_step(ot, impl_->scale));
        };
        return central_diff(gt, x, ox, fd_step(ox, impl_->scale));
    }

    std::shared_ptr<Impl> impl_;
};

// Coefficient bundle of one m-equation problem: diagonal diffusions d_l,
// first-order couplings g_ij, zero-order couplings a_ij. The control pattern
// is fixed (identity on the first m-1 rows, zero last row).
struct CoefficientSet {
    int m = 0;
    std::vector<CoefficientField> d;  // m entries
    std::vector<CoefficientField> g;  // row-major m*m
    std::vector<CoefficientField> a;  // row-major m*m
    bool is_constant = false;
    double d0 = 0.0;  // recorded ellipticity floor

    CoefficientSet() = default;
    explicit CoefficientSet(int m_)
        : m(m_), d(m_, CoefficientField(0.0)),
          g(static_cast<size_t>(m_) * m_, CoefficientField(0.0)),
          a(static_cast<size_t>(m_) * m_, CoefficientField(0.0)) {}

    CoefficientField& G(int i, int j) { return g[static_cast<size_t>(i) * m + j]; }
    const CoefficientField& G(int i, int j) const { return g[static_cast<size_t>(i) * m + j]; }
    CoefficientField& A(int i, int j) { return a[static_cast<size_t>(i) * m + j]; }
    const CoefficientField& A(int i, int j) const { return a[static_cast<size_t>(i) * m + j]; }

    bool all_fields_constant() const {
        for (const auto& f : d) if (!f.is_constant()) return false;
        for (const auto& f : g) if (!f.is_constant()) return false;
        for (const auto& f : a) if (!f.is_constant()) return false;
        return true;
    }
};

}  // namespace nullctrl
