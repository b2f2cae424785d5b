// Small linear algebra kernels: banded LU with partial pivoting (the one-step
// Crank-Nicolson systems are block-banded), dense LU for the pointwise
// operator-coefficient matrices, and a conjugate gradient driver.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace nullctrl {

// General banded matrix, kl sub- and ku super-diagonals, LAPACK-style band
// storage with kl extra rows of fill for the pivoted factorization.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1),
          a_(static_cast<size_t>(ld_) * n, 0.0) {}

    int size() const { return n_; }

    bool in_band(int i, int j) const {
        return i >= 0 && j >= 0 && i < n_ && j < n_ && j - i <= ku_ && i - j <= kl_;
    }
    // entry (i,j) lives at a_[(kl+ku+i-j) + j*ld]
    double& at(int i, int j) { return a_[static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }
    double at(int i, int j) const { return a_[static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }

    void add(int i, int j, double v) {
        if (!in_band(i, j)) throw std::logic_error("BandedMatrix::add outside band");
        at(i, j) += v;
    }

    void clear() { std::fill(a_.begin(), a_.end(), 0.0); factored_ = false; }

    // y = A x (only valid before factorization)
    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            int ilo = std::max(0, j - ku_), ihi = std::min(n_ - 1, j + kl_);
            double xj = x[j];
            for (int i = ilo; i <= ihi; ++i) y[i] += at(i, j) * xj;
        }
    }

    // In-place LU with row partial pivoting (band version of dgbtrf).
    void factor() {
        piv_.resize(n_);
        for (int j = 0; j < n_; ++j) {
            int ihi = std::min(n_ - 1, j + kl_);
            int p = j;
            double amax = std::abs(at(j, j));
            for (int i = j + 1; i <= ihi; ++i)
                if (std::abs(at(i, j)) > amax) { amax = std::abs(at(i, j)); p = i; }
            if (amax == 0.0) throw std::runtime_error("BandedMatrix::factor: singular matrix");
            piv_[j] = p;
            int jhi = std::min(n_ - 1, j + kl_ + ku_);
            if (p != j)
                for (int c = j; c <= jhi; ++c) std::swap(atf(j, c), atf(p, c));
            double pivv = atf(j, j);
            for (int i = j + 1; i <= ihi; ++i) {
                double l = atf(i, j) / pivv;
                atf(i, j) = l;
                for (int c = j + 1; c <= jhi; ++c) atf(i, c) -= l * atf(j, c);
            }
        }
        factored_ = true;
    }

    // Solve A x = b in place (after factor()).
    void solve(std::vector<double>& b) const {
        if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
            int ihi = std::min(n_ - 1, j + kl_);
            for (int i = j + 1; i <= ihi; ++i) b[i] -= atf(i, j) * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            int jhi = std::min(n_ - 1, j + kl_ + ku_);
            double s = b[j];
            for (int c = j + 1; c <= jhi; ++c) s -= atf(j, c) * b[c];
            b[j] = s / atf(j, j);
        }
    }

private:
    // factored storage: pivoting fills up to ku+kl above the diagonal
    double& atf(int i, int j) { return a_[static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }
    double atf(int i, int j) const { return a_[static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }

    int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
    std::vector<double> a_;
    std::vector<int> piv_;
    bool factored_ = false;
};

// Dense LU with partial pivoting for small n (operator-coefficient matrices).
class DenseLU {
public:
    explicit DenseLU(std::vector<double> a, int n) : n_(n), a_(std::move(a)), piv_(n) {
        det_ = 1.0;
        for (int j = 0; j < n_; ++j) {
            int p = j;
            double amax = std::abs(at(j, j));
            for (int i = j + 1; i < n_; ++i)
                if (std::abs(at(i, j)) > amax) { amax = std::abs(at(i, j)); p = i; }
            piv_[j] = p;
            if (p != j) {
                // swap the active part only; stored multipliers stay with the
                // step they were produced in, matching the interleaved solve
                for (int c = j; c < n_; ++c) std::swap(at(j, c), at(p, c));
                det_ = -det_;
            }
            double d = at(j, j);
            det_ *= d;
            if (d == 0.0) { singular_ = true; return; }
            for (int i = j + 1; i < n_; ++i) {
                double l = at(i, j) / d;
                at(i, j) = l;
                for (int c = j + 1; c < n_; ++c) at(i, c) -= l * at(j, c);
            }
        }
    }

    bool singular() const { return singular_; }
    double det() const { return singular_ ? 0.0 : det_; }

    void solve(std::vector<double>& b) const {
        if (singular_) throw std::runtime_error("DenseLU::solve: singular matrix");
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
            for (int i = j + 1; i < n_; ++i) b[i] -= at(i, j) * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            double s = b[j];
            for (int c = j + 1; c < n_; ++c) s -= at(j, c) * b[c];
            b[j] = s / at(j, j);
        }
    }

private:
    double& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    int n_;
    std::vector<double> a_;
    std::vector<int> piv_;
    double det_ = 0.0;
    bool singular_ = false;
};

inline double dense_det(const std::vector<double>& a, int n) { return DenseLU(a, n).det(); }

// Symmetric tridiagonal solve (Thomas), used by the inverse power iteration.
inline void tridiag_solve(std::vector<double>& diag_copy, const std::vector<double>& off,
                          std::vector<double>& b) {
    int n = static_cast<int>(diag_copy.size());
    for (int i = 1; i < n; ++i) {
        double w = off[i - 1] / diag_copy[i - 1];
        diag_copy[i] -= w * off[i - 1];
        b[i] -= w * b[i - 1];
    }
    b[n - 1] /= diag_copy[n - 1];
    for (int i = n - 2; i >= 0; --i) b[i] = (b[i] - off[i] * b[i + 1]) / diag_copy[i];
}

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Conjugate gradient for an SPD operator in the h-weighted inner product.
// apply(x, y) writes y = A x. x holds the initial guess on entry.
inline CgResult conjugate_gradient(
    const std::function<void(const GridFunction&, GridFunction&)>& apply,
    const GridFunction& rhs, GridFunction& x, double h, double tol, int max_iter) {
    CgResult res;
    GridFunction r = rhs, Ax(rhs.m, rhs.nx), p(rhs.m, rhs.nx), Ap(rhs.m, rhs.nx);
    double rhs_norm = norm_h(rhs, h);
    if (rhs_norm == 0.0) {
        x = GridFunction(rhs.m, rhs.nx);
        res.converged = true;
        return res;
    }
    apply(x, Ax);
    r -= Ax;
    p = r;
    double rr = dot_h(r, r, h);
    for (int it = 0; it < max_iter; ++it) {
        res.relative_residual = std::sqrt(rr) / rhs_norm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        apply(p, Ap);
        double pAp = dot_h(p, Ap, h);
        if (!(pAp > 0.0)) {
            // operator numerically indefinite; bail with current iterate
            res.iterations = it;
            return res;
        }
        double alpha = rr / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        double rr_new = dot_h(r, r, h);
        double beta = rr_new / rr;
        rr = rr_new;
        for (size_t k = 0; k < p.v.size(); ++k) p.v[k] = r.v[k] + beta * p.v[k];
        res.iterations = it + 1;
    }
    res.relative_residual = std::sqrt(rr) / rhs_norm;
    res.converged = res.relative_residual <= tol;
    return res;
}

}  // namespace nullctrl
