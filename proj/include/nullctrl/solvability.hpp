// The pointwise solvability algebra for the two-equation variable-coefficient
// case: the 6x6 matrix H(t,x) whose determinant gates algebraic solvability,
// the 7x7 matrix M acting on the derivative stack
//   (phi1, phi2, dx phi2, dt phi2, dxx phi2, dxt phi2, dxxx phi2),
// and two independent evaluation routes for det H (LU of the assembled matrix
// vs the explicit 28-term expansion).
//
// Note on normalization: det(M) = det(6x6 block) = g21 * detH(t,x) where detH
// is the value reported here; the reported value is the one with the compact
// closed form (kappa-constant case: kappa^3*(dx a22 - dxx g22); time-only
// case: g21*(g21*dt a21 - a21*dt g21)).

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coefficients.hpp"
#include "linalg.hpp"

namespace nullctrl {

// All t/x-partials of the four coupling coefficients and d2 that the matrix
// templates consume, evaluated at one point.
struct CouplingDerivatives {
    double a21, a21_x, a21_xx, a21_t;
    double g21, g21_x, g21_xx, g21_xxx, g21_t, g21_tx;
    double a22, a22_x;
    double g22, g22_x, g22_xx;
    double d2, d2_x, d2_xx;

    static CouplingDerivatives eval(const CoefficientSet& c, double t, double x) {
        if (c.m != 2) throw std::invalid_argument("solvability algebra needs m = 2");
        CouplingDerivatives v{};
        const CoefficientField& A21 = c.A(1, 0);
        const CoefficientField& G21 = c.G(1, 0);
        const CoefficientField& A22 = c.A(1, 1);
        const CoefficientField& G22 = c.G(1, 1);
        const CoefficientField& D2 = c.d[1];
        v.a21 = A21(t, x);
        v.a21_x = A21.partial(0, 1, t, x);
        v.a21_xx = A21.partial(0, 2, t, x);
        v.a21_t = A21.partial(1, 0, t, x);
        v.g21 = G21(t, x);
        v.g21_x = G21.partial(0, 1, t, x);
        v.g21_xx = G21.partial(0, 2, t, x);
        v.g21_xxx = G21.partial(0, 3, t, x);
        v.g21_t = G21.partial(1, 0, t, x);
        v.g21_tx = G21.partial(1, 1, t, x);
        v.a22 = A22(t, x);
        v.a22_x = A22.partial(0, 1, t, x);
        v.g22 = G22(t, x);
        v.g22_x = G22.partial(0, 1, t, x);
        v.g22_xx = G22.partial(0, 2, t, x);
        v.d2 = D2(t, x);
        v.d2_x = D2.partial(0, 1, t, x);
        v.d2_xx = D2.partial(0, 2, t, x);
        return v;
    }
};

using Mat6 = std::array<std::array<double, 6>, 6>;
using Mat7 = std::array<std::array<double, 7>, 7>;

inline Mat6 build_H(const CouplingDerivatives& v) {
    Mat6 H{};
    H[0] = {-v.a21 + v.g21_x, v.g21, 0, 0, 0, 0};
    H[1] = {-v.a21_x + v.g21_xx, -v.a21 + 2 * v.g21_x, 0, v.g21, 0, 0};
    H[2] = {-v.a21_t + v.g21_tx, v.g21_t, -v.a21 + v.g21_x, 0, v.g21, 0};
    H[3] = {-v.a21_xx + v.g21_xxx, -2 * v.a21_x + 3 * v.g21_xx, 0, -v.a21 + 3 * v.g21_x, 0, v.g21};
    H[4] = {-v.a22 + v.g22_x, v.g22 - v.d2_x, -1, -v.d2, 0, 0};
    H[5] = {-v.a22_x + v.g22_xx, -v.a22 + 2 * v.g22_x - v.d2_xx, 0, v.g22 - 2 * v.d2_x, -1, -v.d2};
    return H;
}

inline Mat6 build_H(const CoefficientSet& c, double t, double x) {
    return build_H(CouplingDerivatives::eval(c, t, x));
}

// M acting on the derivative stack; row 0 is the identity row and deleting
// row 0 / column 0 recovers H.
inline Mat7 build_derivative_stack_matrix(const CouplingDerivatives& v) {
    Mat7 M{};
    Mat6 H = build_H(v);
    M[0] = {1, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) M[i + 1][j + 1] = H[i][j];
    return M;
}

inline Mat7 build_derivative_stack_matrix(const CoefficientSet& c, double t, double x) {
    return build_derivative_stack_matrix(CouplingDerivatives::eval(c, t, x));
}

inline double det6(const Mat6& H) {
    std::vector<double> flat(36);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) flat[i * 6 + j] = H[i][j];
    return dense_det(flat, 6);
}

// LU route: det of the assembled 6x6 matrix, normalized by g21.
inline double det_H_numeric(const CoefficientSet& c, double t, double x) {
    CouplingDerivatives v = CouplingDerivatives::eval(c, t, x);
    if (v.g21 == 0.0) return 0.0;  // det(H) carries a g21 factor
    return det6(build_H(v)) / v.g21;
}

// Closed-form route: the explicit expansion, 28 terms.
inline double det_H_explicit(const CouplingDerivatives& v) {
    const double a21 = v.a21, a21x = v.a21_x, a21xx = v.a21_xx, a21t = v.a21_t;
    const double g21 = v.g21, g21x = v.g21_x, g21xx = v.g21_xx, g21xxx = v.g21_xxx;
    const double g21t = v.g21_t, g21tx = v.g21_tx;
    const double a22x = v.a22_x;
    const double g22 = v.g22, g22x = v.g22_x, g22xx = v.g22_xx;
    const double d2 = v.d2, d2x = v.d2_x, d2xx = v.d2_xx;
    return 2 * a21x * d2x * g21 * g21
         - 4 * a21x * d2 * g21x * g21
         + a21xx * d2 * g21 * g21
         + 2 * a21 * a21x * d2 * g21
         - a21x * g21 * g21 * g22
         + a21t * g21 * g21
         - 4 * a21 * d2x * g21x * g21
         + a21 * d2xx * g21 * g21
         + a21 * a21 * d2x * g21
         - 3 * a21 * d2 * g21xx * g21
         + 6 * a21 * d2 * g21x * g21x
         - 2 * a21 * a21 * d2 * g21x
         + a21 * g21x * g21 * g22
         - a21 * g21t * g21
         - a21 * g21 * g21 * g22x
         + a22x * g21 * g21 * g21
         - d2xx * g21x * g21 * g21
         - 2 * d2x * g21xx * g21 * g21
         + 3 * d2x * g21x * g21x * g21
         - d2 * g21xxx * g21 * g21
         + 5 * d2 * g21x * g21xx * g21
         - 4 * d2 * g21x * g21x * g21x
         + g21x * g21 * g21 * g22x
         + g21xx * g21 * g21 * g22
         - g21x * g21x * g21 * g22
         - g21tx * g21 * g21
         + g21x * g21t * g21
         - g21 * g21 * g21 * g22xx;
}

inline double det_H_explicit(const CoefficientSet& c, double t, double x) {
    return det_H_explicit(CouplingDerivatives::eval(c, t, x));
}

}  // namespace nullctrl
