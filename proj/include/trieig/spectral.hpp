#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "trieig/errors.hpp"
#include "trieig/linalg.hpp"
#include "trieig/model.hpp"

namespace trieig {

/// Monic cubic X^3 + c2 X^2 + c1 X + c0.
struct CubicCoeffs {
    double c2, c1, c0;

    double eval(double x) const { return ((x + c2) * x + c1) * x + c0; }
    double deriv(double x) const { return (3.0 * x + 2.0 * c2) * x + c1; }
};

/// Coefficients of det(X I - M).
inline CubicCoeffs char_poly(const Mat3& M) {
    return {-trace(M), principal_minors_sum(M), -det(M)};
}

/// Characteristic polynomial of G + alpha F. For the running example this
/// expands to
///   X^3 + (tau1+tau2+alpha(beta2+beta3)) X^2
///       + (tau1 tau2 + alpha tau1 (beta3-beta2) + alpha^2 beta2 beta3) X
///       - alpha tau1 tau2 beta3 - alpha^2 tau1 beta2 beta3.
inline CubicCoeffs char_poly(const ModelParams& p, double alpha) {
    return char_poly(p.system_matrix(alpha));
}

struct CubicRoots {
    double real[3] = {0.0, 0.0, 0.0}; ///< real parts, real[0] always an actual real root
    double imag = 0.0;                ///< imaginary part of the pair (roots 1,2) if any
    bool complex_pair = false;
};

namespace detail {

inline double newton_polish(const CubicCoeffs& c, double x) {
    // Closed forms lose digits; a few Newton steps restore them.
    for (int it = 0; it < 5; ++it) {
        double f = c.eval(x);
        double df = c.deriv(x);
        if (df == 0.0) break;
        double step = f / df;
        double xn = x - step;
        if (!std::isfinite(xn) || std::abs(c.eval(xn)) >= std::abs(f)) break;
        x = xn;
    }
    return x;
}

} // namespace detail

/// Roots of a monic cubic: trigonometric form when all three roots are
/// real, Cardano otherwise, then Newton-polished.
inline CubicRoots solve_cubic(const CubicCoeffs& c) {
    // depressed cubic t^3 + p t + q_dep with x = t - s
    const double s = c.c2 / 3.0;
    const double p = c.c1 - c.c2 * s;
    const double q_dep = 2.0 * s * s * s - s * c.c1 + c.c0;
    const double disc = 0.25 * q_dep * q_dep + p * p * p / 27.0;

    CubicRoots r;
    if (disc <= 0.0) {
        // three real roots (trigonometric method)
        const double mp3 = std::max(-p / 3.0, 0.0);
        const double rad = std::sqrt(mp3);
        double cosarg = 0.0;
        if (rad > 0.0) cosarg = std::clamp(1.5 * q_dep / (p * rad), -1.0, 1.0);
        const double ang = std::acos(cosarg) / 3.0;
        const double two_pi_3 = 2.0 * 3.14159265358979323846 / 3.0;
        for (int k = 0; k < 3; ++k)
            r.real[k] = 2.0 * rad * std::cos(ang - two_pi_3 * k) - s;
        for (int k = 0; k < 3; ++k) r.real[k] = detail::newton_polish(c, r.real[k]);
        std::sort(r.real, r.real + 3, std::greater<double>());
    } else {
        // one real root (Cardano) + complex pair from deflation
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(-0.5 * q_dep + sq);
        const double v = std::cbrt(-0.5 * q_dep - sq);
        double x0 = detail::newton_polish(c, u + v - s);
        r.real[0] = x0;
        // deflate: X^2 + bX + cq
        const double b = c.c2 + x0;
        const double cq = c.c1 + x0 * b;
        const double d2 = b * b - 4.0 * cq;
        if (d2 >= 0.0) {
            // numerically a real pair after all
            double rt = std::sqrt(d2);
            double y0 = 0.5 * (-b + rt), y1 = 0.5 * (-b - rt);
            r.real[1] = detail::newton_polish(c, y0);
            r.real[2] = detail::newton_polish(c, y1);
            std::sort(r.real, r.real + 3, std::greater<double>());
        } else {
            r.complex_pair = true;
            r.real[1] = r.real[2] = -0.5 * b;
            r.imag = 0.5 * std::sqrt(-d2);
        }
    }
    return r;
}

/// Eigen-decomposition of a 3x3 real matrix, normalized the way the
/// eigenvalue-optimization formulas want it:
///   <m, e1> = 1, <phi1, e1> = 1, and <phi_i, e_i> = 1 for i = 2, 3.
/// e1/phi1 are the dominant (Perron) pair. For a complex pair only the
/// dominant eigenvectors are materialized and `complex_pair` is set.
struct SpectralTriple {
    std::complex<double> lambdas[3];
    Vec3 e[3];   ///< right eigenvectors (e[1], e[2] meaningful iff !complex_pair)
    Vec3 phi[3]; ///< left eigenvectors, same caveat
    double gap = 0.0; ///< min over i=2,3 of (lambda1 - Re lambda_i)
    bool complex_pair = false;

    double lambda1() const { return lambdas[0].real(); }
};

namespace detail {

/// Null-space direction of (M - lambda I) as the largest cross product of
/// two of its rows; exact in 3D and avoids dragging in an SVD.
inline Vec3 null_direction(const Mat3& A) {
    Vec3 r0 = row(A, 0), r1 = row(A, 1), r2 = row(A, 2);
    Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
    double n01 = dot(c01, c01), n02 = dot(c02, c02), n12 = dot(c12, c12);
    if (n01 >= n02 && n01 >= n12) return c01;
    if (n02 >= n12) return c02;
    return c12;
}

inline Mat3 shifted(const Mat3& M, double lambda) {
    Mat3 A = M;
    A(0, 0) -= lambda;
    A(1, 1) -= lambda;
    A(2, 2) -= lambda;
    return A;
}

} // namespace detail

inline SpectralTriple eigen_triple(const Mat3& M, const Vec3& m = Vec3{1.0, 1.0, 1.0}) {
    const CubicCoeffs pc = char_poly(M);
    const CubicRoots roots = solve_cubic(pc);

    SpectralTriple t;
    t.complex_pair = roots.complex_pair;
    if (roots.complex_pair) {
        t.lambdas[0] = roots.real[0];
        t.lambdas[1] = {roots.real[1], roots.imag};
        t.lambdas[2] = {roots.real[2], -roots.imag};
    } else {
        for (int k = 0; k < 3; ++k) t.lambdas[k] = roots.real[k];
    }
    t.gap = std::min(roots.real[0] - roots.real[1], roots.real[0] - roots.real[2]);
    if (t.gap < 1e-10)
        throw degenerate_spectrum_error("eigen_triple: dominant eigenvalue not simple (gap < 1e-10)");

    const double scale = std::max(1.0, frobenius_norm(M));
    const int n_real = roots.complex_pair ? 1 : 3;
    for (int k = 0; k < n_real; ++k) {
        const double lam = roots.real[k];
        Vec3 ev = detail::null_direction(detail::shifted(M, lam));
        Vec3 pv = detail::null_direction(detail::shifted(transpose(M), lam));
        if (norm(ev) < 1e-14 * scale || norm(pv) < 1e-14 * scale)
            throw degenerate_spectrum_error("eigen_triple: defective eigenvector at lambda");
        if (k == 0) {
            // Perron pair: orient positive, normalize <m,e1> = <phi1,e1> = 1.
            if (ev[0] + ev[1] + ev[2] < 0.0) ev = -ev;
            if (pv[0] + pv[1] + pv[2] < 0.0) pv = -pv;
            const double me = dot(m, ev);
            if (me == 0.0)
                throw degenerate_spectrum_error("eigen_triple: <m, e1> = 0, cannot normalize");
            ev = ev / me;
            const double pe = dot(pv, ev);
            if (pe == 0.0)
                throw degenerate_spectrum_error("eigen_triple: <phi1, e1> = 0, cannot normalize");
            pv = pv / pe;
        } else {
            // Unit right vector with a deterministic sign, then <phi_i,e_i> = 1.
            ev = ev / norm(ev);
            int imax = 0;
            for (int i = 1; i < 3; ++i)
                if (std::abs(ev[i]) > std::abs(ev[imax])) imax = i;
            if (ev[imax] < 0.0) ev = -ev;
            const double pe = dot(pv, ev);
            if (std::abs(pe) < 1e-13 * norm(pv))
                throw degenerate_spectrum_error("eigen_triple: near-defective pair, <phi_i,e_i> ~ 0");
            pv = pv / pe;
        }
        t.e[k] = ev;
        t.phi[k] = pv;
    }
    return t;
}

inline SpectralTriple eigen_triple(const ModelParams& p, double alpha) {
    return eigen_triple(p.system_matrix(alpha), p.m);
}

/// Residual ||M e - lambda e||; tests assert <= 1e-9 ||M||_F.
inline double eigen_residual(const Mat3& M, double lambda, const Vec3& e) {
    return norm(M * e - lambda * e);
}

/// Rotation by +pi/2 about m/|m| restricted to the tangent plane <m,v> = 0:
/// v -> (m/|m|) x v. Preserves the norm, squares to -Id on the plane. The
/// orientation convention is fixed here once; nothing downstream depends on
/// which of the two choices is made, only on consistency.
inline Vec3 theta_rotate(const Vec3& v, const Vec3& m) {
    const double tol = 1e-9 * std::max(1.0, norm(m) * norm(v));
    if (std::abs(dot(m, v)) > tol)
        throw validation_error("theta_rotate: input vector is not tangent (<m,v> != 0)");
    return cross(m / norm(m), v);
}

/// Unchecked variant for vectors tangent by construction (Fy, b(y,alpha)).
inline Vec3 theta_rotate_unchecked(const Vec3& v, const Vec3& m) {
    return cross(m / norm(m), v);
}

} // namespace trieig
