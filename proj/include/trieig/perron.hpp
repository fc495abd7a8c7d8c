#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "trieig/errors.hpp"
#include "trieig/model.hpp"
#include "trieig/spectral.hpp"

namespace trieig {

/// Dominant (Perron) eigenvalue of G + alpha F.
inline double lambda_P(const ModelParams& p, double alpha) {
    const CubicRoots r = solve_cubic(char_poly(p, alpha));
    // the dominant eigenvalue of a Metzler matrix is the largest real root
    double gap = std::min(r.real[0] - r.real[1], r.real[0] - r.real[2]);
    if (gap < 1e-10)
        throw degenerate_spectrum_error("lambda_P: dominant eigenvalue not simple");
    return r.real[0];
}

/// d lambda_P / d alpha = phi_alpha F e_alpha under the normalization
/// <m, e> = <phi, e> = 1.
inline double dlambda_P(const ModelParams& p, double alpha) {
    const SpectralTriple t = eigen_triple(p, alpha);
    return dot(t.phi[0], p.F * t.e[0]);
}

/// Second derivative via the spectral sum
///   2 sum_{i=2,3} (phi1 F e_i)(phi_i F e_1) / (lambda1 - lambda_i),
/// valid when G + alpha F is diagonalizable over the reals.
inline double d2lambda_P(const ModelParams& p, double alpha) {
    const SpectralTriple t = eigen_triple(p, alpha);
    if (t.complex_pair)
        throw degenerate_spectrum_error("d2lambda_P: spectrum has a complex pair");
    double s = 0.0;
    for (int i = 1; i < 3; ++i) {
        const double mu = t.lambdas[0].real() - t.lambdas[i].real();
        s += dot(t.phi[0], p.F * t.e[i]) * dot(t.phi[i], p.F * t.e[0]) / mu;
    }
    return 2.0 * s;
}

/// Result of maximizing lambda_P over constant controls. When the sampled
/// curve is monotone nondecreasing the supremum sits at the upper control
/// bound and `interior` is false.
struct PerronOptimum {
    double alpha_star = 0.0;
    double lambda_star = 0.0;
    bool interior = true;
    double boundary_alpha = 0.0; ///< where the sup was found when !interior
};

/// Scan [1e-3, 10 A] log-spaced (>= 200 points) to bracket the max, golden
/// section to 1e-6, then one Newton step on dlambda_P.
inline PerronOptimum optimize_perron(const ModelParams& p, int scan_points = 256) {
    const double lo = 1e-3, hi = 10.0 * p.A;
    scan_points = std::max(scan_points, 200);
    std::vector<double> as(scan_points), ls(scan_points);
    const double lr = std::log(hi / lo);
    int ibest = 0;
    for (int i = 0; i < scan_points; ++i) {
        as[i] = lo * std::exp(lr * i / (scan_points - 1));
        ls[i] = lambda_P(p, as[i]);
        if (ls[i] > ls[ibest]) ibest = i;
    }
    if (ibest == scan_points - 1 || ibest == 0) {
        // monotone (or sup beyond the scan): report the admissible boundary
        PerronOptimum out;
        out.interior = false;
        out.boundary_alpha = ibest == 0 ? p.a : p.A;
        out.alpha_star = out.boundary_alpha;
        out.lambda_star = lambda_P(p, out.boundary_alpha);
        return out;
    }

    double a = as[ibest - 1], b = as[ibest + 1];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = lambda_P(p, x1), f2 = lambda_P(p, x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a); f2 = lambda_P(p, x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a); f1 = lambda_P(p, x1);
        }
    }
    double alpha = 0.5 * (a + b);
    const double d2 = d2lambda_P(p, alpha);
    if (d2 < 0.0) {
        const double step = dlambda_P(p, alpha) / d2;
        if (std::isfinite(step) && std::abs(step) < (b - a)) alpha -= step;
    }
    PerronOptimum out;
    out.alpha_star = alpha;
    out.lambda_star = lambda_P(p, alpha);
    if (std::abs(dlambda_P(p, alpha)) > 1e-8)
        throw numerics_error("optimize_perron: stationarity |dlambda_P| <= 1e-8 not reached");
    return out;
}

enum class PerronMonotonicity { increasing_to_tau1, interior_max };

/// Alternative for the running-example family: an interior maximum exists
/// iff tau2 > 2 tau1; otherwise lambda_P increases from 0 to tau1. The
/// borderline tau2 = 2 tau1 classifies as increasing.
inline PerronMonotonicity classify_monotonicity(double tau1, double tau2) {
    return tau2 > 2.0 * tau1 ? PerronMonotonicity::interior_max
                             : PerronMonotonicity::increasing_to_tau1;
}

/// Sign checks backing real-diagonalizability of G + alpha F for the
/// running example with tau2 > 2 tau1: the characteristic polynomial is
/// negative at 0, positive at one of the probe points -alpha beta3, -tau2,
/// so it has three real roots lambda1 > 0 > lambda2 > lambda3.
struct DiagonalizabilityCheck {
    bool diagonalizable_real = false;
    bool ordered = false; ///< lambda1 > 0 > lambda2 > lambda3
    double P_at_zero = 0.0;
    double P_at_minus_alpha_beta3 = 0.0;
    double P_at_minus_tau2 = 0.0;
};

inline DiagonalizabilityCheck diagonalizable_real(const ModelParams& p,
                                                  const RunningExampleRates& r, double alpha) {
    DiagonalizabilityCheck out;
    out.P_at_zero = -alpha * r.tau1 * r.tau2 * r.beta3 - alpha * alpha * r.tau1 * r.beta2 * r.beta3;
    out.P_at_minus_alpha_beta3 = alpha * r.tau2 * r.beta3 * (alpha * r.beta3 - 2.0 * r.tau1);
    out.P_at_minus_tau2 = alpha * r.beta2 * (r.tau2 * r.tau2 + r.tau1 * r.tau2)
                        + alpha * r.beta3 * (r.tau2 * r.tau2 - 2.0 * r.tau1 * r.tau2)
                        - alpha * alpha * (r.tau1 + r.tau2) * r.beta2 * r.beta3;
    const bool sign_ok = out.P_at_zero < 0.0
                      && (out.P_at_minus_alpha_beta3 > 0.0 || out.P_at_minus_tau2 > 0.0);
    // cross-check against the actual root types
    const CubicRoots roots = solve_cubic(char_poly(p, alpha));
    out.diagonalizable_real = sign_ok && !roots.complex_pair;
    out.ordered = !roots.complex_pair && roots.real[0] > 0.0 && 0.0 > roots.real[1]
               && roots.real[1] > roots.real[2];
    return out;
}

/// Sampled lambda_P(alpha) with its derivative, for export and for the
/// monotonicity/unimodality property tests.
struct PerronCurve {
    std::vector<double> alphas;
    std::vector<double> values;
    std::vector<double> derivs;
    std::optional<PerronOptimum> optimum;
};

/// Log-spaced sample of the Perron curve on [alpha_min, alpha_max].
inline PerronCurve sample_perron_curve(const ModelParams& p, double alpha_min, double alpha_max,
                                       int n) {
    if (n < 2 || !(alpha_min > 0.0) || !(alpha_max > alpha_min))
        throw validation_error("sample_perron_curve: need n >= 2 and 0 < alpha_min < alpha_max");
    PerronCurve c;
    c.alphas.resize(n);
    c.values.resize(n);
    c.derivs.resize(n);
    const double lr = std::log(alpha_max / alpha_min);
    for (int i = 0; i < n; ++i) {
        c.alphas[i] = alpha_min * std::exp(lr * i / (n - 1));
        c.values[i] = lambda_P(p, c.alphas[i]);
        c.derivs[i] = dlambda_P(p, c.alphas[i]);
    }
    return c;
}

} // namespace trieig
