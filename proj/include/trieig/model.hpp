#pragma once

#include <cmath>
#include <string>

#include "trieig/errors.hpp"
#include "trieig/linalg.hpp"

namespace trieig {

/// Growth/fragmentation model data: dx/dt = (G + alpha(t) F) x, reward
/// weights m with m^T F = 0, and control bounds a < A.
///
/// G and F must have nonnegative off-diagonal entries (Metzler), m must be
/// strictly positive. These are the standing structural assumptions; every
/// constructor path funnels through validate().
struct ModelParams {
    Mat3 G;
    Mat3 F;
    Vec3 m{1.0, 1.0, 1.0};
    double a = 0.0; ///< lower control bound (1/time)
    double A = 0.0; ///< upper control bound (1/time)

    Mat3 system_matrix(double alpha) const { return G + alpha * F; }

    /// Running reward L(y) = <m, G y> on the simplex.
    double reward(const Vec3& y) const { return dot(m, G * y); }
};

inline void validate(const ModelParams& p) {
    for (int i = 0; i < 3; ++i) {
        if (!(p.m[i] > 0.0))
            throw validation_error("ModelParams: m must be strictly positive");
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            if (p.G(i, j) < 0.0 || p.F(i, j) < 0.0)
                throw validation_error("ModelParams: off-diagonal entries of G and F must be >= 0");
        }
    }
    Vec3 mtF{dot(p.m, col(p.F, 0)), dot(p.m, col(p.F, 1)), dot(p.m, col(p.F, 2))};
    double scale = std::max(1.0, frobenius_norm(p.F) * norm(p.m));
    if (norm_inf(mtF) > 1e-12 * scale)
        throw validation_error("ModelParams: m^T F = 0 violated beyond 1e-12");
    if (!(p.a > 0.0) || !(p.A > p.a))
        throw validation_error("ModelParams: control bounds must satisfy 0 < a < A");
}

/// Three-compartment growth/fragmentation chain: growth tau1 (small ->
/// intermediate) and tau2 (intermediate -> large), fragmentation beta2,
/// beta3 redistributing mass downward, size weights m = (1, 2, 3).
/// m^T F = 0 holds identically by construction.
inline ModelParams build_running_example(double tau1, double tau2, double beta2, double beta3,
                                         double a = 1.0, double A = 6.0) {
    if (!(tau1 > 0.0) || !(tau2 > 0.0) || !(beta2 > 0.0) || !(beta3 > 0.0))
        throw validation_error("build_running_example: rates must be strictly positive");
    ModelParams p;
    p.G = Mat3{{{-tau1, 0.0, 0.0},
                {tau1, -tau2, 0.0},
                {0.0, tau2, 0.0}}};
    p.F = Mat3{{{0.0, 2.0 * beta2, beta3},
                {0.0, -beta2, beta3},
                {0.0, 0.0, -beta3}}};
    p.m = Vec3{1.0, 2.0, 3.0};
    p.a = a;
    p.A = A;
    validate(p);
    return p;
}

/// Rates of the running example, kept around so family-specific operations
/// (monotonicity classification, Appendix-style sign checks) can recover
/// tau/beta from an assembled model.
struct RunningExampleRates {
    double tau1, tau2, beta2, beta3;
};

/// Strong connectivity of the digraph with an edge i -> j whenever
/// M(j,i) != 0, i != j. Three nodes, so a tiny transitive closure does it.
inline bool irreducible(const Mat3& M) {
    bool reach[3][3] = {};
    for (int i = 0; i < 3; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < 3; ++j)
            if (i != j && M(j, i) != 0.0) reach[i][j] = true;
    }
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!reach[i][j]) return false;
    return true;
}

} // namespace trieig
