#pragma once

#include <cmath>
#include <vector>

#include "trieig/control.hpp"
#include "trieig/errors.hpp"
#include "trieig/model.hpp"
#include "trieig/perron.hpp"
#include "trieig/spectral.hpp"

namespace trieig {

/// A point of the simplex S = { y >= 0 : <m,y> = 1 }.
struct SimplexPoint {
    Vec3 y;
};

/// Projection x -> x / <m,x> onto the simplex.
inline SimplexPoint project(const ModelParams& p, const Vec3& x) {
    if (min_coeff(x) < 0.0)
        throw validation_error("project: input must be componentwise nonnegative");
    const double mx = dot(p.m, x);
    if (!(mx > 0.0)) throw validation_error("project: cannot project the zero vector");
    return {x / mx};
}

/// Projected vector field b(y, alpha) = (G + alpha F) y - <m, G y> y.
/// Tangent to the simplex: <m, b> = 0 whenever <m,y> = 1.
inline Vec3 field_b(const ModelParams& p, const Vec3& y, double alpha) {
    return p.system_matrix(alpha) * y - p.reward(y) * y;
}

/// The cubic whose zero level set on S is the eigenvector curve Phi_0:
/// phi(y) = <G y - <m,Gy> y, Theta(F y)>. Independent of alpha because the
/// alpha F y contribution is Theta-orthogonal to itself.
inline double phi_cubic(const ModelParams& p, const Vec3& y) {
    const Vec3 drift = p.G * y - p.reward(y) * y;
    return dot(drift, theta_rotate_unchecked(p.F * y, p.m));
}

/// Time-stamped simplex path with its control trace and per-step
/// diagnostics.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<Vec3> points;
    std::vector<double> control;     ///< alpha used on each step (size = times.size()-1 entries padded)
    std::vector<double> phi_values;  ///< phi_cubic along the path
    double max_drift_rate = 0.0;     ///< max |<m,y>-1| per unit time before renormalization
    bool renormalized = true;

    const Vec3& back() const { return points.back(); }
};

namespace detail {

inline Vec3 rk4_state_step(const ModelParams& p, const Vec3& y, double alpha, double dt) {
    const Vec3 k1 = field_b(p, y, alpha);
    const Vec3 k2 = field_b(p, y + (0.5 * dt) * k1, alpha);
    const Vec3 k3 = field_b(p, y + (0.5 * dt) * k2, alpha);
    const Vec3 k4 = field_b(p, y + dt * k3, alpha);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace detail

struct IntegrateOptions {
    double dt = 1e-3;
    bool renormalize = true;    ///< divide by <m,y> after each step (logged either way)
    int record_stride = 1;      ///< keep every k-th point
    double positivity_floor = -1e-6; ///< flag if any coordinate falls below this
};

/// RK4 integration of dy/dt = b(y, alpha(t)) on the simplex. Feedback
/// controls are evaluated on the current state; time controls on the step's
/// left endpoint (consistent with piecewise-constant-left sampling).
inline TrajectoryRecord integrate(const ModelParams& p, const Vec3& y0,
                                  const ControlSignal& control, double T,
                                  const IntegrateOptions& opt = {}) {
    if (!(opt.dt > 0.0) || !(T >= 0.0))
        throw validation_error("integrate: need dt > 0 and T >= 0");
    TrajectoryRecord rec;
    rec.renormalized = opt.renormalize;
    const long n = static_cast<long>(std::llround(T / opt.dt));
    rec.times.reserve(n / opt.record_stride + 2);
    rec.points.reserve(n / opt.record_stride + 2);
    Vec3 y = y0 / dot(p.m, y0);
    rec.times.push_back(0.0);
    rec.points.push_back(y);
    rec.phi_values.push_back(phi_cubic(p, y));
    for (long k = 0; k < n; ++k) {
        const double alpha = control.is_feedback() ? control.eval_state(y)
                                                   : control.eval(k * opt.dt);
        y = detail::rk4_state_step(p, y, alpha, opt.dt);
        const double my = dot(p.m, y);
        rec.max_drift_rate = std::max(rec.max_drift_rate, std::abs(my - 1.0) / opt.dt);
        if (opt.renormalize) y = y / my;
        if (min_coeff(y) < opt.positivity_floor)
            throw numerics_error("integrate: trajectory left the simplex (y < -1e-6); "
                                 "model or integrator bug");
        if ((k + 1) % opt.record_stride == 0 || k + 1 == n) {
            rec.times.push_back((k + 1) * opt.dt);
            rec.points.push_back(y);
            rec.control.push_back(alpha);
            rec.phi_values.push_back(phi_cubic(p, y));
        }
    }
    return rec;
}

/// Integrate with constant control until within `tol` of the equilibrium
/// e_target (or ||b|| <= 1e-9), recording the full path. Throws
/// geometry_error when T_max is exhausted first.
inline TrajectoryRecord integrate_to_equilibrium(const ModelParams& p, const Vec3& y0,
                                                 double alpha, const Vec3& e_target,
                                                 double tol = 1e-6, double dt = 1e-3,
                                                 double T_max = 200.0) {
    TrajectoryRecord rec;
    Vec3 y = y0 / dot(p.m, y0);
    rec.times.push_back(0.0);
    rec.points.push_back(y);
    rec.phi_values.push_back(phi_cubic(p, y));
    const long n_max = static_cast<long>(T_max / dt);
    for (long k = 0; k < n_max; ++k) {
        y = detail::rk4_state_step(p, y, alpha, dt);
        y = y / dot(p.m, y);
        rec.times.push_back((k + 1) * dt);
        rec.points.push_back(y);
        rec.control.push_back(alpha);
        rec.phi_values.push_back(phi_cubic(p, y));
        if (norm(y - e_target) <= tol || norm(field_b(p, y, alpha)) <= 1e-9) return rec;
    }
    throw geometry_error("integrate_to_equilibrium: no convergence within T_max = 200");
}

/// Perron eigenvector as a simplex point.
inline Vec3 perron_vector(const ModelParams& p, double alpha) {
    return eigen_triple(p, alpha).e[0];
}

/// Normalized nonnegative kernel vector of F (the alpha -> infinity limit
/// of e_alpha) when it exists.
inline Vec3 e_infinity(const ModelParams& p) {
    const Vec3 k = detail::null_direction(p.F);
    const double n2 = norm(k);
    if (n2 < 1e-12 * std::max(1.0, frobenius_norm(p.F)))
        throw numerics_error("e_infinity: F has no one-dimensional kernel");
    Vec3 v = k;
    if (v[0] + v[1] + v[2] < 0.0) v = -v;
    if (min_coeff(v) < -1e-10 * norm(v))
        throw numerics_error("e_infinity: kernel vector of F is not nonnegative");
    return v / dot(p.m, v);
}

/// The eigenvector curve Phi_0 = { e_alpha : alpha in [0, alpha_max] },
/// traced on a log-spaced alpha grid (plus alpha = 0 and, when F is
/// singular, the e_infinity endpoint).
struct Phi0Trace {
    std::vector<double> alphas; ///< parameter per point; last entry = +inf sentinel when e_inf appended
    std::vector<Vec3> points;
    bool has_e_infinity = false;
};

inline Phi0Trace trace_phi0(const ModelParams& p, double alpha_max, int n) {
    if (n < 2) throw validation_error("trace_phi0: need n >= 2");
    Phi0Trace out;
    out.alphas.reserve(n + 2);
    out.points.reserve(n + 2);
    // alpha = 0 endpoint: dominant eigenvector of G (nonnegative limit)
    out.alphas.push_back(0.0);
    out.points.push_back(eigen_triple(p, 0.0).e[0]);
    const double lo = std::max(1e-4, alpha_max * 1e-6);
    const double lr = std::log(alpha_max / lo);
    for (int i = 0; i < n; ++i) {
        const double al = lo * std::exp(lr * i / (n - 1));
        out.alphas.push_back(al);
        out.points.push_back(perron_vector(p, al));
    }
    const double fdet = std::abs(det(p.F));
    if (fdet < 1e-12 * std::max(1.0, std::pow(frobenius_norm(p.F), 3))) {
        out.alphas.push_back(std::numeric_limits<double>::infinity());
        out.points.push_back(e_infinity(p));
        out.has_e_infinity = true;
    }
    return out;
}

/// For a point z on (or near) Phi_0, the parameter beta with e_beta = z,
/// recovered from b(z,beta) = 0 componentwise on the largest |(Fz)_i|.
inline double eigencurve_parameter(const ModelParams& p, const Vec3& z) {
    const Vec3 g = p.G * z - p.reward(z) * z;
    const Vec3 f = p.F * z;
    int i = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(f[k]) > std::abs(f[i])) i = k;
    if (std::abs(f[i]) < 1e-14)
        throw numerics_error("eigencurve_parameter: F z = 0, parameter undefined");
    return -g[i] / f[i];
}

} // namespace trieig
