#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "trieig/control.hpp"
#include "trieig/errors.hpp"
#include "trieig/model.hpp"
#include "trieig/perron.hpp"
#include "trieig/spectral.hpp"

namespace trieig {

struct FloquetResult {
    double lambda_F = 0.0;
    Mat3 monodromy;
    double dominant_multiplier = 0.0;
    double theta = 0.0;
    long steps = 0;
    double step_size = 0.0;
};

namespace detail {

/// One classical RK4 step of X' = M(t) X.
inline Mat3 rk4_matrix_step(const Mat3& X, double t, double h,
                            const std::function<Mat3(double)>& M) {
    const Mat3 k1 = M(t) * X;
    const Mat3 k2 = M(t + 0.5 * h) * (X + (0.5 * h) * k1);
    const Mat3 k3 = M(t + 0.5 * h) * (X + (0.5 * h) * k2);
    const Mat3 k4 = M(t + h) * (X + h * k3);
    return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_finite(const Mat3& X) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (!std::isfinite(X(i, j)))
                throw numerics_error("monodromy: non-finite fundamental solution");
}

/// Step bound keeping h * ||G + alpha F|| small; the dominant-multiplier
/// error of RK4 scales like (h ||M||)^4 per unit time.
inline double monodromy_step(const ModelParams& p, double alpha_max, double theta) {
    const double rho = row_sum_norm(p.G) + std::abs(alpha_max) * row_sum_norm(p.F);
    double h = std::min(theta / 2000.0, 1e-3);
    if (rho > 0.0) h = std::min(h, 0.02 / rho);
    if (!(h > 0.0) || theta / h > 5e8)
        throw numerics_error("monodromy: step size underflow");
    return h;
}

} // namespace detail

/// Fundamental solution Phi(theta) of X' = (G + alpha(t) F) X, X(0) = I.
/// Piecewise-constant periodic controls are integrated piece by piece so no
/// RK4 stage straddles a jump; smooth controls use plain fixed-step RK4.
inline FloquetResult monodromy(const ModelParams& p, const ControlSignal& control,
                               double theta = 0.0) {
    if (control.kind() == ControlSignal::Kind::periodic)
        theta = control.period();
    else if (control.kind() == ControlSignal::Kind::constant && theta <= 0.0)
        theta = 1.0;
    if (!(theta > 0.0))
        throw validation_error("monodromy: control must be periodic (or supply theta)");

    double alpha_max = 1.0;
    if (control.kind() == ControlSignal::Kind::constant)
        alpha_max = std::abs(control.eval(0.0));
    else
        for (double v : control.samples()) alpha_max = std::max(alpha_max, std::abs(v));

    const double h_max = detail::monodromy_step(p, alpha_max, theta);
    FloquetResult out;
    out.theta = theta;
    Mat3 X = Mat3::identity();

    if (control.kind() == ControlSignal::Kind::constant) {
        const Mat3 M = p.system_matrix(control.eval(0.0));
        const long n = static_cast<long>(std::ceil(theta / h_max));
        const double h = theta / static_cast<double>(n);
        auto Mf = [&](double) { return M; };
        for (long k = 0; k < n; ++k) X = detail::rk4_matrix_step(X, 0.0, h, Mf);
        out.steps = n;
        out.step_size = h;
    } else {
        const auto& vals = control.samples();
        const bool piecewise = control.kind() == ControlSignal::Kind::periodic && !vals.empty();
        if (piecewise) {
            // constant-coefficient RK4 inside each sample piece
            const std::size_t np = vals.size();
            const double piece = theta / static_cast<double>(np);
            for (std::size_t i = 0; i < np; ++i) {
                const Mat3 M = p.system_matrix(vals[i]);
                auto Mf = [&](double) { return M; };
                const long n = static_cast<long>(std::ceil(piece / h_max));
                const double h = piece / static_cast<double>(n);
                for (long k = 0; k < n; ++k) X = detail::rk4_matrix_step(X, 0.0, h, Mf);
                out.steps += n;
                out.step_size = h;
            }
        } else {
            auto Mf = [&](double t) { return p.system_matrix(control.eval(t)); };
            const long n = static_cast<long>(std::ceil(theta / h_max));
            const double h = theta / static_cast<double>(n);
            for (long k = 0; k < n; ++k) X = detail::rk4_matrix_step(X, k * h, h, Mf);
            out.steps = n;
            out.step_size = h;
        }
    }
    detail::check_finite(X);
    out.monodromy = X;
    return out;
}

/// Floquet exponent: log of the dominant multiplier of the monodromy matrix
/// divided by the period. For constant controls this reduces to lambda_P.
inline FloquetResult lambda_F_full(const ModelParams& p, const ControlSignal& control,
                                   double theta = 0.0) {
    FloquetResult out = monodromy(p, control, theta);
    const CubicRoots mult = solve_cubic(char_poly(out.monodromy));
    const double mod_pair = mult.complex_pair
        ? std::hypot(mult.real[1], mult.imag)
        : std::max(std::abs(mult.real[1]), std::abs(mult.real[2]));
    const double dominant = mult.real[0];
    if (!(dominant > 0.0) || dominant - mod_pair < 1e-10 * std::max(1.0, dominant))
        throw numerics_error("lambda_F: dominant Floquet multiplier not real positive simple");
    out.dominant_multiplier = dominant;
    out.lambda_F = std::log(dominant) / out.theta;
    return out;
}

inline double lambda_F(const ModelParams& p, const ControlSignal& control, double theta = 0.0) {
    return lambda_F_full(p, control, theta).lambda_F;
}

/// Periodic function given by samples at i * theta / (n - 1), endpoints
/// included (values.front() and values.back() both sit at the period seam).
struct PeriodicSamples {
    double theta = 0.0;
    std::vector<double> values;

    /// Trapezoid time average over one period.
    double mean() const {
        const std::size_t n = values.size();
        double s = 0.5 * (values.front() + values.back());
        for (std::size_t i = 1; i + 1 < n; ++i) s += values[i];
        return s / static_cast<double>(n - 1);
    }
    double mean_product(const PeriodicSamples& o) const {
        const std::size_t n = values.size();
        double s = 0.5 * (values.front() * o.values.front() + values.back() * o.values.back());
        for (std::size_t i = 1; i + 1 < n; ++i) s += values[i] * o.values[i];
        return s / static_cast<double>(n - 1);
    }
};

inline PeriodicSamples sample_periodic(const std::function<double(double)>& f, double theta,
                                       int n_nodes) {
    PeriodicSamples s;
    s.theta = theta;
    s.values.resize(n_nodes + 1);
    for (int i = 0; i <= n_nodes; ++i)
        s.values[i] = f(theta * i / n_nodes);
    return s;
}

/// The unique theta-periodic solution of gamma_i'/mu + gamma_i = gamma.
/// gamma is read as piecewise linear between nodes, for which the
/// exponential update below is exact; the periodic value at t=0 is the
/// closed-form convolution gamma_i(0) = mu int_0^theta e^{-mu(theta-s)}
/// gamma(s) ds / (1 - e^{-mu theta}).
inline PeriodicSamples gamma_i(const std::function<double(double)>& gamma, double mu,
                               double theta, int n_nodes = 4000) {
    if (!(mu > 0.0)) throw validation_error("gamma_i: relaxation rate mu must be positive");
    if (!(theta > 0.0)) throw validation_error("gamma_i: period must be positive");
    const double h = theta / n_nodes;
    const double E = std::exp(-mu * h);
    // exact one-step weights for a linear source on [0,h]
    const double I1 = 1.0 - E;                 // weight of the constant part
    const double I2 = 1.0 - (1.0 - E) / (mu * h); // extra weight of the right node
    std::vector<double> g(n_nodes + 1);
    for (int i = 0; i <= n_nodes; ++i) g[i] = gamma(theta * i / n_nodes);

    double conv = 0.0; // e^{-mu theta}-weighted convolution, built left to right
    for (int k = 0; k < n_nodes; ++k)
        conv = conv * E + g[k] * (I1 - I2) + g[k + 1] * I2;
    const double denom = 1.0 - std::exp(-mu * theta);
    if (denom <= 0.0) throw numerics_error("gamma_i: periodic fixed point ill-posed");
    const double gi0 = conv / denom;

    PeriodicSamples out;
    out.theta = theta;
    out.values.resize(n_nodes + 1);
    out.values[0] = gi0;
    for (int k = 0; k < n_nodes; ++k)
        out.values[k + 1] = out.values[k] * E + g[k] * (I1 - I2) + g[k + 1] * I2;
    return out;
}

/// d lambda_F(alpha + eps gamma)/d eps at eps = 0: <gamma>_theta *
/// dlambda_P(alpha). Vanishes at the Perron maximizer.
inline double first_directional(const ModelParams& p, double alpha_star,
                                const std::function<double(double)>& gamma, double theta,
                                int n_nodes = 4000) {
    const PeriodicSamples g = sample_periodic(gamma, theta, n_nodes);
    return g.mean() * dlambda_P(p, alpha_star);
}

/// Second directional derivative of lambda_F at the constant control
/// alpha_star in direction gamma:
///   2 sum_{i=2,3} <gamma_i^2>_theta (phi1 F e_i)(phi_i F e_1) / (lambda1 - lambda_i).
inline double second_directional(const ModelParams& p, double alpha_star,
                                 const std::function<double(double)>& gamma, double theta,
                                 int n_nodes = 4000) {
    const SpectralTriple t = eigen_triple(p, alpha_star);
    if (t.complex_pair)
        throw degenerate_spectrum_error("second_directional: spectrum has a complex pair");
    double s = 0.0;
    for (int i = 1; i < 3; ++i) {
        const double mu = t.lambdas[0].real() - t.lambdas[i].real();
        const PeriodicSamples gi = gamma_i(gamma, mu, theta, n_nodes);
        s += gi.mean_product(gi) * dot(t.phi[0], p.F * t.e[i]) * dot(t.phi[i], p.F * t.e[0]) / mu;
    }
    return 2.0 * s;
}

/// Liouville check value: det Phi(theta) should equal
/// exp(int_0^theta trace(G + alpha(t) F) dt).
inline double liouville_determinant(const ModelParams& p, const ControlSignal& control,
                                    double theta, int n_nodes = 20000) {
    double tr = 0.0;
    const double h = theta / n_nodes;
    for (int i = 0; i <= n_nodes; ++i) {
        const double w = (i == 0 || i == n_nodes) ? 0.5 : 1.0;
        tr += w * trace(p.system_matrix(control.eval(i * h)));
    }
    return std::exp(tr * h);
}

} // namespace trieig
