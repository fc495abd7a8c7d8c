#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "trieig/control.hpp"
#include "trieig/ergodic.hpp"
#include "trieig/errors.hpp"
#include "trieig/grid.hpp"
#include "trieig/model.hpp"
#include "trieig/perron.hpp"
#include "trieig/simplex.hpp"
#include "trieig/spectral.hpp"

namespace trieig {

/// Pointwise Hamiltonian H(y,p) = max_{alpha in [a,A]} { <b(y,alpha), p>_chart + L(y) }.
/// Affinity in alpha collapses the max onto the endpoints {a, A}; the tie
/// <Fy,p> = 0 resolves to A.
struct HamiltonianValue {
    double value = 0.0;
    double argmax_alpha = 0.0;
};

inline HamiltonianValue hamiltonian(const ModelParams& p, const Vec3& y, double p1, double p2) {
    const double L = p.reward(y);
    const Vec3 ba = field_b(p, y, p.a);
    const Vec3 fy = p.F * y;
    const double base = ba[0] * p1 + ba[1] * p2;
    const double slope = fy[0] * p1 + fy[1] * p2; // d<b,p>/dalpha
    HamiltonianValue h;
    if (slope < 0.0) {
        h.value = base + L;
        h.argmax_alpha = p.a;
    } else {
        h.value = base + (p.A - p.a) * slope + L;
        h.argmax_alpha = p.A;
    }
    return h;
}

/// Monotone upwind discretization of the HJB Hamiltonian on the masked
/// chart grid, with everything sign-dependent precomputed per node.
///
/// For each candidate control the drift picks the forward difference where
/// it is positive and the backward difference where it is negative. A
/// boundary node whose upwind neighbor falls outside the mask contributes
/// zero in that direction instead of switching sides: the switched side
/// would enter the update with a negative weight and break monotonicity,
/// which the scheme promises (see `upwind_drop_count` for how often this
/// fires; the flow points inward, so the affected values never feed the
/// interior).
class UpwindScheme {
public:
    UpwindScheme(const ModelParams& params, const SimplexGrid& grid)
        : p_(params), g_(grid) {
        const int n1 = g_.n1(), n2 = g_.n2();
        const double dy = g_.dy();
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < n2; ++j) {
                if (!g_.in_mask(i, j)) continue;
                Node nd;
                nd.self = static_cast<std::int32_t>(g_.idx(i, j));
                const Vec3 y = g_.node(i, j);
                nd.L = p_.reward(y);
                const Vec3 ba = field_b(p_, y, p_.a);
                const Vec3 bA = field_b(p_, y, p_.A);
                setup_branch(nd.br[0], ba, i, j, dy);
                setup_branch(nd.br[1], bA, i, j, dy);
                for (const Vec3& b : {ba, bA}) {
                    max_inf_ = std::max({max_inf_, std::abs(b[0]), std::abs(b[1])});
                    max_l1_ = std::max(max_l1_, std::abs(b[0]) + std::abs(b[1]));
                }
                nodes_.push_back(nd);
            }
        }
    }

    const SimplexGrid& grid() const { return g_; }
    const ModelParams& params() const { return p_; }

    /// max over nodes and candidate controls of max(|b1|,|b2|); the CFL
    /// certificate is dt * max_drift_inf() / dy <= 1.
    double max_drift_inf() const { return max_inf_; }
    double max_drift_l1() const { return max_l1_; }
    long upwind_drop_count() const { return drop_count_; }

    double cfl_ratio(double dt) const { return dt * max_inf_ / g_.dy(); }

    void require_cfl(double dt) const {
        if (cfl_ratio(dt) > 1.0 + 1e-12)
            throw cfl_error("UpwindScheme: dt * max|b| / dy = " + std::to_string(cfl_ratio(dt))
                            + " > 1");
    }

    /// u_out = u_in + dt * (max_alpha H_num(u_in) + (-eps) u_in). Jacobi
    /// update: u_out must not alias u_in.
    void step(const std::vector<double>& u_in, std::vector<double>& u_out, double dt,
              double eps = 0.0) const {
        for (const Node& nd : nodes_) {
            const double va = branch_value(nd.br[0], u_in);
            const double vA = branch_value(nd.br[1], u_in);
            const double h = (va > vA ? va : vA) + nd.L;
            const double u = u_in[nd.self];
            u_out[nd.self] = u + dt * (h - eps * u);
        }
    }

    /// Max |update| of one step without committing it (residual probe).
    double sup_update(const std::vector<double>& u, double dt, double eps = 0.0) const {
        double worst = 0.0;
        for (const Node& nd : nodes_) {
            const double va = branch_value(nd.br[0], u);
            const double vA = branch_value(nd.br[1], u);
            const double h = (va > vA ? va : vA) + nd.L;
            worst = std::max(worst, std::abs(dt * (h - eps * u[nd.self])));
        }
        return worst;
    }

    /// Per-node argmax control and the one-sided gradient the winning
    /// branch used, evaluated on a given field (feedback-policy data).
    struct PolicyNode {
        std::int32_t self = 0;
        double alpha = 0.0;
        double gx = 0.0, gy = 0.0;
    };

    std::vector<PolicyNode> policy(const std::vector<double>& u) const {
        std::vector<PolicyNode> out;
        out.reserve(nodes_.size());
        for (const Node& nd : nodes_) {
            const double va = branch_value(nd.br[0], u);
            const double vA = branch_value(nd.br[1], u);
            PolicyNode pn;
            pn.self = nd.self;
            const Branch& b = va > vA ? nd.br[0] : nd.br[1];
            pn.alpha = va > vA ? p_.a : p_.A;
            pn.gx = b.c1 == 0.0 ? 0.0 : (u[b.x1] - u[b.x0]) / g_.dy();
            pn.gy = b.c2 == 0.0 ? 0.0 : (u[b.y1] - u[b.y0]) / g_.dy();
            out.push_back(pn);
        }
        return out;
    }

private:
    struct Branch {
        double c1 = 0.0, c2 = 0.0;              // drift / dy (zero when direction dropped)
        std::int32_t x0 = 0, x1 = 0, y0 = 0, y1 = 0; // gradient = u[x1]-u[x0] etc.
    };
    struct Node {
        std::int32_t self = 0;
        double L = 0.0;
        Branch br[2];
    };

    void setup_branch(Branch& b, const Vec3& drift, int i, int j, double dy) {
        const std::int32_t self = static_cast<std::int32_t>(g_.idx(i, j));
        b.x0 = b.x1 = b.y0 = b.y1 = self;
        if (drift[0] > 0.0) {
            if (g_.in_mask(i + 1, j)) {
                b.c1 = drift[0] / dy;
                b.x0 = self;
                b.x1 = static_cast<std::int32_t>(g_.idx(i + 1, j));
            } else ++drop_count_;
        } else if (drift[0] < 0.0) {
            if (g_.in_mask(i - 1, j)) {
                b.c1 = drift[0] / dy;
                b.x0 = static_cast<std::int32_t>(g_.idx(i - 1, j));
                b.x1 = self;
            } else ++drop_count_;
        }
        if (drift[1] > 0.0) {
            if (g_.in_mask(i, j + 1)) {
                b.c2 = drift[1] / dy;
                b.y0 = self;
                b.y1 = static_cast<std::int32_t>(g_.idx(i, j + 1));
            } else ++drop_count_;
        } else if (drift[1] < 0.0) {
            if (g_.in_mask(i, j - 1)) {
                b.c2 = drift[1] / dy;
                b.y0 = static_cast<std::int32_t>(g_.idx(i, j - 1));
                b.y1 = self;
            } else ++drop_count_;
        }
    }

    double branch_value(const Branch& b, const std::vector<double>& u) const {
        return b.c1 * (u[b.x1] - u[b.x0]) + b.c2 * (u[b.y1] - u[b.y0]);
    }

    ModelParams p_;
    SimplexGrid g_;
    std::vector<Node> nodes_;
    double max_inf_ = 0.0, max_l1_ = 0.0;
    long drop_count_ = 0;
};

/// One explicit step of the time-dependent scheme (convenience wrapper;
/// hot loops should hold an UpwindScheme).
inline GridField step_time_dependent(const SimplexGrid& g, const GridField& f,
                                     const ModelParams& p, double dt) {
    UpwindScheme scheme(p, g);
    scheme.require_cfl(dt);
    GridField out(g);
    scheme.step(f.v, out.v, dt);
    out.stamp = f.stamp + dt;
    return out;
}

/// Result of a time-dependent or discounted solve.
struct HjbRun {
    double dy = 0.0, dt = 0.0;
    double T = 0.0;    ///< horizon (time-dependent runs)
    double eps = 0.0;  ///< discount (discounted runs), 0 otherwise
    ChartPoint probe{0.3, 0.2};

    double lambda_ratio = 0.0; ///< u(T, y0) / T
    double lambda_slope = 0.0; ///< u(T, y0) - u(T-1, y0)
    GridField field;           ///< final field
    GridField field_prev;      ///< field at T-1 (time-dependent only)
    std::vector<double> probe_times;
    std::vector<double> probe_ratio; ///< u(t,y0)/t series

    long iterations = 0;
    double sup_update = 0.0;   ///< last |update|_inf (discounted)
    bool converged = false;    ///< discounted runs
    double eps_u_mean = 0.0, eps_u_min = 0.0, eps_u_max = 0.0;

    double cfl_ratio = 0.0;    ///< dt * max|b|_chart / dy, recorded certificate
    long upwind_drops = 0;
};

inline HjbRun run_time_dependent(const ModelParams& p, double dy, double dt, double T,
                                 ChartPoint probe = {0.3, 0.2}) {
    validate(p);
    if (!(T > 1.0)) throw validation_error("run_time_dependent: need T > 1");
    SimplexGrid g(p, dy);
    UpwindScheme scheme(p, g);
    scheme.require_cfl(dt);

    HjbRun run;
    run.dy = dy;
    run.dt = dt;
    run.T = T;
    run.probe = probe;
    run.cfl_ratio = scheme.cfl_ratio(dt);
    run.upwind_drops = scheme.upwind_drop_count();

    const auto [pi, pj] = g.nearest_node(probe.x, probe.y);
    if (!g.in_mask(pi, pj)) throw validation_error("run_time_dependent: probe outside simplex");
    const std::size_t probe_idx = g.idx(pi, pj);

    const long n = static_cast<long>(std::llround(T / dt));
    const long n_prev = static_cast<long>(std::llround((T - 1.0) / dt));
    const long series_stride = std::max(1L, n / 1000);
    std::vector<double> u(g.size(), 0.0), unext(g.size(), 0.0);
    GridField prev(g);
    for (long k = 0; k < n; ++k) {
        scheme.step(u, unext, dt);
        u.swap(unext);
        const double t = (k + 1) * dt;
        if (k + 1 == n_prev) {
            prev.v = u;
            prev.stamp = t;
        }
        if ((k + 1) % series_stride == 0 || k + 1 == n) {
            run.probe_times.push_back(t);
            run.probe_ratio.push_back(u[probe_idx] / t);
        }
    }
    run.field = GridField(g);
    run.field.v = std::move(u);
    run.field.stamp = T;
    run.field_prev = std::move(prev);
    run.iterations = n;
    run.lambda_ratio = run.field.v[probe_idx] / T;
    run.lambda_slope = run.field.v[probe_idx] - run.field_prev.v[probe_idx];
    return run;
}

/// Discounted stationary solve by pseudo-time marching of
/// u <- u + dt (-eps u + H_num(y, Du)) until |update|_inf <= tol.
inline HjbRun run_discounted(const ModelParams& p, double dy, double eps, double dt = 1e-3,
                             double tol = 1e-9, long max_iter = 50'000'000) {
    validate(p);
    if (!(eps > 0.0)) throw validation_error("run_discounted: need eps > 0");
    SimplexGrid g(p, dy);
    UpwindScheme scheme(p, g);
    scheme.require_cfl(dt);

    HjbRun run;
    run.dy = dy;
    run.dt = dt;
    run.eps = eps;
    run.cfl_ratio = scheme.cfl_ratio(dt);
    run.upwind_drops = scheme.upwind_drop_count();

    std::vector<double> u(g.size(), 0.0), unext(g.size(), 0.0);
    double sup = std::numeric_limits<double>::max();
    long k = 0;
    // checking the update norm every step would double the cost; monitor on
    // a short cadence and only then pay for an exact residual probe
    const long check_every = 64;
    while (k < max_iter) {
        for (long c = 0; c < check_every; ++c, ++k) {
            scheme.step(u, unext, dt, eps);
            u.swap(unext);
        }
        sup = scheme.sup_update(u, dt, eps);
        if (sup <= tol) break;
        if (!std::isfinite(sup)) throw numerics_error("run_discounted: non-finite update");
    }
    if (sup > tol)
        throw numerics_error("run_discounted: no convergence within iteration cap");

    run.iterations = k;
    run.sup_update = sup;
    run.converged = true;
    run.field = GridField(g);
    run.field.v = std::move(u);
    run.field.stamp = eps;

    double mn = std::numeric_limits<double>::max(), mx = std::numeric_limits<double>::lowest();
    double sum = 0.0;
    long cnt = 0;
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j)) {
                const double v = eps * run.field.at(g, i, j);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
                sum += v;
                ++cnt;
            }
    run.eps_u_min = mn;
    run.eps_u_max = mx;
    run.eps_u_mean = sum / cnt;
    return run;
}

/// Eigenvector readout of a time-dependent run: ubar = u(T,.) gauged to
/// ubar(y0) = 0, plus the separation line { <Fy, D ubar> = 0 } extracted by
/// marching squares on the nodal switching function.
struct EigenvectorExtract {
    GridField ubar;
    std::vector<std::pair<ChartPoint, ChartPoint>> separation; ///< contour segments
};

namespace detail {

/// Marching-squares zero-contour of nodal values s over cells fully in the
/// mask.
inline std::vector<std::pair<ChartPoint, ChartPoint>>
zero_contour(const SimplexGrid& g, const std::vector<double>& s) {
    std::vector<std::pair<ChartPoint, ChartPoint>> segs;
    const double dy = g.dy();
    for (int i = 0; i + 1 < g.n1(); ++i) {
        for (int j = 0; j + 1 < g.n2(); ++j) {
            if (!(g.in_mask(i, j) && g.in_mask(i + 1, j) && g.in_mask(i, j + 1)
                  && g.in_mask(i + 1, j + 1)))
                continue;
            const double v[4] = {s[g.idx(i, j)], s[g.idx(i + 1, j)], s[g.idx(i + 1, j + 1)],
                                 s[g.idx(i, j + 1)]};
            const ChartPoint c[4] = {{i * dy, j * dy},
                                     {(i + 1) * dy, j * dy},
                                     {(i + 1) * dy, (j + 1) * dy},
                                     {i * dy, (j + 1) * dy}};
            ChartPoint pts[4];
            int npts = 0;
            for (int k = 0; k < 4; ++k) {
                const double a = v[k], b = v[(k + 1) % 4];
                if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
                    const double t = a / (a - b);
                    pts[npts++] = {c[k].x + t * (c[(k + 1) % 4].x - c[k].x),
                                   c[k].y + t * (c[(k + 1) % 4].y - c[k].y)};
                }
            }
            if (npts == 2) segs.emplace_back(pts[0], pts[1]);
            else if (npts == 4) {
                // saddle cell: keep both crossings, pairing by edge order
                segs.emplace_back(pts[0], pts[1]);
                segs.emplace_back(pts[2], pts[3]);
            }
        }
    }
    return segs;
}

} // namespace detail

inline EigenvectorExtract extract_eigenvector(const ModelParams& p, const SimplexGrid& g,
                                              const HjbRun& run) {
    EigenvectorExtract out;
    out.ubar = run.field;
    const auto [pi, pj] = g.nearest_node(run.probe.x, run.probe.y);
    const double gauge = out.ubar.at(g, pi, pj);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j)) out.ubar.at(g, i, j) -= gauge;

    std::vector<double> s(g.size(), 0.0);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j) {
            if (!g.in_mask(i, j)) continue;
            const Vec3 fy = p.F * g.node(i, j);
            s[g.idx(i, j)] = fy[0] * gradient_x(g, out.ubar, i, j).best()
                           + fy[1] * gradient_y(g, out.ubar, i, j).best();
        }
    out.separation = detail::zero_contour(g, s);
    return out;
}

/// Bilinear interpolation over masked nodes with weight renormalization.
inline double bilinear_masked(const SimplexGrid& g, const std::vector<double>& f, double x,
                              double y) {
    const double dy = g.dy();
    int i = static_cast<int>(x / dy), j = static_cast<int>(y / dy);
    i = std::max(0, std::min(i, g.n1() - 2));
    j = std::max(0, std::min(j, g.n2() - 2));
    const double fx = x / dy - i, fy = y / dy - j;
    const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int ii[4] = {i, i + 1, i, i + 1};
    const int jj[4] = {j, j, j + 1, j + 1};
    double sum = 0.0, wsum = 0.0;
    for (int k = 0; k < 4; ++k)
        if (g.in_mask(ii[k], jj[k])) {
            sum += w[k] * f[g.idx(ii[k], jj[k])];
            wsum += w[k];
        }
    return wsum > 0.0 ? sum / wsum : 0.0;
}

struct OptimalTrajectory {
    TrajectoryRecord record;
    std::vector<double> moving_average; ///< control averaged over a 100*dt window
    double window = 0.0;
    double path_reward_average = 0.0;   ///< (1/T) int L(y(t)) dt
};

/// Closed-loop bang-bang integration of the feedback policy read from a
/// solved field: alpha(y) = a where <Fy, D ubar> < 0, A otherwise, with the
/// gradient bilinearly interpolated between nodes. Nodal gradients are
/// centered where both neighbors exist (one-sided at the mask boundary):
/// the upwind-selected differences carry an O(dy) bias that shifts the
/// switching locus and with it the chattering duty cycle, while the
/// centered stencil keeps the time-averaged control on the optimal value.
inline OptimalTrajectory optimal_trajectory(const ModelParams& p, const SimplexGrid& g,
                                            const GridField& u, const Vec3& y0, double T,
                                            double dt) {
    std::vector<double> gx(g.size(), 0.0), gy(g.size(), 0.0);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j)) {
                gx[g.idx(i, j)] = gradient_x(g, u, i, j).best();
                gy[g.idx(i, j)] = gradient_y(g, u, i, j).best();
            }
    ControlSignal feedback = ControlSignal::feedback([&p, &g, gx, gy](const Vec3& y) {
        const Vec3 fy = p.F * y;
        const double s = fy[0] * bilinear_masked(g, gx, y[0], y[1])
                       + fy[1] * bilinear_masked(g, gy, y[0], y[1]);
        return s < 0.0 ? p.a : p.A;
    });
    OptimalTrajectory out;
    IntegrateOptions opt;
    opt.dt = dt;
    out.record = integrate(p, y0, feedback, T, opt);

    const std::size_t w = 100;
    out.window = w * dt;
    const auto& ctrl = out.record.control;
    if (ctrl.size() >= w) {
        out.moving_average.reserve(ctrl.size() - w + 1);
        double acc = 0.0;
        for (std::size_t k = 0; k < ctrl.size(); ++k) {
            acc += ctrl[k];
            if (k + 1 >= w) {
                out.moving_average.push_back(acc / w);
                acc -= ctrl[k + 1 - w];
            }
        }
    }
    // trapezoid path average of the running reward
    const auto& pts = out.record.points;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        acc += 0.5 * (p.reward(pts[k]) + p.reward(pts[k + 1]))
             * (out.record.times[k + 1] - out.record.times[k]);
    out.path_reward_average = acc / (out.record.times.back() - out.record.times.front());
    return out;
}

/// Assessment of the explicit solution u(t,y) = lambda_P(A) t + log<phi_A, y>
/// available when lambda_P is nondecreasing up to A: on S (monotone family)
/// or on the subset S' (family increasing up to A with a finite conjugate
/// level A' > A, lambda_P(A') = lambda_P(A)).
struct ParticularSolutionReport {
    bool applicable = false;
    bool subdomain = false;     ///< true when restricted to S'
    double A_prime = std::numeric_limits<double>::infinity();
    double lambda_A = 0.0;

    bool check_positivity = false; ///< <Fy, phi_A> >= -1e-9 on the domain
    double min_inner = 0.0;

    bool check_residual = false;   ///< |H_num(log<phi_A,y>) - lambda_P(A)| within the local bound
    double worst_residual = 0.0;
    double worst_bound = 0.0;
    int residual_nodes = 0;

    bool check_levelsets = false;  ///< contour tangents align with m x phi_A
    double levelset_cosine = 0.0;

    bool all() const { return check_positivity && check_residual && check_levelsets; }
};

namespace detail {

/// Membership of y in S': the segment [y, e_inf] crosses Phi_0 at e_beta
/// with beta <= A_prime. Crossing located by sign change of phi_cubic.
inline bool in_s_prime(const ModelParams& p, const Vec3& y, const Vec3& einf, double A_prime,
                       int samples = 200) {
    const double phi_y = phi_cubic(p, y);
    double t_prev = 0.0, phi_prev = phi_y;
    for (int k = 1; k <= samples; ++k) {
        const double t = static_cast<double>(k) / samples * (1.0 - 1e-9);
        const Vec3 z = (1.0 - t) * y + t * einf;
        const double ph = phi_cubic(p, z);
        if ((phi_prev < 0.0 && ph >= 0.0) || (phi_prev >= 0.0 && ph < 0.0)) {
            double lo = t_prev, hi = t;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec3 zm = (1.0 - mid) * y + mid * einf;
                if ((phi_cubic(p, zm) < 0.0) == (phi_prev < 0.0)) lo = mid;
                else hi = mid;
            }
            const Vec3 zc = (1.0 - 0.5 * (lo + hi)) * y + 0.5 * (lo + hi) * einf;
            try {
                const double beta = eigencurve_parameter(p, zc);
                return beta <= A_prime * (1.0 + 1e-9);
            } catch (const numerics_error&) {
                return false; // crossing at e_inf itself
            }
        }
        t_prev = t;
        phi_prev = ph;
    }
    return false;
}

inline double levelset_alignment(const ModelParams& p, const SimplexGrid& g,
                                 const std::vector<double>& u, const Vec3& direction,
                                 const std::vector<double>& levels,
                                 const std::vector<std::uint8_t>* domain) {
    // length-weighted |cos| between contour segments and `direction`,
    // restricted to cells with a 2-cell in-mask (and in-domain) margin
    const Vec3 dir = direction / norm(direction);
    auto cell_ok = [&](int i, int j) {
        for (int di = -2; di <= 3; ++di)
            for (int dj = -2; dj <= 3; ++dj) {
                const int ii = i + di, jj = j + dj;
                if (!g.in_mask(ii, jj)) return false;
                if (domain && !(*domain)[g.idx(ii, jj)]) return false;
            }
        return true;
    };
    double num = 0.0, den = 0.0;
    const double dy = g.dy();
    for (double lvl : levels) {
        for (int i = 0; i + 1 < g.n1(); ++i) {
            for (int j = 0; j + 1 < g.n2(); ++j) {
                if (!cell_ok(i, j)) continue;
                const double v[4] = {u[g.idx(i, j)] - lvl, u[g.idx(i + 1, j)] - lvl,
                                     u[g.idx(i + 1, j + 1)] - lvl, u[g.idx(i, j + 1)] - lvl};
                const ChartPoint c[4] = {{i * dy, j * dy},
                                         {(i + 1) * dy, j * dy},
                                         {(i + 1) * dy, (j + 1) * dy},
                                         {i * dy, (j + 1) * dy}};
                ChartPoint pts[4];
                int npts = 0;
                for (int k = 0; k < 4; ++k) {
                    const double a = v[k], b = v[(k + 1) % 4];
                    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
                        const double t = a / (a - b);
                        pts[npts++] = {c[k].x + t * (c[(k + 1) % 4].x - c[k].x),
                                       c[k].y + t * (c[(k + 1) % 4].y - c[k].y)};
                    }
                }
                if (npts == 2) {
                    const double dx = pts[1].x - pts[0].x, dyv = pts[1].y - pts[0].y;
                    const Vec3 d3{dx, dyv, (-p.m[0] * dx - p.m[1] * dyv) / p.m[2]};
                    const double len = norm(d3);
                    if (len > 1e-12) {
                        num += std::abs(dot(d3, dir));
                        den += len;
                    }
                }
            }
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

} // namespace detail

struct ParticularSolutionOptions {
    double dy_checks = 1e-2;   ///< grid for the positivity / residual checks
    double dy_run = 5e-3;      ///< grid for the level-set confirmation run
    double dt_run = 5e-4;
    double T_run = 10.0;
    double cosine_threshold = 0.99;
};

inline ParticularSolutionReport
verify_particular_solution(const ModelParams& p, const ParticularSolutionOptions& opt = {}) {
    validate(p);
    ParticularSolutionReport rep;
    const PerronOptimum o = optimize_perron(p);
    rep.lambda_A = lambda_P(p, p.A);
    if (o.interior && o.alpha_star < p.A)
        throw validation_error("verify_particular_solution: lambda_P must be nondecreasing up "
                               "to A (interior maximum below A)");
    if (o.interior) {
        // increasing up to A, decreasing later: find the smallest A' > A with
        // lambda_P(A') = lambda_P(A)
        rep.subdomain = true;
        double lo = o.alpha_star, hi = std::max(10.0 * p.A, 10.0 * o.alpha_star);
        while (lambda_P(p, hi) > rep.lambda_A) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (lambda_P(p, mid) > rep.lambda_A ? lo : hi) = mid;
        }
        rep.A_prime = 0.5 * (lo + hi);
    }
    rep.applicable = true;

    const SpectralTriple tA = eigen_triple(p, p.A);
    const Vec3 phiA = tA.phi[0];
    const Vec3 einf = rep.subdomain ? e_infinity(p) : Vec3{};

    SimplexGrid g(p, opt.dy_checks);
    std::vector<std::uint8_t> domain(g.size(), 0);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j))
                domain[g.idx(i, j)] =
                    !rep.subdomain || detail::in_s_prime(p, g.node(i, j), einf, rep.A_prime);

    // (i) positivity of <Fy, phi_A> on the domain
    rep.min_inner = std::numeric_limits<double>::max();
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j) && domain[g.idx(i, j)])
                rep.min_inner = std::min(rep.min_inner, dot(p.F * g.node(i, j), phiA));
    rep.check_positivity = rep.min_inner >= -1e-9;

    // (ii) the analytic field log<phi_A, y> inserted into the discrete
    // Hamiltonian: residual against the local truncation bound
    // (dy/2) sum_d max_alpha |b_d| max_I |d^2 u| with the second derivatives
    // of log(c0 + c1 y1 + c2 y2) in closed form.
    const double c0 = phiA[2] / p.m[2];
    const double c1 = phiA[0] - phiA[2] * p.m[0] / p.m[2];
    const double c2 = phiA[1] - phiA[2] * p.m[1] / p.m[2];
    std::vector<double> uan(g.size(), 0.0);
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            if (g.in_mask(i, j)) uan[g.idx(i, j)] = std::log(dot(phiA, g.node(i, j)));
    rep.worst_residual = 0.0;
    rep.worst_bound = 0.0;
    const double dy = g.dy();
    for (int i = 1; i + 1 < g.n1(); ++i) {
        for (int j = 1; j + 1 < g.n2(); ++j) {
            if (!g.interior(i, j)) continue;
            if (rep.subdomain) {
                bool ok = domain[g.idx(i, j)] && domain[g.idx(i + 1, j)] && domain[g.idx(i - 1, j)]
                       && domain[g.idx(i, j + 1)] && domain[g.idx(i, j - 1)];
                if (!ok) continue;
            }
            const Vec3 y = g.node(i, j);
            // H_num with the same upwind rule the scheme applies
            double h = std::numeric_limits<double>::lowest();
            for (double al : {p.a, p.A}) {
                const Vec3 b = field_b(p, y, al);
                const double gxv = b[0] > 0.0 ? (uan[g.idx(i + 1, j)] - uan[g.idx(i, j)]) / dy
                                 : b[0] < 0.0 ? (uan[g.idx(i, j)] - uan[g.idx(i - 1, j)]) / dy
                                              : 0.0;
                const double gyv = b[1] > 0.0 ? (uan[g.idx(i, j + 1)] - uan[g.idx(i, j)]) / dy
                                 : b[1] < 0.0 ? (uan[g.idx(i, j)] - uan[g.idx(i, j - 1)]) / dy
                                              : 0.0;
                h = std::max(h, b[0] * gxv + b[1] * gyv);
            }
            h += p.reward(y);
            const double res = std::abs(h - rep.lambda_A);
            const double den = c0 + c1 * y[0] + c2 * y[1];
            const double den_min = den - (std::abs(c1) + std::abs(c2)) * dy;
            if (!(den_min > 0.0)) continue;
            const double uxx = c1 * c1 / (den_min * den_min);
            const double uyy = c2 * c2 / (den_min * den_min);
            const Vec3 ba = field_b(p, y, p.a), bA = field_b(p, y, p.A);
            const double bound = 0.5 * dy
                * (std::max(std::abs(ba[0]), std::abs(bA[0])) * uxx
                   + std::max(std::abs(ba[1]), std::abs(bA[1])) * uyy)
                + 1e-12;
            ++rep.residual_nodes;
            if (res > rep.worst_residual) {
                rep.worst_residual = res;
                rep.worst_bound = bound;
            }
            if (res > bound) {
                rep.check_residual = false;
                rep.worst_residual = res;
                rep.worst_bound = bound;
                return rep;
            }
        }
    }
    rep.check_residual = rep.residual_nodes > 0;

    // (iii) level sets of a time-dependent run align with m x phi_A
    {
        SimplexGrid gr(p, opt.dy_run);
        HjbRun run = run_time_dependent(p, opt.dy_run, opt.dt_run, opt.T_run);
        std::vector<std::uint8_t> dom_run(gr.size(), 1);
        if (rep.subdomain) {
            for (int i = 0; i < gr.n1(); ++i)
                for (int j = 0; j < gr.n2(); ++j)
                    if (gr.in_mask(i, j))
                        dom_run[gr.idx(i, j)] =
                            detail::in_s_prime(p, gr.node(i, j), einf, rep.A_prime);
        }
        std::vector<double> levels;
        for (auto [px, py] : {std::pair{0.3, 0.2}, {0.5, 0.1}, {0.2, 0.1}}) {
            const auto [i, j] = gr.nearest_node(px, py);
            if (gr.in_mask(i, j) && (!rep.subdomain || dom_run[gr.idx(i, j)]))
                levels.push_back(run.field.at(gr, i, j));
        }
        const Vec3 direction = cross(p.m, phiA);
        rep.levelset_cosine = detail::levelset_alignment(p, gr, run.field.v, direction, levels,
                                                         rep.subdomain ? &dom_run : nullptr);
        rep.check_levelsets = rep.levelset_cosine >= opt.cosine_threshold;
    }
    return rep;
}

} // namespace trieig
