#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "trieig/errors.hpp"
#include "trieig/simplex.hpp"

namespace trieig {

/// Chart coordinates (y1, y2) of a simplex point; y3 is recovered from
/// <m,y> = 1.
struct ChartPoint {
    double x = 0.0, y = 0.0;
};

inline ChartPoint chart_of(const Vec3& v) { return {v[0], v[1]}; }

inline Vec3 unchart(const ModelParams& p, const ChartPoint& c) {
    return {c.x, c.y, (1.0 - p.m[0] * c.x - p.m[1] * c.y) / p.m[2]};
}

/// Closed polygonal region in chart coordinates with O(1) membership
/// queries through a coarse raster classified inside/outside/near-boundary.
class ClosedRegion {
public:
    ClosedRegion() = default;

    explicit ClosedRegion(std::vector<ChartPoint> loop, double raster_h = 2e-3)
        : loop_(std::move(loop)) {
        if (loop_.size() < 3) throw geometry_error("ClosedRegion: degenerate polygon");
        xmin_ = ymin_ = std::numeric_limits<double>::max();
        xmax_ = ymax_ = std::numeric_limits<double>::lowest();
        for (const auto& q : loop_) {
            xmin_ = std::min(xmin_, q.x); xmax_ = std::max(xmax_, q.x);
            ymin_ = std::min(ymin_, q.y); ymax_ = std::max(ymax_, q.y);
        }
        h_ = raster_h;
        nx_ = static_cast<int>((xmax_ - xmin_) / h_) + 3;
        ny_ = static_cast<int>((ymax_ - ymin_) / h_) + 3;
        cells_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
        // mark cells crossed by the boundary (plus one-cell halo) as "near"
        for (std::size_t k = 0; k + 1 < loop_.size(); ++k)
            mark_segment(loop_[k], loop_[k + 1]);
        mark_segment(loop_.back(), loop_.front());
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                auto& c = cells_[static_cast<std::size_t>(i) * ny_ + j];
                if (c == 2) continue;
                const ChartPoint ctr{xmin_ + (i + 0.5 - 1) * h_, ymin_ + (j + 0.5 - 1) * h_};
                c = winding_inside(ctr) ? 1 : 0;
            }
    }

    bool contains(const ChartPoint& q) const {
        if (q.x < xmin_ || q.x > xmax_ || q.y < ymin_ || q.y > ymax_) return false;
        const int i = static_cast<int>((q.x - xmin_) / h_) + 1;
        const int j = static_cast<int>((q.y - ymin_) / h_) + 1;
        const std::int8_t c = cells_[static_cast<std::size_t>(i) * ny_ + j];
        if (c == 0) return false;
        if (c == 1) return true;
        return winding_inside(q);
    }

    /// Distance to the boundary polyline (always >= 0).
    double boundary_distance(const ChartPoint& q) const {
        double best = std::numeric_limits<double>::max();
        for (std::size_t k = 0; k < loop_.size(); ++k) {
            const ChartPoint& A = loop_[k];
            const ChartPoint& B = loop_[(k + 1) % loop_.size()];
            best = std::min(best, seg_dist(q, A, B));
        }
        return best;
    }

    const std::vector<ChartPoint>& loop() const { return loop_; }

private:
    static double seg_dist(const ChartPoint& q, const ChartPoint& A, const ChartPoint& B) {
        const double vx = B.x - A.x, vy = B.y - A.y;
        const double wx = q.x - A.x, wy = q.y - A.y;
        const double vv = vx * vx + vy * vy;
        double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
        const double dx = wx - t * vx, dy = wy - t * vy;
        return std::sqrt(dx * dx + dy * dy);
    }

    bool winding_inside(const ChartPoint& q) const {
        // nonzero winding number over the closed loop
        int wn = 0;
        const std::size_t n = loop_.size();
        for (std::size_t k = 0; k < n; ++k) {
            const ChartPoint& A = loop_[k];
            const ChartPoint& B = loop_[(k + 1) % n];
            if (A.y <= q.y) {
                if (B.y > q.y && is_left(A, B, q) > 0.0) ++wn;
            } else {
                if (B.y <= q.y && is_left(A, B, q) < 0.0) --wn;
            }
        }
        return wn != 0;
    }

    static double is_left(const ChartPoint& A, const ChartPoint& B, const ChartPoint& q) {
        return (B.x - A.x) * (q.y - A.y) - (q.x - A.x) * (B.y - A.y);
    }

    void mark_segment(const ChartPoint& A, const ChartPoint& B) {
        const double len = std::hypot(B.x - A.x, B.y - A.y);
        const int steps = std::max(1, static_cast<int>(len / (0.5 * h_)) + 1);
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const double x = A.x + t * (B.x - A.x), y = A.y + t * (B.y - A.y);
            const int i = static_cast<int>((x - xmin_) / h_) + 1;
            const int j = static_cast<int>((y - ymin_) / h_) + 1;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if (ii >= 0 && jj >= 0 && ii < nx_ && jj < ny_)
                        cells_[static_cast<std::size_t>(ii) * ny_ + jj] = 2;
                }
        }
    }

    std::vector<ChartPoint> loop_;
    std::vector<std::int8_t> cells_; // 0 out, 1 in, 2 near-boundary
    double xmin_ = 0, xmax_ = 0, ymin_ = 0, ymax_ = 0, h_ = 4e-3;
    int nx_ = 0, ny_ = 0;
};

namespace detail {

/// Resample a curve by arc length (chart metric) to at most n_keep points,
/// endpoints preserved.
inline std::vector<Vec3> decimate(const std::vector<Vec3>& pts, std::size_t n_keep) {
    if (pts.size() <= n_keep) return pts;
    std::vector<double> arc(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dx = pts[i][0] - pts[i - 1][0], dy = pts[i][1] - pts[i - 1][1];
        arc[i] = arc[i - 1] + std::hypot(dx, dy);
    }
    std::vector<Vec3> out;
    out.reserve(n_keep);
    const double total = arc.back();
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_keep; ++k) {
        const double target = total * k / (n_keep - 1);
        while (j + 1 < pts.size() && arc[j + 1] < target) ++j;
        out.push_back(pts[std::min(j + (arc[j] < target ? 1 : 0), pts.size() - 1)]);
    }
    out.back() = pts.back();
    return out;
}

} // namespace detail

/// The ergodic set Z_0 (enclosed by the a-trajectory from e_A and the
/// A-trajectory from e_a) together with its shrunken and enlarged variants
/// Z_{-delta} and Z_{+2delta}.
struct ErgodicSet {
    std::vector<Vec3> gamma_a_A; ///< control a, from e_A, limit e_a
    std::vector<Vec3> gamma_A_a; ///< control A, from e_a, limit e_A
    ClosedRegion z0;
    ClosedRegion z_minus;  ///< controls a+delta / A-delta (equals z0 when delta = 0)
    ClosedRegion z_plus2;  ///< controls a-2delta / A+2delta
    double delta = 0.0;
    double endpoint_error_a = 0.0; ///< distance of gamma_a_A's end to e_a
    double endpoint_error_A = 0.0;
};

namespace detail {

inline std::vector<ChartPoint> close_loop(const std::vector<Vec3>& c1,
                                          const std::vector<Vec3>& c2,
                                          std::size_t n_keep = 1000) {
    std::vector<Vec3> d1 = decimate(c1, n_keep), d2 = decimate(c2, n_keep);
    std::vector<ChartPoint> loop;
    loop.reserve(d1.size() + d2.size());
    for (const auto& v : d1) loop.push_back(chart_of(v));
    for (const auto& v : d2) loop.push_back(chart_of(v));
    return loop;
}

} // namespace detail

/// Build Z_0 and its offsets. Preconditions: a < alpha* < A (H2) and
/// a - 2 delta > 0.
inline ErgodicSet build_ergodic_set(const ModelParams& p, double delta, double dt = 1e-3) {
    if (delta < 0.0 || !(p.a - 2.0 * delta > 0.0))
        throw validation_error("build_ergodic_set: need delta >= 0 and a - 2 delta > 0");
    ErgodicSet s;
    s.delta = delta;
    const Vec3 e_a = perron_vector(p, p.a);
    const Vec3 e_A = perron_vector(p, p.A);
    s.gamma_a_A = integrate_to_equilibrium(p, e_A, p.a, e_a, 1e-6, dt).points;
    s.gamma_A_a = integrate_to_equilibrium(p, e_a, p.A, e_A, 1e-6, dt).points;
    s.endpoint_error_a = norm(s.gamma_a_A.back() - e_a);
    s.endpoint_error_A = norm(s.gamma_A_a.back() - e_A);
    s.z0 = ClosedRegion(detail::close_loop(s.gamma_a_A, s.gamma_A_a));

    if (delta == 0.0) {
        s.z_minus = s.z0;
        s.z_plus2 = s.z0;
        return s;
    }
    const Vec3 em = perron_vector(p, p.A - delta);
    const Vec3 ep = perron_vector(p, p.a + delta);
    auto cm1 = integrate_to_equilibrium(p, em, p.a + delta, ep, 1e-6, dt).points;
    auto cm2 = integrate_to_equilibrium(p, ep, p.A - delta, em, 1e-6, dt).points;
    s.z_minus = ClosedRegion(detail::close_loop(cm1, cm2));

    const Vec3 eP = perron_vector(p, p.A + 2.0 * delta);
    const Vec3 eM = perron_vector(p, p.a - 2.0 * delta);
    auto cp1 = integrate_to_equilibrium(p, eP, p.a - 2.0 * delta, eM, 1e-6, dt).points;
    auto cp2 = integrate_to_equilibrium(p, eM, p.A + 2.0 * delta, eP, 1e-6, dt).points;
    s.z_plus2 = ClosedRegion(detail::close_loop(cp1, cp2));
    return s;
}

/// Boundary stability: at sampled points z of each boundary curve, with the
/// normal n(z) = Theta b(z, alpha_own)/|Theta b(z, alpha_own)| of the
/// stability lemma, every admissible field satisfies <b(z,alpha), n> <= tol.
/// Affinity in alpha makes checking alpha in {a, A} sufficient.
struct StabilityReport {
    bool stable = false;
    double worst_value = 0.0;
    Vec3 worst_point;
    int samples = 0;
};

inline StabilityReport stability_check_curve(const ModelParams& p,
                                             const std::vector<Vec3>& curve, double alpha_own,
                                             int min_samples = 500, double tol = 1e-8) {
    StabilityReport rep;
    rep.worst_value = std::numeric_limits<double>::lowest();
    const std::size_t stride = std::max<std::size_t>(1, curve.size() / min_samples);
    for (std::size_t k = 1; k + 1 < curve.size(); k += stride) {
        const Vec3& z = curve[k];
        const Vec3 tb = theta_rotate_unchecked(field_b(p, z, alpha_own), p.m);
        const double nb = norm(tb);
        if (nb < 1e-12) continue; // equilibrium endpoint, normal undefined
        const Vec3 n = tb / nb;
        for (double alpha : {p.a, p.A}) {
            const double v = dot(field_b(p, z, alpha), n);
            if (v > rep.worst_value) {
                rep.worst_value = v;
                rep.worst_point = z;
            }
        }
        ++rep.samples;
    }
    rep.stable = rep.worst_value <= tol;
    return rep;
}

inline StabilityReport stability_check(const ModelParams& p, const ErgodicSet& s,
                                       int min_samples = 500, double tol = 1e-8) {
    StabilityReport r1 = stability_check_curve(p, s.gamma_a_A, p.a, min_samples, tol);
    StabilityReport r2 = stability_check_curve(p, s.gamma_A_a, p.A, min_samples, tol);
    StabilityReport rep = r1.worst_value >= r2.worst_value ? r1 : r2;
    rep.samples = r1.samples + r2.samples;
    rep.stable = rep.worst_value <= tol;
    return rep;
}

/// Bang-bang connection of two points of Z_{-delta} along the proof of the
/// controllability lemma: forward extremal curves from z meet backward
/// extremal curves from z' inside Z_0; the concatenated two-phase control
/// sends z to z'.
struct ConnectResult {
    double T_first = 0.0;       ///< duration of the first phase
    double T_second = 0.0;      ///< duration of the second phase
    double alpha_first = 0.0;
    double alpha_second = 0.0;
    double total_time() const { return T_first + T_second; }
    Vec3 meeting_point;
    double landing_error = 0.0; ///< ||y(T) - z'|| from closed-loop re-integration
};

namespace detail {

struct ParamCurve {
    std::vector<Vec3> pts;
    double dt = 0.0;
};

inline ParamCurve extremal_curve(const ModelParams& p, const Vec3& y0, double alpha, double dt,
                                 double T_max, bool backward) {
    ParamCurve c;
    c.dt = dt;
    Vec3 y = y0;
    c.pts.push_back(y);
    const long n = static_cast<long>(T_max / dt);
    const double sgn = backward ? -1.0 : 1.0;
    for (long k = 0; k < n; ++k) {
        const Vec3 k1 = sgn * field_b(p, y, alpha);
        const Vec3 k2 = sgn * field_b(p, y + (0.5 * dt) * k1, alpha);
        const Vec3 k3 = sgn * field_b(p, y + (0.5 * dt) * k2, alpha);
        const Vec3 k4 = sgn * field_b(p, y + dt * k3, alpha);
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        y = y / dot(p.m, y);
        c.pts.push_back(y);
        if (backward && min_coeff(y) < 1e-9) break; // reversed flow leaves the simplex
        if (!backward && norm(field_b(p, y, alpha)) < 1e-10) break;
    }
    return c;
}

/// First intersection (earliest parameter on `fwd`, then earliest on `bwd`)
/// of two chart polylines. Returns interpolated parameters in time units.
inline bool first_intersection(const ParamCurve& fwd, const ParamCurve& bwd, double& t_fwd,
                               double& t_bwd) {
    // coarse spatial hash over bwd segments
    double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
    for (const auto& v : bwd.pts) {
        xmin = std::min(xmin, v[0]); xmax = std::max(xmax, v[0]);
        ymin = std::min(ymin, v[1]); ymax = std::max(ymax, v[1]);
    }
    const double cell = 5e-3;
    const int nx = static_cast<int>((xmax - xmin) / cell) + 2;
    const int ny = static_cast<int>((ymax - ymin) / cell) + 2;
    if (nx <= 0 || ny <= 0) return false;
    std::vector<std::vector<std::uint32_t>> hash(static_cast<std::size_t>(nx) * ny);
    auto cell_of = [&](double x, double y) {
        int i = std::clamp(static_cast<int>((x - xmin) / cell), 0, nx - 1);
        int j = std::clamp(static_cast<int>((y - ymin) / cell), 0, ny - 1);
        return static_cast<std::size_t>(i) * ny + j;
    };
    for (std::uint32_t s = 0; s + 1 < bwd.pts.size(); ++s) {
        const auto& A = bwd.pts[s];
        const auto& B = bwd.pts[s + 1];
        const int i0 = std::clamp(static_cast<int>((std::min(A[0], B[0]) - xmin) / cell), 0, nx - 1);
        const int i1 = std::clamp(static_cast<int>((std::max(A[0], B[0]) - xmin) / cell), 0, nx - 1);
        const int j0 = std::clamp(static_cast<int>((std::min(A[1], B[1]) - ymin) / cell), 0, ny - 1);
        const int j1 = std::clamp(static_cast<int>((std::max(A[1], B[1]) - ymin) / cell), 0, ny - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                hash[static_cast<std::size_t>(i) * ny + j].push_back(s);
    }
    for (std::size_t f = 0; f + 1 < fwd.pts.size(); ++f) {
        const double px = fwd.pts[f][0], py = fwd.pts[f][1];
        const double rx = fwd.pts[f + 1][0] - px, ry = fwd.pts[f + 1][1] - py;
        // collect candidate bwd segments from the cells this segment covers
        std::vector<std::uint32_t> cand;
        const int i0 = std::clamp(static_cast<int>((std::min(px, px + rx) - xmin) / cell) - 1, 0, nx - 1);
        const int i1 = std::clamp(static_cast<int>((std::max(px, px + rx) - xmin) / cell) + 1, 0, nx - 1);
        const int j0 = std::clamp(static_cast<int>((std::min(py, py + ry) - ymin) / cell) - 1, 0, ny - 1);
        const int j1 = std::clamp(static_cast<int>((std::max(py, py + ry) - ymin) / cell) + 1, 0, ny - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                for (std::uint32_t s : hash[static_cast<std::size_t>(i) * ny + j])
                    cand.push_back(s);
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        (void)cell_of;
        bool hit = false;
        double best_tb = std::numeric_limits<double>::max(), best_tf = 0.0;
        for (std::uint32_t s : cand) {
            const double qx = bwd.pts[s][0], qy = bwd.pts[s][1];
            const double sx = bwd.pts[s + 1][0] - qx, sy = bwd.pts[s + 1][1] - qy;
            const double den = rx * sy - ry * sx;
            if (std::abs(den) < 1e-18) continue;
            const double t = ((qx - px) * sy - (qy - py) * sx) / den;
            const double u = ((qx - px) * ry - (qy - py) * rx) / den;
            if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
                const double tb = (s + u) * bwd.dt;
                if (!hit || tb < best_tb) {
                    hit = true;
                    best_tb = tb;
                    best_tf = (f + t) * fwd.dt;
                }
            }
        }
        if (hit) {
            t_fwd = best_tf;
            t_bwd = best_tb;
            return true;
        }
    }
    return false;
}

} // namespace detail

inline ConnectResult connect(const ModelParams& p, const ErgodicSet& set, const Vec3& z,
                             const Vec3& zp, double dt = 5e-4) {
    if (!set.z_minus.contains(chart_of(z)) || !set.z_minus.contains(chart_of(zp)))
        throw validation_error("connect: both endpoints must lie in Z_{-delta}");
    ConnectResult out;
    if (norm(z - zp) == 0.0) {
        out.meeting_point = z;
        out.alpha_first = p.a;
        out.alpha_second = p.A;
        return out;
    }
    const double T_max = 60.0;
    auto try_pair = [&](double al_fwd, double al_bwd, ConnectResult& res) {
        const auto fwd = detail::extremal_curve(p, z, al_fwd, dt, T_max, false);
        const auto bwd = detail::extremal_curve(p, zp, al_bwd, dt, T_max, true);
        double tf = 0.0, tb = 0.0;
        if (!detail::first_intersection(fwd, bwd, tf, tb)) return false;
        res.T_first = tf;
        res.T_second = tb;
        res.alpha_first = al_fwd;
        res.alpha_second = al_bwd;
        return true;
    };
    ConnectResult r1, r2;
    const bool ok1 = try_pair(p.a, p.A, r1);
    const bool ok2 = try_pair(p.A, p.a, r2);
    if (!ok1 && !ok2)
        throw geometry_error("connect: extremal curves do not intersect inside Z_0");
    out = (!ok2 || (ok1 && r1.total_time() <= r2.total_time())) ? r1 : r2;

    // closed-loop verification with exact phase durations
    auto run_phase = [&](Vec3 y, double alpha, double T) {
        const long n = static_cast<long>(T / dt);
        for (long k = 0; k < n; ++k) y = detail::rk4_state_step(p, y, alpha, dt), y = y / dot(p.m, y);
        const double rem = T - n * dt;
        if (rem > 0.0) {
            y = detail::rk4_state_step(p, y, alpha, rem);
            y = y / dot(p.m, y);
        }
        return y;
    };
    Vec3 y = run_phase(z, out.alpha_first, out.T_first);
    out.meeting_point = y;
    y = run_phase(y, out.alpha_second, out.T_second);
    out.landing_error = norm(y - zp);
    return out;
}

/// Entry-time statistics of random-control trajectories into Z_{+2delta}.
struct ProbeStats {
    int trials = 0;
    int entered = 0;
    int exited_after_entry = 0;
    double max_entry_time = 0.0;
    double mean_entry_time = 0.0;
    std::vector<double> entry_times;        ///< -1 when never entered
    std::vector<Vec3> counterexample_starts;
};

/// Random piecewise-constant controls: values uniform in [a,A], dwell times
/// Exp(1); starts sampled uniformly-by-projection on the simplex. Each trial
/// owns an RNG stream derived from (seed, trial) so results do not depend on
/// scheduling.
inline ProbeStats attractiveness_probe(const ModelParams& p, const ErgodicSet& set, int n_trials,
                                       std::uint64_t seed, double T_max = 100.0,
                                       double dt = 1e-3, double exit_margin = 1e-3) {
    if (!(set.delta > 0.0))
        throw validation_error("attractiveness_probe: needs a set built with delta > 0");
    ProbeStats st;
    st.trials = n_trials;
    st.entry_times.assign(n_trials, -1.0);
    double sum = 0.0;
    for (int trial = 0; trial < n_trials; ++trial) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(trial) + 1);
        std::exponential_distribution<double> exp1(1.0);
        std::uniform_real_distribution<double> unif(p.a, p.A);
        Vec3 w{exp1(rng), exp1(rng), exp1(rng)};
        Vec3 y = w / dot(p.m, w);
        const Vec3 start = y;
        double dwell = exp1(rng);
        double alpha = unif(rng);
        double entry = -1.0;
        bool exited = false;
        const long n = static_cast<long>(T_max / dt);
        for (long k = 0; k < n; ++k) {
            if (dwell <= 0.0) {
                dwell = exp1(rng);
                alpha = unif(rng);
            }
            y = detail::rk4_state_step(p, y, alpha, dt);
            y = y / dot(p.m, y);
            dwell -= dt;
            const bool inside = set.z_plus2.contains(chart_of(y));
            if (entry < 0.0 && inside) entry = (k + 1) * dt;
            if (entry >= 0.0 && !inside) {
                if (set.z_plus2.boundary_distance(chart_of(y)) > exit_margin) {
                    exited = true;
                    break;
                }
            }
        }
        st.entry_times[trial] = entry;
        if (entry >= 0.0 && !exited) {
            ++st.entered;
            sum += entry;
            st.max_entry_time = std::max(st.max_entry_time, entry);
        } else {
            if (exited) ++st.exited_after_entry;
            st.counterexample_starts.push_back(start);
        }
    }
    st.mean_entry_time = st.entered > 0 ? sum / st.entered : -1.0;
    return st;
}

/// Chart parameter of the flow family driven by a constant control: follow
/// the reversed field from y until it exits the simplex and return (edge,
/// coordinate along that edge). Along any admissible trajectory this
/// parameter moves monotonically (the monotonicity formula); the companion
/// test checks the sign prediction using finite differences.
struct BoundaryExit {
    int edge = -1;   ///< 0: y1 = 0, 1: y2 = 0, 2: y3 = 0
    double s = 0.0;  ///< y2 on edge 0, y1 on edges 1 and 2
};

inline BoundaryExit backward_exit(const ModelParams& p, const Vec3& y0, double alpha,
                                  double dt = 1e-3, double T_max = 400.0) {
    Vec3 y = y0;
    const long n = static_cast<long>(T_max / dt);
    for (long k = 0; k < n; ++k) {
        Vec3 k1 = -1.0 * field_b(p, y, alpha);
        Vec3 k2 = -1.0 * field_b(p, y + (0.5 * dt) * k1, alpha);
        Vec3 k3 = -1.0 * field_b(p, y + (0.5 * dt) * k2, alpha);
        Vec3 k4 = -1.0 * field_b(p, y + dt * k3, alpha);
        Vec3 yn = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        yn = yn / dot(p.m, yn);
        if (min_coeff(yn) < 0.0) {
            // bisect the crossing between y and yn
            Vec3 lo = y, hi = yn;
            for (int it = 0; it < 80; ++it) {
                Vec3 mid = 0.5 * (lo + hi);
                mid = mid / dot(p.m, mid);
                (min_coeff(mid) < 0.0 ? hi : lo) = mid;
            }
            const Vec3 z = 0.5 * (lo + hi);
            BoundaryExit ex;
            ex.edge = 0;
            for (int i = 1; i < 3; ++i)
                if (z[i] < z[ex.edge]) ex.edge = i;
            ex.s = ex.edge == 0 ? z[1] : z[0];
            return ex;
        }
        y = yn;
    }
    throw geometry_error("backward_exit: reversed trajectory did not leave the simplex");
}

} // namespace trieig
