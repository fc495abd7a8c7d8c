#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "trieig/errors.hpp"
#include "trieig/model.hpp"

namespace trieig {

/// Rectangular grid over the (y1, y2) chart of the simplex, masked to
/// { y1 >= 0, y2 >= 0, m1 y1 + m2 y2 <= 1 }. y3 is eliminated through
/// <m,y> = 1, which keeps the actions of G and F exact on chart nodes.
class SimplexGrid {
public:
    SimplexGrid(const ModelParams& p, double dy) : m_(p.m), dy_(dy) {
        if (!(dy > 0.0) || dy > 0.5) throw validation_error("SimplexGrid: bad spacing");
        n1_ = static_cast<int>(std::round(1.0 / (p.m[0] * dy))) + 1;
        n2_ = static_cast<int>(std::round(1.0 / (p.m[1] * dy))) + 1;
        mask_.assign(static_cast<std::size_t>(n1_) * n2_, 0);
        for (int i = 0; i < n1_; ++i)
            for (int j = 0; j < n2_; ++j)
                if (node_y3(i, j) >= -1e-12) {
                    mask_[idx(i, j)] = 1;
                    ++active_;
                }
    }

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    double dy() const { return dy_; }
    int active_nodes() const { return active_; }
    std::size_t size() const { return mask_.size(); }

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n2_ + j; }
    bool in_mask(int i, int j) const {
        return i >= 0 && j >= 0 && i < n1_ && j < n2_ && mask_[idx(i, j)] != 0;
    }

    double node_y3(int i, int j) const {
        return (1.0 - m_[0] * i * dy_ - m_[1] * j * dy_) / m_[2];
    }
    Vec3 node(int i, int j) const { return {i * dy_, j * dy_, node_y3(i, j)}; }

    /// Interior nodes have all four axis neighbors in the mask.
    bool interior(int i, int j) const {
        return in_mask(i, j) && in_mask(i + 1, j) && in_mask(i - 1, j) && in_mask(i, j + 1)
            && in_mask(i, j - 1);
    }

    std::pair<int, int> nearest_node(double y1, double y2) const {
        int i = static_cast<int>(std::round(y1 / dy_));
        int j = static_cast<int>(std::round(y2 / dy_));
        i = std::max(0, std::min(i, n1_ - 1));
        j = std::max(0, std::min(j, n2_ - 1));
        return {i, j};
    }

private:
    Vec3 m_;
    double dy_;
    int n1_ = 0, n2_ = 0, active_ = 0;
    std::vector<std::uint8_t> mask_;
};

/// Scalar field over the masked grid (dense storage, unmasked entries 0).
struct GridField {
    std::vector<double> v;
    double stamp = 0.0; ///< time (time-dependent runs) or epsilon (discounted)

    explicit GridField(const SimplexGrid& g) : v(g.size(), 0.0) {}
    GridField() = default;

    double& at(const SimplexGrid& g, int i, int j) { return v[g.idx(i, j)]; }
    double at(const SimplexGrid& g, int i, int j) const { return v[g.idx(i, j)]; }
};

/// One-sided difference pair in one chart direction; `minus`/`plus` are set
/// only where the corresponding neighbor exists.
struct OneSidedPair {
    double minus = 0.0, plus = 0.0;
    bool has_minus = false, has_plus = false;

    /// Centered where both exist, one-sided otherwise, 0 at isolated nodes.
    double best() const {
        if (has_minus && has_plus) return 0.5 * (minus + plus);
        if (has_plus) return plus;
        if (has_minus) return minus;
        return 0.0;
    }
};

inline OneSidedPair gradient_x(const SimplexGrid& g, const GridField& f, int i, int j) {
    OneSidedPair p;
    if (g.in_mask(i + 1, j)) {
        p.plus = (f.at(g, i + 1, j) - f.at(g, i, j)) / g.dy();
        p.has_plus = true;
    }
    if (g.in_mask(i - 1, j)) {
        p.minus = (f.at(g, i, j) - f.at(g, i - 1, j)) / g.dy();
        p.has_minus = true;
    }
    return p;
}

inline OneSidedPair gradient_y(const SimplexGrid& g, const GridField& f, int i, int j) {
    OneSidedPair p;
    if (g.in_mask(i, j + 1)) {
        p.plus = (f.at(g, i, j + 1) - f.at(g, i, j)) / g.dy();
        p.has_plus = true;
    }
    if (g.in_mask(i, j - 1)) {
        p.minus = (f.at(g, i, j) - f.at(g, i, j - 1)) / g.dy();
        p.has_minus = true;
    }
    return p;
}

} // namespace trieig
