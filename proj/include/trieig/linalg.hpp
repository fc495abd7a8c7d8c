#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace trieig {

/// Fixed-size 3-vector. Everything in this library lives in R^3 or on the
/// 2-plane <m,y>=1 inside it, so a dedicated value type beats a general
/// dynamic vector.
struct Vec3 {
    double x[3]{0.0, 0.0, 0.0};

    constexpr double& operator[](std::size_t i) { return x[i]; }
    constexpr double operator[](std::size_t i) const { return x[i]; }

    constexpr Vec3 operator+(const Vec3& o) const { return {x[0] + o.x[0], x[1] + o.x[1], x[2] + o.x[2]}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x[0] - o.x[0], x[1] - o.x[1], x[2] - o.x[2]}; }
    constexpr Vec3 operator-() const { return {-x[0], -x[1], -x[2]}; }
    constexpr Vec3 operator*(double c) const { return {c * x[0], c * x[1], c * x[2]}; }
    constexpr Vec3 operator/(double c) const { return {x[0] / c, x[1] / c, x[2] / c}; }
    constexpr Vec3& operator+=(const Vec3& o) {
        x[0] += o.x[0]; x[1] += o.x[1]; x[2] += o.x[2];
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x[0] -= o.x[0]; x[1] -= o.x[1]; x[2] -= o.x[2];
        return *this;
    }
    constexpr Vec3& operator*=(double c) {
        x[0] *= c; x[1] *= c; x[2] *= c;
        return *this;
    }
};

constexpr Vec3 operator*(double c, const Vec3& v) { return v * c; }

constexpr double dot(const Vec3& u, const Vec3& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

constexpr Vec3 cross(const Vec3& u, const Vec3& v) {
    return {u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0]};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

constexpr double min_coeff(const Vec3& v) {
    return v[0] < v[1] ? (v[0] < v[2] ? v[0] : v[2]) : (v[1] < v[2] ? v[1] : v[2]);
}

/// Row-major 3x3 matrix.
struct Mat3 {
    double a[3][3]{};

    constexpr double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    constexpr double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }

    static constexpr Mat3 identity() {
        Mat3 I;
        I.a[0][0] = I.a[1][1] = I.a[2][2] = 1.0;
        return I;
    }

    constexpr Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[i][j] + o.a[i][j];
        return r;
    }
    constexpr Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[i][j] - o.a[i][j];
        return r;
    }
    constexpr Mat3 operator*(double c) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = c * a[i][j];
        return r;
    }
};

constexpr Mat3 operator*(double c, const Mat3& M) { return M * c; }

constexpr Vec3 operator*(const Mat3& M, const Vec3& v) {
    return {M.a[0][0] * v[0] + M.a[0][1] * v[1] + M.a[0][2] * v[2],
            M.a[1][0] * v[0] + M.a[1][1] * v[1] + M.a[1][2] * v[2],
            M.a[2][0] * v[0] + M.a[2][1] * v[1] + M.a[2][2] * v[2]};
}

constexpr Mat3 operator*(const Mat3& A, const Mat3& B) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.a[i][j] = A.a[i][0] * B.a[0][j] + A.a[i][1] * B.a[1][j] + A.a[i][2] * B.a[2][j];
    return r;
}

constexpr Mat3 transpose(const Mat3& M) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.a[i][j] = M.a[j][i];
    return r;
}

constexpr double trace(const Mat3& M) { return M.a[0][0] + M.a[1][1] + M.a[2][2]; }

constexpr double det(const Mat3& M) {
    return M.a[0][0] * (M.a[1][1] * M.a[2][2] - M.a[1][2] * M.a[2][1])
         - M.a[0][1] * (M.a[1][0] * M.a[2][2] - M.a[1][2] * M.a[2][0])
         + M.a[0][2] * (M.a[1][0] * M.a[2][1] - M.a[1][1] * M.a[2][0]);
}

/// Sum of the three 2x2 principal minors (second elementary symmetric
/// function of the eigenvalues).
constexpr double principal_minors_sum(const Mat3& M) {
    double m0 = M.a[1][1] * M.a[2][2] - M.a[1][2] * M.a[2][1];
    double m1 = M.a[0][0] * M.a[2][2] - M.a[0][2] * M.a[2][0];
    double m2 = M.a[0][0] * M.a[1][1] - M.a[0][1] * M.a[1][0];
    return m0 + m1 + m2;
}

inline double frobenius_norm(const Mat3& M) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += M.a[i][j] * M.a[i][j];
    return std::sqrt(s);
}

/// Max absolute row sum; cheap bound on the spectral radius used to pick
/// integrator step sizes.
inline double row_sum_norm(const Mat3& M) {
    double best = 0.0;
    for (int i = 0; i < 3; ++i) {
        double s = std::abs(M.a[i][0]) + std::abs(M.a[i][1]) + std::abs(M.a[i][2]);
        best = std::max(best, s);
    }
    return best;
}

inline Vec3 row(const Mat3& M, std::size_t i) { return {M.a[i][0], M.a[i][1], M.a[i][2]}; }
inline Vec3 col(const Mat3& M, std::size_t j) { return {M.a[0][j], M.a[1][j], M.a[2][j]}; }

} // namespace trieig
