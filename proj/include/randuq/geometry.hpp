#pragma once

#include <cmath>

namespace randuq {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }

/// Row-major 2x2 matrix; small enough to pass by value everywhere.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0;
    double a10 = 0.0, a11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    double det() const { return a00 * a11 - a01 * a10; }
    Mat2 transpose() const { return {a00, a10, a01, a11}; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
    return {a.a00 + b.a00, a.a01 + b.a01, a.a10 + b.a10, a.a11 + b.a11};
}
inline Mat2 operator*(double s, Mat2 m) {
    return {s * m.a00, s * m.a01, s * m.a10, s * m.a11};
}
inline Vec2 operator*(Mat2 m, Vec2 v) {
    return {m.a00 * v.x + m.a01 * v.y, m.a10 * v.x + m.a11 * v.y};
}
inline Mat2 outer(Vec2 a, Vec2 b) {
    return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
}

/// Largest singular value, from the closed form for 2x2 matrices.
inline double spectral_norm(Mat2 m) {
    const double f = m.a00 * m.a00 + m.a01 * m.a01 + m.a10 * m.a10 + m.a11 * m.a11;
    const double d = m.det();
    double disc = f * f - 4.0 * d * d;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

/// Eigenvalues of a symmetric 2x2 matrix (ascending).
inline void symmetric_eigenvalues(Mat2 m, double& lo, double& hi) {
    const double tr = m.a00 + m.a11;
    const double off = 0.5 * (m.a01 + m.a10);
    double disc = 0.25 * (m.a00 - m.a11) * (m.a00 - m.a11) + off * off;
    disc = std::sqrt(std::max(disc, 0.0));
    lo = 0.5 * tr - disc;
    hi = 0.5 * tr + disc;
}

} // namespace randuq
