#pragma once

#include <cmath>

namespace shearchaos {

// Planar vector. Used both for tangent vectors and for lifted (non-wrapped)
// phase-space coordinates, which share the representation.
struct Vec2 {
    double d1 = 0.0;
    double d2 = 0.0;

    Vec2() = default;
    Vec2(double a, double b) : d1(a), d2(b) {}

    Vec2 operator+(const Vec2& o) const { return {d1 + o.d1, d2 + o.d2}; }
    Vec2 operator-(const Vec2& o) const { return {d1 - o.d1, d2 - o.d2}; }
    Vec2 operator*(double c) const { return {c * d1, c * d2}; }
    Vec2& operator+=(const Vec2& o) {
        d1 += o.d1;
        d2 += o.d2;
        return *this;
    }

    double norm() const { return std::hypot(d1, d2); }
    double dot(const Vec2& o) const { return d1 * o.d1 + d2 * o.d2; }
};

using Tangent2 = Vec2;

inline Vec2 operator*(double c, const Vec2& v) { return v * c; }

// 2x2 Jacobian, row-major: entry (i,j) = d(output_i)/d(input_j).
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.d1 + a12 * v.d2, a21 * v.d1 + a22 * v.d2};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator*(double c) const { return {c * a11, c * a12, c * a21, c * a22}; }
    Mat2& operator+=(const Mat2& o) {
        a11 += o.a11;
        a12 += o.a12;
        a21 += o.a21;
        a22 += o.a22;
        return *this;
    }

    double det() const { return a11 * a22 - a12 * a21; }
    double frobenius_norm() const {
        return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    }
};

inline Mat2 operator*(double c, const Mat2& m) { return m * c; }

}  // namespace shearchaos
