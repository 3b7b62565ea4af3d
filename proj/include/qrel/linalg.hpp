#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "qrel/errors.hpp"

namespace qrel {

// Tolerances used across the library: unit-norm checks are tight (the
// amplitude constructions are exact up to rounding), operator identities
// accumulate a little more noise.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kStructuralTol = 1e-10;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double dot(const Vec2 &o) const { return x * o.x + y * o.y; }
    double squared_norm() const { return x * x + y * y; }
    double norm() const { return std::sqrt(squared_norm()); }
    bool is_unit(double tol = kNormTol) const {
        return std::abs(squared_norm() - 1.0) <= tol;
    }
    /// Counter-clockwise orthogonal companion.
    Vec2 orthogonal() const { return {-y, x}; }

    Vec2 normalized() const {
        const double n = norm();
        if (!(n > 0.0)) {
            throw InputError("cannot normalize a zero-length 2-vector");
        }
        return {x / n, y / n};
    }

    Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
};

/// 2x2 real matrix, row major.
struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diagonal(double d0, double d1) { return {d0, 0.0, 0.0, d1}; }
    static Mat2 outer(const Vec2 &u, const Vec2 &v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    double trace() const { return m00 + m11; }
    double det() const { return m00 * m11 - m01 * m10; }
    bool is_symmetric(double tol = kStructuralTol) const {
        return std::abs(m01 - m10) <= tol;
    }

    Vec2 operator*(const Vec2 &v) const {
        return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
    }
    Mat2 operator*(const Mat2 &o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Mat2 operator+(const Mat2 &o) const {
        return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
    }
    Mat2 operator-(const Mat2 &o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }

    double max_abs_diff(const Mat2 &o) const {
        double d = std::abs(m00 - o.m00);
        d = std::max(d, std::abs(m01 - o.m01));
        d = std::max(d, std::abs(m10 - o.m10));
        d = std::max(d, std::abs(m11 - o.m11));
        return d;
    }
};

struct Vec4 {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

    double operator[](std::size_t i) const { return c[i]; }
    double &operator[](std::size_t i) { return c[i]; }

    double dot(const Vec4 &o) const {
        return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2] + c[3] * o.c[3];
    }
    double squared_norm() const { return dot(*this); }
    bool is_unit(double tol = kNormTol) const {
        return std::abs(squared_norm() - 1.0) <= tol;
    }
};

/// 4x4 real matrix, row major.
struct Mat4 {
    std::array<double, 16> m{};

    double at(std::size_t r, std::size_t c) const { return m[4 * r + c]; }
    double &at(std::size_t r, std::size_t c) { return m[4 * r + c]; }

    static Mat4 identity() {
        Mat4 out;
        for (std::size_t i = 0; i < 4; ++i) out.at(i, i) = 1.0;
        return out;
    }

    /// Kronecker product of two 2x2 blocks.
    static Mat4 kronecker(const Mat2 &a, const Mat2 &b) {
        const double av[2][2] = {{a.m00, a.m01}, {a.m10, a.m11}};
        const double bv[2][2] = {{b.m00, b.m01}, {b.m10, b.m11}};
        Mat4 out;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 2; ++k)
                    for (std::size_t l = 0; l < 2; ++l)
                        out.at(2 * i + k, 2 * j + l) = av[i][j] * bv[k][l];
        return out;
    }

    Vec4 operator*(const Vec4 &v) const {
        Vec4 out;
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 4; ++c) s += at(r, c) * v[c];
            out[r] = s;
        }
        return out;
    }

    Mat4 operator*(const Mat4 &o) const {
        Mat4 out;
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < 4; ++k) s += at(r, k) * o.at(k, c);
                out.at(r, c) = s;
            }
        return out;
    }

    bool is_symmetric(double tol = kStructuralTol) const {
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = r + 1; c < 4; ++c)
                if (std::abs(at(r, c) - at(c, r)) > tol) return false;
        return true;
    }

    double max_abs_diff(const Mat4 &o) const {
        double d = 0.0;
        for (std::size_t i = 0; i < 16; ++i) d = std::max(d, std::abs(m[i] - o.m[i]));
        return d;
    }
};

/// An orthonormal basis of the real plane.
struct Basis2 {
    Vec2 first{1.0, 0.0};
    Vec2 second{0.0, 1.0};

    static Basis2 rotation(double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        return {{c, s}, {-s, c}};
    }

    bool is_orthonormal(double tol = kNormTol) const {
        return first.is_unit(tol) && second.is_unit(tol) &&
               std::abs(first.dot(second)) <= tol;
    }
};

} // namespace qrel
