#pragma once

#include <cmath>

namespace otsketch {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline double dist2(Vec2 a, Vec2 b) { return norm2(a - b); }
inline double dist(Vec2 a, Vec2 b) { return std::sqrt(dist2(a, b)); }

inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
inline Vec2 clamp01(Vec2 v) { return {clamp01(v.x), clamp01(v.y)}; }

} // namespace otsketch
