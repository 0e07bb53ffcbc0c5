#pragma once

#include <cmath>

namespace dumbbell {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Signed area of the triangle (a, b, c); > 0 for counter-clockwise.
// Evaluated in extended precision so sign decisions stay stable for the
// near-degenerate triples that show up along pre-split boundary edges.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    long double d = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                    (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
    return static_cast<double>(d);
}

// Distance from p to the closed segment [a, b].
inline double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return dist(p, a);
    double t = (p - a).dot(ab) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return dist(p, a + ab * t);
}

} // namespace dumbbell
