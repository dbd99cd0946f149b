#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>

namespace uwbdfl {

/// Planar coordinate in metres.
using Point2 = Eigen::Vector2d;

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct Segment {
    Point2 a;
    Point2 b;

    double length() const { return (b - a).norm(); }
};

inline double cross2(const Point2& u, const Point2& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Shortest distance from point p to the closed segment [a, b].
inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b)
{
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Mirror image of p across the infinite line through s.
inline Point2 reflect_across(const Point2& p, const Segment& s)
{
    const Point2 d = (s.b - s.a).normalized();
    const Point2 ap = p - s.a;
    const Point2 foot = s.a + ap.dot(d) * d;
    return 2.0 * foot - p;
}

// Parameters (t along p->q, u along s) of the intersection of segment p->q with
// the line through s, or nullopt when parallel.
struct LineHit {
    double t;
    double u;
};

inline std::optional<LineHit> intersect_lines(const Point2& p, const Point2& q, const Segment& s)
{
    const Point2 r = q - p;
    const Point2 w = s.b - s.a;
    const double denom = cross2(r, w);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const Point2 ap = s.a - p;
    return LineHit{cross2(ap, w) / denom, cross2(ap, r) / denom};
}

/// True when the open segment p->q properly crosses segment s.
inline bool segments_cross(const Point2& p, const Point2& q, const Segment& s)
{
    constexpr double eps = 1e-12;
    const auto hit = intersect_lines(p, q, s);
    if (!hit) return false;
    return hit->t > eps && hit->t < 1.0 - eps && hit->u >= 0.0 && hit->u <= 1.0;
}

}  // namespace uwbdfl
