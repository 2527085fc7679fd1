#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace stitchsmc {

// Planar coordinates in metres. Projection to the plane happens upstream of
// this library; all geometry here is exact Euclidean.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double polyline_length(const std::vector<Point>& pts) {
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
    return total;
}

// Cumulative arc length at each vertex; front() == 0, back() == total length.
inline std::vector<double> cumulative_lengths(const std::vector<Point>& pts) {
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
    return cum;
}

// Point at arc length s along the polyline; the caller guarantees
// 0 <= s <= total length.
inline Point point_at_arc_length(const std::vector<Point>& pts, const std::vector<double>& cum,
                                 double s) {
    std::size_t seg = 1;
    while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
    double seg_len = cum[seg] - cum[seg - 1];
    if (seg_len == 0.0) return pts[seg];
    double f = (s - cum[seg - 1]) / seg_len;
    return {pts[seg - 1].x + f * (pts[seg].x - pts[seg - 1].x),
            pts[seg - 1].y + f * (pts[seg].y - pts[seg - 1].y)};
}

struct PolylineProjection {
    double distance = 0.0;    // straight-line distance from the query point
    double arc_offset = 0.0;  // arc length of the closest point
};

// Closest point on the polyline to p, by scanning segments.
inline PolylineProjection project_to_polyline(const std::vector<Point>& pts,
                                              const std::vector<double>& cum, const Point& p) {
    PolylineProjection best;
    best.distance = distance(p, pts[0]);
    best.arc_offset = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Point& a = pts[i - 1];
        const Point& b = pts[i];
        double dx = b.x - a.x, dy = b.y - a.y;
        double len2 = dx * dx + dy * dy;
        double t = 0.0;
        if (len2 > 0.0) {
            t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
            t = std::min(1.0, std::max(0.0, t));
        }
        Point q{a.x + t * dx, a.y + t * dy};
        double d = distance(p, q);
        if (d < best.distance) {
            best.distance = d;
            best.arc_offset = cum[i - 1] + t * std::sqrt(len2);
        }
    }
    return best;
}

}  // namespace stitchsmc
