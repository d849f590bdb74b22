#include "bline/geometry.hpp"

#include <algorithm>

namespace bline {

double point_segment_distance(const Point2& p, const LineSegment& s) {
    const double dx = s.bottom.x - s.top.x;
    const double dy = s.bottom.y - s.top.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return distance(p, s.top);
    double t = ((p.x - s.top.x) * dx + (p.y - s.top.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Point2 foot{s.top.x + t * dx, s.top.y + t * dy};
    return distance(p, foot);
}

double segment_hausdorff(const LineSegment& a, const LineSegment& b) {
    const double d1 = point_segment_distance(a.top, b);
    const double d2 = point_segment_distance(a.bottom, b);
    const double d3 = point_segment_distance(b.top, a);
    const double d4 = point_segment_distance(b.bottom, a);
    return std::max(std::max(d1, d2), std::max(d3, d4));
}

}  // namespace bline
