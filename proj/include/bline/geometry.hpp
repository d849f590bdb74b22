#pragma once

#include <cmath>

namespace bline {

// Coordinates are normalized to [0,100] in both axes. The geometry layer
// itself is total over all finite points; range checks happen at ingestion.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// A line segment in canonical orientation: top.y <= bottom.y, ties in y
// broken by smaller x as top. Degenerate (zero-length) segments are legal
// values here and are screened out by input validation instead.
struct LineSegment {
    Point2 top;
    Point2 bottom;

    LineSegment() = default;
    LineSegment(Point2 a, Point2 b) {
        if (a.y < b.y || (a.y == b.y && a.x <= b.x)) {
            top = a;
            bottom = b;
        } else {
            top = b;
            bottom = a;
        }
    }

    double length() const { return distance(top, bottom); }
    bool degenerate() const { return top == bottom; }

    friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

// Euclidean distance from p to the closest point of s. Zero iff p lies on s.
double point_segment_distance(const Point2& p, const LineSegment& s);

// Symmetric Hausdorff distance between two segments viewed as point sets.
// The directed supremum of a convex function over a segment is attained at
// an endpoint, so the exact value is the max over the four endpoint-to-
// segment distances.
double segment_hausdorff(const LineSegment& a, const LineSegment& b);

}  // namespace bline
