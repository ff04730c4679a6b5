#pragma once

#include <algorithm>
#include <cmath>

namespace rowspray {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

enum class Axis { X, Y };

// Axis-aligned rectangle in world meters, x0 <= x1 and y0 <= y1.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool empty(double eps = 0.0) const { return width() <= eps || height() <= eps; }

    // Half-open membership: [x0, x1) x [y0, y1).
    bool contains_half_open(const Point2& p) const {
        return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1;
    }

    Rect intersect(const Rect& o) const {
        Rect r{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
        if (r.x1 < r.x0) r.x1 = r.x0;
        if (r.y1 < r.y0) r.y1 = r.y0;
        return r;
    }

    bool approx_equals(const Rect& o, double eps) const {
        return std::abs(x0 - o.x0) <= eps && std::abs(y0 - o.y0) <= eps &&
               std::abs(x1 - o.x1) <= eps && std::abs(y1 - o.y1) <= eps;
    }
};

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace rowspray
