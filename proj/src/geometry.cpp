#include "lenspot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lenspot::geom {

bool finite(const Point2& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void validate_polygon(const Polygon& poly) {
    const std::size_t n = poly.points.size();
    if (n < 4 || n > 16 || n % 2 != 0) {
        throw BadPointCount("polygon must have an even point count in [4, 16], got " +
                            std::to_string(n));
    }
    for (const Point2& p : poly.points) {
        if (!finite(p)) {
            throw ValidationError("polygon has a non-finite coordinate");
        }
    }
}

double quad_horizontal_length(const Quad& q) {
    return 0.5 * (distance(q.p0, q.p1) + distance(q.p2, q.p3));
}

double interior_angle(const Quad& q, int vertex_index) {
    const std::array<Point2, 4> pts{q.p0, q.p1, q.p2, q.p3};
    const Point2& v = pts[static_cast<std::size_t>(vertex_index)];
    const Point2& prev = pts[static_cast<std::size_t>((vertex_index + 3) % 4)];
    const Point2& next = pts[static_cast<std::size_t>((vertex_index + 1) % 4)];
    const double a = distance(v, prev);
    const double b = distance(v, next);
    if (a <= 0.0 || b <= 0.0) {
        throw DegenerateGeometry("zero-length edge at quad vertex " +
                                 std::to_string(vertex_index));
    }
    const double c = distance(prev, next);
    double cos_theta = (a * a + b * b - c * c) / (2.0 * a * b);
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    return std::acos(cos_theta);
}

double quad_vertical_length(const Quad& q) {
    const std::array<Point2, 4> pts{q.p0, q.p1, q.p2, q.p3};
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double lateral = distance(pts[static_cast<std::size_t>(j)],
                                        pts[static_cast<std::size_t>(3 - j)]);
        sum += lateral * std::sin(interior_angle(q, j));
    }
    return 0.25 * sum;
}

AspectMeasurement quad_aspect_ratio(const Quad& q) {
    AspectMeasurement m;
    m.horizontal = quad_horizontal_length(q);
    m.vertical = quad_vertical_length(q);
    if (m.vertical <= 0.0) {
        throw DegenerateGeometry("quad has zero vertical length");
    }
    m.ratio = m.horizontal / m.vertical;
    return m;
}

std::vector<Quad> polyline_decompose(const Polygon& poly) {
    const std::size_t count = poly.points.size();
    if (count < 6 || count % 2 != 0) {
        throw BadPointCount("curved decomposition needs an even point count >= 6, got " +
                            std::to_string(count));
    }
    const std::size_t n = count / 2;
    std::vector<Quad> quads;
    quads.reserve(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        quads.push_back(Quad{poly.points[k], poly.points[k + 1],
                             poly.points[2 * n - 2 - k], poly.points[2 * n - 1 - k]});
    }
    return quads;
}

AspectMeasurement curved_aspect_ratio(const Polygon& poly) {
    const std::vector<Quad> quads = polyline_decompose(poly);
    double hs_sum = 0.0;
    double vs_sum = 0.0;
    for (const Quad& q : quads) {
        hs_sum += quad_horizontal_length(q);
        const double vs = quad_vertical_length(q);
        if (vs <= 0.0) {
            throw DegenerateGeometry("decomposition quad has zero vertical length");
        }
        vs_sum += vs;
    }
    const double vs_mean = vs_sum / static_cast<double>(quads.size());
    AspectMeasurement m;
    m.horizontal = hs_sum;
    m.vertical = vs_mean;
    m.ratio = hs_sum / vs_mean;
    return m;
}

AspectMeasurement aspect_ratio(const Polygon& poly) {
    validate_polygon(poly);
    if (poly.points.size() == 4) {
        return quad_aspect_ratio(
            Quad{poly.points[0], poly.points[1], poly.points[2], poly.points[3]});
    }
    return curved_aspect_ratio(poly);
}

namespace {

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double scale = std::max({1.0, std::abs(a.x), std::abs(a.y), std::abs(b.x),
                                   std::abs(b.y), std::abs(p.x), std::abs(p.y)});
    if (std::abs(cross) > 1e-12 * scale * scale) {
        return false;
    }
    const double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    return dot >= -1e-12 * scale * scale && dot <= len2 + 1e-12 * scale * scale;
}

}  // namespace

bool point_in_polygon(const Point2& p, const Polygon& poly) {
    const std::size_t n = poly.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (on_segment(p, poly.points[i], poly.points[(i + 1) % n])) {
            return true;
        }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly.points[i];
        const Point2& b = poly.points[j];
        // Half-open rule on the vertical extent keeps vertex crossings
        // counted once.
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

BoundingBox bounding_box(const Polygon& poly) {
    BoundingBox bb;
    bb.min_x = bb.min_y = std::numeric_limits<double>::infinity();
    bb.max_x = bb.max_y = -std::numeric_limits<double>::infinity();
    for (const Point2& p : poly.points) {
        bb.min_x = std::min(bb.min_x, p.x);
        bb.min_y = std::min(bb.min_y, p.y);
        bb.max_x = std::max(bb.max_x, p.x);
        bb.max_y = std::max(bb.max_y, p.y);
    }
    return bb;
}

double polygon_iou(const Polygon& a, const Polygon& b, int resolution) {
    validate_polygon(a);
    validate_polygon(b);
    if (resolution < 64) {
        throw ValidationError("iou resolution must be >= 64");
    }
    const BoundingBox ba = bounding_box(a);
    const BoundingBox bb = bounding_box(b);
    if (ba.max_x < bb.min_x || bb.max_x < ba.min_x || ba.max_y < bb.min_y ||
        bb.max_y < ba.min_y) {
        return 0.0;
    }
    const double min_x = std::min(ba.min_x, bb.min_x);
    const double min_y = std::min(ba.min_y, bb.min_y);
    const double max_x = std::max(ba.max_x, bb.max_x);
    const double max_y = std::max(ba.max_y, bb.max_y);
    const double dx = (max_x - min_x) / resolution;
    const double dy = (max_y - min_y) / resolution;

    long inter = 0;
    long uni = 0;
    for (int iy = 0; iy < resolution; ++iy) {
        const double y = min_y + (iy + 0.5) * dy;
        for (int ix = 0; ix < resolution; ++ix) {
            const Point2 p{min_x + (ix + 0.5) * dx, y};
            const bool in_a = point_in_polygon(p, a);
            const bool in_b = point_in_polygon(p, b);
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    if (uni == 0) {
        throw DegenerateGeometry("both polygons have zero sampled area");
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace lenspot::geom
