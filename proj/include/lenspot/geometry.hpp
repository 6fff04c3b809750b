#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lenspot/errors.hpp"

namespace lenspot::geom {

struct Point2 {
    double x{0.0};
    double y{0.0};
};

bool finite(const Point2& p);
double distance(const Point2& a, const Point2& b);

// Annotation-order polygon: clockwise, starting at the text's top-left
// corner. Even point count, 4..16 points.
struct Polygon {
    std::vector<Point2> points;
};

// Throws on odd/out-of-range point counts or non-finite coordinates.
void validate_polygon(const Polygon& poly);

// top-left, top-right, bottom-right, bottom-left.
struct Quad {
    Point2 p0, p1, p2, p3;
};

struct AspectMeasurement {
    double horizontal{0.0};  // l_hs, pixels
    double vertical{0.0};    // l_vs, pixels
    double ratio{0.0};       // l_hs / l_vs
};

// Mean length of the two edges running along the character direction.
double quad_horizontal_length(const Quad& q);

// Interior angle at vertex j (law of cosines against the opposite
// diagonal, cos clamped to [-1, 1]).
double interior_angle(const Quad& q, int vertex_index);

// (1/4) sum_j |P_j - P_{3-j}| sin(theta_j); each lateral edge enters
// twice, once with the angle at each endpoint.
double quad_vertical_length(const Quad& q);

AspectMeasurement quad_aspect_ratio(const Quad& q);

// Splits a 2n-point polygon (top row P_0..P_{n-1}, bottom row
// P_n..P_{2n-1}) into n-1 quads (P_k, P_{k+1}, P_{2n-2-k}, P_{2n-1-k}).
std::vector<Quad> polyline_decompose(const Polygon& poly);

// ratio = sum_k l_hs^k / mean_k l_vs^k over the decomposition quads.
AspectMeasurement curved_aspect_ratio(const Polygon& poly);

// Aspect ratio for any supported polygon: 4 points via the quad rule,
// 2n >= 6 points via decomposition.
AspectMeasurement aspect_ratio(const Polygon& poly);

// Even-odd rule; boundary points count as inside.
bool point_in_polygon(const Point2& p, const Polygon& poly);

struct BoundingBox {
    double min_x{0.0}, min_y{0.0}, max_x{0.0}, max_y{0.0};
};
BoundingBox bounding_box(const Polygon& poly);

// Rasterized IoU: pixel-center even-odd sampling on a resolution^2 grid
// over the union's bounding box. Exact-clipping accuracy is not needed
// at detection thresholds; concave and touching annotations stay robust.
double polygon_iou(const Polygon& a, const Polygon& b, int resolution);

}  // namespace lenspot::geom
