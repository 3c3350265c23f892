#pragma once

#include <array>
#include <span>
#include <vector>

namespace cornerseg {

// Image coordinates: x grows to the right, y grows downwards. A pixel (col,
// row) covers [col, col+1) x [row, row+1) and is sampled at its center.

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
    friend Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
    friend bool operator==(Point, Point) = default;
};

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);

enum class CornerType : int { TL = 0, TR = 1, BR = 2, BL = 3 };

inline constexpr std::array<CornerType, 4> kCornerTypes = {CornerType::TL, CornerType::TR,
                                                           CornerType::BR, CornerType::BL};

const char* corner_type_name(CornerType t);
/// Parses "TL"/"TR"/"BR"/"BL"; throws std::invalid_argument otherwise.
CornerType corner_type_from_name(const char* name);

/// Oriented rectangle stored as its corners in [top-left, top-right,
/// bottom-right, bottom-left] order, which is clockwise on screen.
///
/// The type does not enforce the rectangle invariant; values read from files
/// or built from noisy corners may be arbitrary quadrilaterals. Use
/// is_rectangle() to check.
struct RotatedRect {
    std::array<Point, 4> corners{};

    Point tl() const { return corners[0]; }
    Point tr() const { return corners[1]; }
    Point br() const { return corners[2]; }
    Point bl() const { return corners[3]; }
    Point corner(CornerType t) const { return corners[static_cast<int>(t)]; }
    Point center() const;

    /// |TR - TL|
    double width() const;
    /// |BL - TL|
    double height() const;
    double short_side() const;
    double area() const;

    friend bool operator==(const RotatedRect&, const RotatedRect&) = default;
};

/// Strict weak order on corner coordinates, used to break score ties.
bool lexicographic_less(const RotatedRect& a, const RotatedRect& b);

struct AxisAlignedBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    static AxisAlignedBox centered_square(Point center, double side);
};

AxisAlignedBox bounding_box(const RotatedRect& r);
AxisAlignedBox bounding_box(std::span<const Point> pts);
double axis_aligned_iou(const AxisAlignedBox& a, const AxisAlignedBox& b);
bool overlaps(const AxisAlignedBox& a, const AxisAlignedBox& b);

struct CenterForm {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    /// Angle of the TL->TR edge in radians, in (-pi/2, pi/2].
    double theta = 0.0;
};

/// Builds a rectangle whose width edge (TL->TR) points along theta.
/// Throws InvalidBox for non-positive or non-finite sides.
RotatedRect from_center_form(double x, double y, double w, double h, double theta);
RotatedRect from_center_form(const CenterForm& c);

/// Inverse of from_center_form. Rectangles whose TL->TR edge points outside
/// (-pi/2, pi/2] are reported with theta shifted by pi (same point set).
CenterForm to_center_form(const RotatedRect& r);

/// True when opposite sides match within rel_tol * diagonal and adjacent
/// sides are orthogonal within angle_tol radians.
bool is_rectangle(const RotatedRect& r, double rel_tol = 1e-6, double angle_tol = 1e-6);

/// Minimum-area enclosing rectangle (rotating calipers over the convex hull).
/// The result has its TL->TR edge within (-pi/4, pi/4] of horizontal, which
/// is the canonical corner labeling. Throws DegenerateGeometry for fewer than
/// three points or collinear input.
RotatedRect min_area_rect(std::span<const Point> points);

/// Andrew's monotone chain; returns hull vertices in screen-clockwise order
/// (positive shoelace area in y-down coordinates) without repeated endpoints.
std::vector<Point> convex_hull(std::vector<Point> points);

/// Signed shoelace area; positive for TL,TR,BR,BL (screen-clockwise) order.
double signed_area(std::span<const Point> polygon);

/// Boundary-inclusive point-in-rectangle test. Points within 1e-9 px of an
/// edge count as inside.
bool contains(const RotatedRect& rect, Point p);

/// Intersection of two convex polygons (Sutherland-Hodgman). Both inputs
/// may have either orientation.
std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip);

double intersection_area(const RotatedRect& a, const RotatedRect& b);

/// Polygon IoU in [0, 1]. Exactly symmetric in its arguments; returns 0 when
/// the union has zero area.
double rotated_iou(const RotatedRect& a, const RotatedRect& b);

/// Rotates p by angle (radians) about origin, screen-clockwise for positive angles.
Point rotate_about(Point p, Point origin, double angle);
RotatedRect rotate_about(const RotatedRect& r, Point origin, double angle);
RotatedRect translate(const RotatedRect& r, Point offset);

}  // namespace cornerseg
