#include "cornerseg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cornerseg/error.hpp"

namespace cornerseg {

namespace {

constexpr double kBoundaryTolerance = 1e-9;

std::array<double, 8> flatten(const RotatedRect& r) {
    std::array<double, 8> v{};
    for (int i = 0; i < 4; ++i) {
        v[2 * i] = r.corners[i].x;
        v[2 * i + 1] = r.corners[i].y;
    }
    return v;
}

}  // namespace

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }

const char* corner_type_name(CornerType t) {
    switch (t) {
        case CornerType::TL: return "TL";
        case CornerType::TR: return "TR";
        case CornerType::BR: return "BR";
        case CornerType::BL: return "BL";
    }
    return "?";
}

CornerType corner_type_from_name(const char* name) {
    for (CornerType t : kCornerTypes) {
        if (std::strcmp(name, corner_type_name(t)) == 0) return t;
    }
    throw std::invalid_argument(std::string("unknown corner type '") + name + "'");
}

Point RotatedRect::center() const {
    return {(corners[0].x + corners[1].x + corners[2].x + corners[3].x) / 4.0,
            (corners[0].y + corners[1].y + corners[2].y + corners[3].y) / 4.0};
}

double RotatedRect::width() const { return norm(tr() - tl()); }
double RotatedRect::height() const { return norm(bl() - tl()); }
double RotatedRect::short_side() const { return std::min(width(), height()); }
double RotatedRect::area() const { return std::abs(signed_area(corners)); }

bool lexicographic_less(const RotatedRect& a, const RotatedRect& b) {
    const auto va = flatten(a);
    const auto vb = flatten(b);
    return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
}

AxisAlignedBox AxisAlignedBox::centered_square(Point center, double side) {
    const double half = side / 2.0;
    return {center.x - half, center.y - half, center.x + half, center.y + half};
}

AxisAlignedBox bounding_box(std::span<const Point> pts) {
    AxisAlignedBox box{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const Point& p : pts.subspan(1)) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    return box;
}

AxisAlignedBox bounding_box(const RotatedRect& r) { return bounding_box(r.corners); }

bool overlaps(const AxisAlignedBox& a, const AxisAlignedBox& b) {
    return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max && b.y_min <= a.y_max;
}

double axis_aligned_iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

RotatedRect from_center_form(double x, double y, double w, double h, double theta) {
    if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) {
        throw InvalidBox("rectangle sides must be positive and finite (w=" + std::to_string(w) +
                         ", h=" + std::to_string(h) + ")");
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta)) {
        throw InvalidBox("rectangle center and angle must be finite");
    }
    const Point c{x, y};
    const Point u{std::cos(theta), std::sin(theta)};
    const Point v{-u.y, u.x};
    const Point hu = u * (w / 2.0);
    const Point hv = v * (h / 2.0);
    return RotatedRect{{c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv}};
}

RotatedRect from_center_form(const CenterForm& c) {
    return from_center_form(c.x, c.y, c.w, c.h, c.theta);
}

CenterForm to_center_form(const RotatedRect& r) {
    const Point u = r.tr() - r.tl();
    double theta = std::atan2(u.y, u.x);
    if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
    if (theta > std::numbers::pi / 2) theta -= std::numbers::pi;
    const Point c = r.center();
    return {c.x, c.y, r.width(), r.height(), theta};
}

bool is_rectangle(const RotatedRect& r, double rel_tol, double angle_tol) {
    const Point top = r.tr() - r.tl();
    const Point right = r.br() - r.tr();
    const Point bottom = r.bl() - r.br();
    const Point left = r.tl() - r.bl();
    const double diag = norm(r.br() - r.tl());
    const double tol = rel_tol * diag;
    if (std::abs(norm(top) - norm(bottom)) > tol) return false;
    if (std::abs(norm(left) - norm(right)) > tol) return false;
    const std::array<std::pair<Point, Point>, 4> adjacent = {
        std::pair{top, right}, {right, bottom}, {bottom, left}, {left, top}};
    for (const auto& [a, b] : adjacent) {
        const double na = norm(a);
        const double nb = norm(b);
        if (na == 0.0 || nb == 0.0) continue;
        const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
        if (std::abs(std::acos(c) - std::numbers::pi / 2) > angle_tol) return false;
    }
    return true;
}

double signed_area(std::span<const Point> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += cross(polygon[i], polygon[(i + 1) % n]);
    }
    return acc / 2.0;
}

std::vector<Point> convex_hull(std::vector<Point> points) {
    std::sort(points.begin(), points.end(),
              [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3) return points;

    std::vector<Point> hull(2 * points.size());
    std::size_t k = 0;
    for (const Point& p : points) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
        const Point p = points[i];
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

RotatedRect min_area_rect(std::span<const Point> points) {
    if (points.size() < 3) {
        throw DegenerateGeometry("min_area_rect needs at least 3 points, got " +
                                 std::to_string(points.size()));
    }
    const std::vector<Point> hull = convex_hull({points.begin(), points.end()});
    const AxisAlignedBox aabb = bounding_box(points);
    const double scale = std::max({aabb.width(), aabb.height(), 1e-300});
    if (hull.size() < 3 || std::abs(signed_area(hull)) <= 1e-12 * scale * scale) {
        throw DegenerateGeometry("min_area_rect input is collinear");
    }

    double best_area = std::numeric_limits<double>::infinity();
    Point best_axis{1.0, 0.0};
    double s_lo = 0, s_hi = 0, t_lo = 0, t_hi = 0;
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point edge = hull[(i + 1) % n] - hull[i];
        const double len = norm(edge);
        if (len == 0.0) continue;
        const Point e = edge * (1.0 / len);
        const Point perp{-e.y, e.x};
        double smin = dot(hull[0], e), smax = smin;
        double tmin = dot(hull[0], perp), tmax = tmin;
        for (const Point& p : hull) {
            const double s = dot(p, e);
            const double t = dot(p, perp);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        const double area = (smax - smin) * (tmax - tmin);
        if (area < best_area * (1.0 - 1e-12)) {
            best_area = area;
            best_axis = e;
            s_lo = smin;
            s_hi = smax;
            t_lo = tmin;
            t_hi = tmax;
        }
    }

    const Point perp{-best_axis.y, best_axis.x};
    const Point center = best_axis * ((s_lo + s_hi) / 2.0) + perp * ((t_lo + t_hi) / 2.0);
    const double extent_axis = s_hi - s_lo;
    const double extent_perp = t_hi - t_lo;

    // Pick the one of {axis, perp, -axis, -perp} whose angle lies in (-pi/4, pi/4].
    struct Candidate {
        Point dir;
        double along;
        double across;
    };
    const std::array<Candidate, 4> candidates = {
        Candidate{best_axis, extent_axis, extent_perp},
        Candidate{perp, extent_perp, extent_axis},
        Candidate{best_axis * -1.0, extent_axis, extent_perp},
        Candidate{perp * -1.0, extent_perp, extent_axis},
    };
    const Candidate* chosen = &candidates[0];
    for (const Candidate& c : candidates) {
        const double angle = std::atan2(c.dir.y, c.dir.x);
        if (angle > -std::numbers::pi / 4 && angle <= std::numbers::pi / 4) {
            chosen = &c;
            break;
        }
    }
    const double theta = std::atan2(chosen->dir.y, chosen->dir.x);
    return from_center_form(center.x, center.y, chosen->along, chosen->across, theta);
}

bool contains(const RotatedRect& rect, Point p) {
    const double orientation = signed_area(rect.corners) >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < 4; ++i) {
        const Point a = rect.corners[i];
        const Point b = rect.corners[(i + 1) % 4];
        const Point edge = b - a;
        const double c = orientation * cross(edge, p - a);
        if (c < -kBoundaryTolerance * norm(edge)) return false;
    }
    return true;
}

std::vector<Point> clip_convex(std::span<const Point> subject, std::span<const Point> clip) {
    std::vector<Point> clip_poly(clip.begin(), clip.end());
    if (signed_area(clip_poly) < 0.0) std::reverse(clip_poly.begin(), clip_poly.end());

    std::vector<Point> output(subject.begin(), subject.end());
    std::vector<Point> input;
    const std::size_t m = clip_poly.size();
    for (std::size_t e = 0; e < m && !output.empty(); ++e) {
        const Point a = clip_poly[e];
        const Point b = clip_poly[(e + 1) % m];
        const Point edge = b - a;
        input.swap(output);
        output.clear();
        const std::size_t n = input.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point cur = input[i];
            const Point prev = input[(i + n - 1) % n];
            const double d_cur = cross(edge, cur - a);
            const double d_prev = cross(edge, prev - a);
            const bool in_cur = d_cur >= 0.0;
            const bool in_prev = d_prev >= 0.0;
            if (in_cur != in_prev) {
                const double t = d_prev / (d_prev - d_cur);
                output.push_back(prev + (cur - prev) * t);
            }
            if (in_cur) output.push_back(cur);
        }
    }
    return output;
}

double intersection_area(const RotatedRect& a, const RotatedRect& b) {
    if (!overlaps(bounding_box(a), bounding_box(b))) return 0.0;
    return std::abs(signed_area(clip_convex(a.corners, b.corners)));
}

double rotated_iou(const RotatedRect& a, const RotatedRect& b) {
    // Fixed argument order makes the result bitwise symmetric.
    const RotatedRect& first = lexicographic_less(b, a) ? b : a;
    const RotatedRect& second = &first == &a ? b : a;
    const double inter = intersection_area(first, second);
    if (inter <= 0.0) return 0.0;
    const double uni = first.area() + second.area() - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

Point rotate_about(Point p, Point origin, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Point d = p - origin;
    return {origin.x + d.x * c - d.y * s, origin.y + d.x * s + d.y * c};
}

RotatedRect rotate_about(const RotatedRect& r, Point origin, double angle) {
    RotatedRect out;
    for (int i = 0; i < 4; ++i) out.corners[i] = rotate_about(r.corners[i], origin, angle);
    return out;
}

RotatedRect translate(const RotatedRect& r, Point offset) {
    RotatedRect out;
    for (int i = 0; i < 4; ++i) out.corners[i] = r.corners[i] + offset;
    return out;
}

}  // namespace cornerseg
